// Copyright 2026 The nmrqc Authors
// SPDX-License-Identifier: Apache-2.0

//! Calibration and preparation experiments: pseudo-pure state by spatial
//! averaging, Rabi calibration, inversion recovery and spin echo.
//!
//! Every experiment is a pulse program of x/y pulses, delays and crushers run
//! through [`crate::dynamics`]; signals are read from the resulting state.

mod fit;

use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, PI, TAU};
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::control::DEFAULT_PULSE_AMP_HZ;
use crate::dynamics::{evolve_program, evolve_program_trace, EvolveOptions, PulseEvent, PulseModel, PulseProgram};
use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliString};
use crate::report::fmt_float;
use crate::spin::{CouplingModel, SpinSystemConfig};
use crate::state::DensityMatrix;

pub use fit::{fit_model, FitModel, FitReport};

/// Inversion-recovery delays for ¹H, seconds.
pub const T1_DELAYS_1H_S: [f64; 13] = [
    20e-6, 50e-6, 100e-6, 200e-6, 400e-6, 1.2e-3, 4e-3, 12e-3, 50e-3, 200e-3, 1.0, 4.0, 15.0,
];
/// Inversion-recovery delays for ³¹P, seconds.
pub const T1_DELAYS_31P_S: [f64; 13] = [
    20e-6, 50e-6, 100e-6, 200e-6, 400e-6, 1.2e-3, 4e-3, 12e-3, 50e-3, 250e-3, 1.2, 6.0, 20.0,
];
/// Spin-echo half delays `t/2`, seconds.
pub const T2_HALF_DELAYS_S: [f64; 12] = [
    10e-6, 20e-6, 40e-6, 80e-6, 160e-6, 500e-6, 1.5e-3, 5e-3, 20e-3, 80e-3, 320e-3, 1.5,
];

/// A fitted fit counts as failed when its RMS residual exceeds this fraction of `max |y|`.
pub const FIT_RESIDUAL_LIMIT: f64 = 0.05;

/// Scan values, measured signal and the fitted model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub fit: Option<FitReport>,
}

impl ScanResult {
    /// CSV with header `x,y,fit_y`; `fit_y` is empty without a fit.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,y,fit_y\n");
        for (x, y) in self.x.iter().zip(&self.y) {
            let f = self.fit.as_ref().map(|f| fmt_float(f.eval(*x))).unwrap_or_default();
            let _ = writeln!(out, "{},{},{}", fmt_float(*x), fmt_float(*y), f);
        }
        out
    }

    fn fitted(x: Vec<f64>, y: Vec<f64>, model: FitModel) -> Result<Self> {
        let fit = fit_model(&x, &y, model)?;
        let peak = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if fit.residual > FIT_RESIDUAL_LIMIT * peak {
            return Err(Error::Fit(format!(
                "{}: residual {} exceeds {} of the signal maximum {peak}",
                model.name(),
                fit.residual,
                FIT_RESIDUAL_LIMIT
            )));
        }
        Ok(ScanResult { x, y, fit: Some(fit) })
    }
}

/// Square pulse on one channel; negative angles flip the phase.
fn channel_pulse(n_channels: usize, channel: usize, phase: f64, theta: f64, amp_hz: f64) -> PulseEvent {
    let mut amp = vec![0.0; n_channels];
    let mut ph = vec![0.0; n_channels];
    amp[channel] = amp_hz;
    ph[channel] = if theta < 0.0 { phase + PI } else { phase }.rem_euclid(TAU);
    PulseEvent::rf(amp, ph, theta.abs() / (TAU * amp_hz))
}

fn expectation(rho: &DensityMatrix, n: usize, q: usize, p: Pauli) -> f64 {
    PauliString::single(n, q, p).trace_with(rho.matrix()).re
}

fn channel_of(config: &SpinSystemConfig, label: &str) -> Result<(usize, Vec<usize>)> {
    let ch = config.channel(label)?;
    let idx = config
        .channels()
        .iter()
        .position(|c| c.label == ch.label)
        .expect("channel exists");
    Ok((idx, ch.qubits))
}

fn check_amp(amp_hz: f64) -> Result<()> {
    if amp_hz.is_finite() && amp_hz >= 0.0 {
        Ok(())
    } else {
        Err(Error::invalid("amplitude_hz", format!("must be finite and >= 0, got {amp_hz}")))
    }
}

fn check_times(field: &str, values: &[f64], min_len: usize) -> Result<()> {
    if values.len() < min_len {
        return Err(Error::invalid(field, format!("need >= {min_len} values, got {}", values.len())));
    }
    if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
        return Err(Error::invalid(field, format!("must be finite and >= 0, got {v}")));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Pseudo-pure state

/// Output of the spatial-averaging preparation.
#[derive(Clone, Debug)]
pub struct PseudoPure {
    pub program: PulseProgram,
    /// Input followed by the state after every event.
    pub trace: Vec<DensityMatrix>,
}

impl PseudoPure {
    pub fn state(&self) -> &DensityMatrix {
        self.trace.last().expect("trace holds the input")
    }

    /// State right after the first crusher.
    pub fn after_first_crusher(&self) -> &DensityMatrix {
        &self.trace[2]
    }

    /// State right after the delay, before the last pulse.
    pub fn after_delay(&self) -> &DensityMatrix {
        &self.trace[4]
    }
}

/// `Rx²(π/3), crusher, Rx¹(π/4), Delay(1/2J), Ry¹(-π/4), crusher` on each nucleus's channel.
pub fn pseudo_pure_program(config: &SpinSystemConfig, amp_hz: f64) -> Result<PulseProgram> {
    if config.n_qubits() != 2 {
        return Err(Error::invalid("n", format!("spatial averaging needs 2 qubits, got {}", config.n_qubits())));
    }
    let j = config.j(0, 1);
    if j == 0.0 {
        return Err(Error::UncoupledPair(0, 1));
    }
    if config.coupling_model != CouplingModel::Weak {
        return Err(Error::invalid("coupling_model", "spatial averaging assumes weak coupling"));
    }
    if config.nuclei.iter().any(|n| n.offset_hz != 0.0) {
        return Err(Error::invalid("offset_hz", "spatial averaging assumes on-resonance spins"));
    }
    if !(amp_hz.is_finite() && amp_hz > 0.0) {
        return Err(Error::invalid("amp_hz", format!("must be > 0, got {amp_hz}")));
    }
    let nc = config.channels().len();
    let c0 = config.channel_index_of_qubit(0);
    let c1 = config.channel_index_of_qubit(1);
    if c0 == c1 {
        return Err(Error::invalid("nuclei", "the two qubits need separate channels"));
    }
    Ok(PulseProgram::new(vec![
        channel_pulse(nc, c1, 0.0, FRAC_PI_3, amp_hz),
        PulseEvent::Crusher,
        channel_pulse(nc, c0, 0.0, FRAC_PI_4, amp_hz),
        PulseEvent::delay(1.0 / (2.0 * j.abs())),
        channel_pulse(nc, c0, FRAC_PI_2, -FRAC_PI_4, amp_hz),
        PulseEvent::Crusher,
    ]))
}

/// Pseudo-pure `|00⟩` from the thermal state with hard pulses.
///
/// With equal polarizations `ε` the result is `I/4 + (ε/8)(ZI + IZ + ZZ)`,
/// i.e. `(1-η) I/4 + η|00⟩⟨00|` with `η = ε/2`.
pub fn prepare_pseudo_pure(config: &SpinSystemConfig) -> Result<PseudoPure> {
    let program = pseudo_pure_program(config, DEFAULT_PULSE_AMP_HZ)?;
    let rho0 = config.thermal_state()?;
    let trace = evolve_program_trace(&rho0, &program, config, EvolveOptions::hard())?;
    Ok(PseudoPure { program, trace })
}

// ---------------------------------------------------------------------------
// Rabi calibration

#[derive(Clone, Debug, PartialEq)]
pub struct RabiResult {
    pub scan: ScanResult,
    pub t90: f64,
    pub t180: f64,
}

/// Resonant x pulse of `duration` at `amp_hz` on `channel`.
pub fn rabi_program(config: &SpinSystemConfig, channel: &str, amp_hz: f64, duration: f64) -> Result<PulseProgram> {
    let (idx, _) = channel_of(config, channel)?;
    let nc = config.channels().len();
    let mut amp = vec![0.0; nc];
    amp[idx] = amp_hz;
    Ok(PulseProgram::new(vec![PulseEvent::rf(amp, vec![0.0; nc], duration)]))
}

/// Transverse magnitude after a pulse of each duration, fitted to `A|sin(πt/t180)|`.
///
/// Pulses are finite: the internal Hamiltonian acts during them.
pub fn rabi_calibration(
    config: &SpinSystemConfig,
    channel: &str,
    amplitude_hz: f64,
    durations: &[f64],
) -> Result<RabiResult> {
    check_amp(amplitude_hz)?;
    check_times("durations", durations, 8)?;
    let (_, qubits) = channel_of(config, channel)?;
    let n = config.n_qubits();
    let rho0 = config.thermal_state()?;
    let options = EvolveOptions {
        relaxation: false,
        pulse_model: PulseModel::Finite,
    };
    let y = durations
        .par_iter()
        .map(|&d| {
            let program = rabi_program(config, channel, amplitude_hz, d)?;
            let rho = evolve_program(&rho0, &program, config, options)?;
            Ok(transverse_magnitude(&rho, n, &qubits))
        })
        .collect::<Result<Vec<f64>>>()?;
    let scan = ScanResult::fitted(durations.to_vec(), y, FitModel::AbsSine)?;
    let t180 = scan.fit.as_ref().expect("fitted").time();
    let (lo, hi) = durations
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    if hi - lo < t180 {
        return Err(Error::Fit(format!(
            "durations span {} s, less than one period ({t180} s) of the fitted oscillation",
            hi - lo
        )));
    }
    Ok(RabiResult {
        scan,
        t90: t180 / 2.0,
        t180,
    })
}

fn transverse_magnitude(rho: &DensityMatrix, n: usize, qubits: &[usize]) -> f64 {
    qubits
        .iter()
        .map(|&q| expectation(rho, n, q, Pauli::X).hypot(expectation(rho, n, q, Pauli::Y)))
        .sum::<f64>()
        / qubits.len() as f64
}

// ---------------------------------------------------------------------------
// Relaxation

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RelaxationMode {
    /// Inversion recovery `[X180, Delay(t), X90]`, fitted to `B(1 - 2e^{-t/T1})`.
    T1,
    /// Spin echo `[X90, Delay(t/2), Y180, Delay(t/2)]`, fitted to `Ae^{-t/T2}`.
    T2,
}

/// Static offset spread across the sample: an ensemble of molecules with extra offsets.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Inhomogeneity {
    pub points: usize,
    /// Offsets run symmetrically over `[-spread_hz, spread_hz]`.
    pub spread_hz: f64,
}

impl Inhomogeneity {
    /// 11 offsets spread over `±20/T2`, far wider than the natural linewidth.
    pub fn standard(t2_s: f64) -> Self {
        Inhomogeneity {
            points: 11,
            spread_hz: 20.0 / t2_s,
        }
    }

    pub fn offsets(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![0.0];
        }
        (0..self.points)
            .map(|i| self.spread_hz * (2.0 * i as f64 / (self.points - 1) as f64 - 1.0))
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RelaxationOptions {
    pub pulse_amp_hz: f64,
    pub inhomogeneity: Option<Inhomogeneity>,
    /// Omit the refocusing pulse in T2 mode (plain FID decay, for comparison).
    pub no_echo: bool,
}

impl Default for RelaxationOptions {
    fn default() -> Self {
        RelaxationOptions {
            pulse_amp_hz: DEFAULT_PULSE_AMP_HZ,
            inhomogeneity: None,
            no_echo: false,
        }
    }
}

/// Pulse program of one scan point; `t` is the inversion delay (T1) or the total echo time (T2).
pub fn relaxation_program(
    config: &SpinSystemConfig,
    channel: &str,
    mode: RelaxationMode,
    t: f64,
    options: &RelaxationOptions,
) -> Result<PulseProgram> {
    let (idx, _) = channel_of(config, channel)?;
    let nc = config.channels().len();
    let amp = options.pulse_amp_hz;
    if !(amp.is_finite() && amp > 0.0) {
        return Err(Error::invalid("pulse_amp_hz", format!("must be > 0, got {amp}")));
    }
    let events = match mode {
        RelaxationMode::T1 => vec![
            channel_pulse(nc, idx, 0.0, PI, amp),
            PulseEvent::delay(t),
            channel_pulse(nc, idx, 0.0, FRAC_PI_2, amp),
        ],
        RelaxationMode::T2 if options.no_echo => {
            vec![channel_pulse(nc, idx, 0.0, FRAC_PI_2, amp), PulseEvent::delay(t)]
        }
        RelaxationMode::T2 => vec![
            channel_pulse(nc, idx, 0.0, FRAC_PI_2, amp),
            PulseEvent::delay(t / 2.0),
            channel_pulse(nc, idx, FRAC_PI_2, PI, amp),
            PulseEvent::delay(t / 2.0),
        ],
    };
    Ok(PulseProgram::new(events))
}

/// T1 or T2 scan with default options.
pub fn relaxation_experiment(
    config: &SpinSystemConfig,
    channel: &str,
    mode: RelaxationMode,
    delays: &[f64],
) -> Result<ScanResult> {
    relaxation_experiment_with(config, channel, mode, delays, &RelaxationOptions::default())
}

/// Run the scan with relaxation on and hard pulses.
///
/// T1 records `-⟨σ_y⟩` after the read pulse (where X90 puts `⟨σ_z⟩`); T2 records
/// the transverse magnitude. With an inhomogeneity ensemble, `⟨σ_x⟩` and `⟨σ_y⟩`
/// are averaged over the ensemble before forming the signal.
pub fn relaxation_experiment_with(
    config: &SpinSystemConfig,
    channel: &str,
    mode: RelaxationMode,
    delays: &[f64],
    options: &RelaxationOptions,
) -> Result<ScanResult> {
    check_times("delays", delays, 5)?;
    let (_, qubits) = channel_of(config, channel)?;
    let n = config.n_qubits();
    let offsets = options.inhomogeneity.map(|h| h.offsets()).unwrap_or_else(|| vec![0.0]);
    if offsets.is_empty() {
        return Err(Error::invalid("inhomogeneity.points", "must be >= 1"));
    }
    let members: Vec<SpinSystemConfig> = offsets
        .iter()
        .map(|d| {
            let mut c = config.clone();
            for nuc in &mut c.nuclei {
                nuc.offset_hz += d;
            }
            c
        })
        .collect();
    let evolve = EvolveOptions {
        relaxation: true,
        pulse_model: PulseModel::Hard,
    };
    let y = delays
        .par_iter()
        .map(|&t| {
            let mut sx = vec![0.0; qubits.len()];
            let mut sy = vec![0.0; qubits.len()];
            for member in &members {
                let program = relaxation_program(member, channel, mode, t, options)?;
                let rho = evolve_program(&member.thermal_state()?, &program, member, evolve)?;
                for (i, &q) in qubits.iter().enumerate() {
                    sx[i] += expectation(&rho, n, q, Pauli::X) / members.len() as f64;
                    sy[i] += expectation(&rho, n, q, Pauli::Y) / members.len() as f64;
                }
            }
            let per_qubit = sx.iter().zip(&sy).map(|(x, y)| match mode {
                RelaxationMode::T1 => -y,
                RelaxationMode::T2 => x.hypot(*y),
            });
            Ok(per_qubit.sum::<f64>() / qubits.len() as f64)
        })
        .collect::<Result<Vec<f64>>>()?;
    let model = match mode {
        RelaxationMode::T1 => FitModel::InversionRecovery,
        RelaxationMode::T2 => FitModel::ExpDecay,
    };
    ScanResult::fitted(delays.to_vec(), y, model)
}

/// Total echo times `t = 2 (t/2)` from the half-delay grid.
pub fn t2_echo_times() -> Vec<f64> {
    T2_HALF_DELAYS_S.iter().map(|h| 2.0 * h).collect()
}
