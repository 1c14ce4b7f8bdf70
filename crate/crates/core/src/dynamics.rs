// Copyright 2026 The nmrqc Authors
// SPDX-License-Identifier: Apache-2.0

//! Pulse programs and their execution on density matrices.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::pauli::{self, Pauli, PauliString};
use crate::spin::SpinSystemConfig;
use crate::state::DensityMatrix;

/// One step of a pulse program.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum PulseEvent {
    /// Square RF segment, one (amplitude, phase) pair per channel.
    Rf {
        amp_hz: Vec<f64>,
        phase_rad: Vec<f64>,
        dur_s: f64,
    },
    /// Free evolution under the internal Hamiltonian.
    Delay { dur_s: f64 },
    /// Ideal gradient dephasing: zero every off-diagonal element.
    Crusher,
}

impl PulseEvent {
    pub fn rf(amp_hz: Vec<f64>, phase_rad: Vec<f64>, dur_s: f64) -> Self {
        PulseEvent::Rf {
            amp_hz,
            phase_rad,
            dur_s,
        }
    }

    pub fn delay(dur_s: f64) -> Self {
        PulseEvent::Delay { dur_s }
    }

    pub fn duration(&self) -> f64 {
        match self {
            PulseEvent::Rf { dur_s, .. } | PulseEvent::Delay { dur_s } => *dur_s,
            PulseEvent::Crusher => 0.0,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseProgram {
    pub events: Vec<PulseEvent>,
}

impl PulseProgram {
    pub fn new(events: Vec<PulseEvent>) -> Self {
        PulseProgram { events }
    }

    pub fn push(&mut self, e: PulseEvent) {
        self.events.push(e);
    }

    pub fn extend(&mut self, other: PulseProgram) {
        self.events.extend(other.events);
    }

    pub fn total_duration(&self) -> f64 {
        self.events.iter().map(PulseEvent::duration).sum()
    }

    pub fn delays(&self) -> impl Iterator<Item = f64> + '_ {
        self.events.iter().filter_map(|e| match e {
            PulseEvent::Delay { dur_s } => Some(*dur_s),
            _ => None,
        })
    }

    pub fn has_crusher(&self) -> bool {
        self.events.iter().any(|e| matches!(e, PulseEvent::Crusher))
    }

    /// Check durations and channel counts against `config`.
    pub fn validate(&self, config: &SpinSystemConfig) -> Result<()> {
        let nc = config.channels().len();
        for (i, e) in self.events.iter().enumerate() {
            let d = e.duration();
            if !(d.is_finite() && d >= 0.0) {
                return Err(Error::invalid(format!("events[{i}].dur_s"), format!("must be finite and >= 0, got {d}")));
            }
            if let PulseEvent::Rf { amp_hz, phase_rad, .. } = e {
                if amp_hz.len() != nc || phase_rad.len() != nc {
                    return Err(Error::invalid(
                        format!("events[{i}]"),
                        format!(
                            "expected {nc} channel amplitudes/phases, got {}/{}",
                            amp_hz.len(),
                            phase_rad.len()
                        ),
                    ));
                }
                if amp_hz.iter().chain(phase_rad).any(|v| !v.is_finite()) {
                    return Err(Error::invalid(format!("events[{i}]"), "non-finite amplitude or phase"));
                }
            }
        }
        Ok(())
    }

    pub fn from_json_str(text: &str, source_name: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse {
            source_name: source_name.to_string(),
            message: e.to_string(),
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        PulseProgram::from_json_str(&text, &path.display().to_string())
    }
}

/// How RF segments are propagated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum PulseModel {
    /// `H0 + H_rf` during the segment (physical square pulse).
    #[default]
    Finite,
    /// `H_rf` alone: internal evolution is suspended during pulses.
    Hard,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EvolveOptions {
    pub relaxation: bool,
    pub pulse_model: PulseModel,
}

impl EvolveOptions {
    pub fn with_relaxation(relaxation: bool) -> Self {
        EvolveOptions {
            relaxation,
            ..Default::default()
        }
    }

    pub fn hard() -> Self {
        EvolveOptions {
            relaxation: false,
            pulse_model: PulseModel::Hard,
        }
    }
}

/// `exp(-i h dt)` for a constant Hermitian generator in rad/s.
pub fn segment_propagator(h: &CMatrix, dt: f64) -> Result<CMatrix> {
    if !(dt.is_finite() && dt >= 0.0) {
        return Err(Error::invalid("dt", format!("must be finite and >= 0, got {dt}")));
    }
    linalg::expm_hermitian(h, dt)
}

/// Propagators for the timed events of a program; crushers yield `None`.
struct Propagators<'a> {
    config: &'a SpinSystemConfig,
    h0: CMatrix,
    controls: crate::spin::ControlOperators,
    model: PulseModel,
}

impl<'a> Propagators<'a> {
    fn new(config: &'a SpinSystemConfig, model: PulseModel) -> Self {
        Propagators {
            config,
            h0: config.internal_hamiltonian(),
            controls: config.control_operators(),
            model,
        }
    }

    fn event(&self, e: &PulseEvent) -> Result<Option<CMatrix>> {
        match e {
            PulseEvent::Rf {
                amp_hz,
                phase_rad,
                dur_s,
            } => {
                let rf = self.controls.rf(amp_hz, phase_rad)?;
                let h = match self.model {
                    PulseModel::Finite => &self.h0 + rf,
                    PulseModel::Hard => rf,
                };
                segment_propagator(&h, *dur_s).map(Some)
            }
            PulseEvent::Delay { dur_s } => segment_propagator(&self.h0, *dur_s).map(Some),
            PulseEvent::Crusher => Ok(None),
        }
    }
}

/// Run `program` on `rho`, events in time order.
///
/// With relaxation on, the relaxation channel is applied after each timed
/// event over that event's duration.
pub fn evolve_program(
    rho: &DensityMatrix,
    program: &PulseProgram,
    config: &SpinSystemConfig,
    options: EvolveOptions,
) -> Result<DensityMatrix> {
    evolve_program_trace(rho, program, config, options).map(|mut v| v.pop().expect("nonempty"))
}

/// Like [`evolve_program`] but returns the state after every event, preceded by the input.
pub fn evolve_program_trace(
    rho: &DensityMatrix,
    program: &PulseProgram,
    config: &SpinSystemConfig,
    options: EvolveOptions,
) -> Result<Vec<DensityMatrix>> {
    if rho.dim() != config.dim() {
        return Err(Error::Dimension {
            expected: config.dim(),
            got: rho.dim(),
        });
    }
    program.validate(config)?;
    let props = Propagators::new(config, options.pulse_model);
    let mut states = Vec::with_capacity(program.events.len() + 1);
    states.push(rho.clone());
    let mut cur = rho.clone();
    for e in &program.events {
        cur = match props.event(e)? {
            Some(u) => {
                let next = cur.evolve(&u)?;
                if options.relaxation {
                    apply_relaxation(&next, e.duration(), props.config)
                } else {
                    next
                }
            }
            None => apply_crusher(&cur),
        };
        states.push(cur.clone());
    }
    Ok(states)
}

/// Total unitary of a crusher-free program (later events multiply on the left).
pub fn program_unitary(
    program: &PulseProgram,
    config: &SpinSystemConfig,
    model: PulseModel,
) -> Result<CMatrix> {
    program.validate(config)?;
    let props = Propagators::new(config, model);
    let mut u = linalg::identity(config.dim());
    for (i, e) in program.events.iter().enumerate() {
        match props.event(e)? {
            Some(step) => u = step * u,
            None => {
                return Err(Error::invalid(
                    format!("events[{i}]"),
                    "a crusher is not unitary; program has no single propagator",
                ))
            }
        }
    }
    Ok(u)
}

/// Zero all off-diagonal elements in the computational basis.
pub fn apply_crusher(rho: &DensityMatrix) -> DensityMatrix {
    let d = rho.matrix().diagonal();
    DensityMatrix::from_matrix_unchecked(CMatrix::from_diagonal(&d))
}

/// Phenomenological T1/T2 channel over `dt` seconds, in the product-operator basis.
///
/// Each Pauli coefficient is multiplied by `e^{-dt/T2}` per X/Y factor and
/// `e^{-dt/T1}` per Z factor; weight-one `σ_z^k` terms additionally relax
/// toward the thermal polarization `ε_k`.
pub fn apply_relaxation(rho: &DensityMatrix, dt: f64, config: &SpinSystemConfig) -> DensityMatrix {
    if dt == 0.0 {
        return rho.clone();
    }
    let n = config.n_qubits();
    let e1: Vec<f64> = config.nuclei.iter().map(|k| (-dt / k.t1_s).exp()).collect();
    let e2: Vec<f64> = config.nuclei.iter().map(|k| (-dt / k.t2_s).exp()).collect();
    let mut coeffs = pauli::pauli_expand(rho);
    let strings: Vec<(PauliString, f64)> = coeffs.iter().collect();
    for (p, c) in strings {
        if p.is_identity() {
            continue;
        }
        let mut factor = 1.0;
        for (k, f) in p.factors().iter().enumerate() {
            factor *= match f {
                Pauli::I => 1.0,
                Pauli::X | Pauli::Y => e2[k],
                Pauli::Z => e1[k],
            };
        }
        coeffs.set(&p, c * factor);
    }
    for (k, nuc) in config.nuclei.iter().enumerate() {
        let p = PauliString::single(n, k, Pauli::Z);
        let c = coeffs.get(&p);
        coeffs.set(&p, c + nuc.polarization * (1.0 - e1[k]));
    }
    let m = coeffs.to_matrix();
    // Exact trace: the identity coefficient is untouched.
    DensityMatrix::from_matrix_unchecked((&m + m.adjoint()) * linalg::cr(0.5))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{bloch_vector, Ket};
    use std::f64::consts::{FRAC_1_SQRT_2, PI, TAU};

    fn one_qubit(offset: f64) -> SpinSystemConfig {
        SpinSystemConfig::single("1H", offset, 2.0, 0.5, 0.8).unwrap()
    }

    #[test]
    fn x180_propagator() {
        let cfg = one_qubit(0.0);
        let u_hz = 1000.0;
        let h = cfg.rf_hamiltonian(&[u_hz], &[0.0]).unwrap();
        let dt = 1.0 / (2.0 * u_hz);
        let u = segment_propagator(&h, dt).unwrap();
        let expected = linalg::sigma_x() * linalg::c(0.0, -1.0);
        assert!(linalg::max_abs_diff(&u, &expected) < 1e-12);
    }

    #[test]
    fn j_evolution_quarter_phases() {
        let h = SpinSystemConfig::gemini().internal_hamiltonian();
        let u = segment_propagator(&h, 1.0 / (2.0 * 697.4)).unwrap();
        let m = num_complex::Complex64::from_polar(1.0, -PI / 4.0);
        let p = num_complex::Complex64::from_polar(1.0, PI / 4.0);
        for (i, z) in [m, p, p, m].iter().enumerate() {
            assert!((u[(i, i)] - z).norm() < 1e-12);
        }
    }

    #[test]
    fn rabi_quarter_turn() {
        let cfg = one_qubit(0.0);
        let u = 5000.0;
        let prog = PulseProgram::new(vec![PulseEvent::rf(vec![u], vec![0.0], 1.0 / (4.0 * u))]);
        let out = evolve_program(&DensityMatrix::basis(1, 0), &prog, &cfg, EvolveOptions::default()).unwrap();
        let s = FRAC_1_SQRT_2;
        let k = Ket::new(linalg::CVector::from_vec(vec![linalg::cr(s), linalg::c(0.0, -s)])).unwrap();
        assert!(linalg::max_abs_diff(out.matrix(), k.to_density().matrix()) < 1e-12);
    }

    #[test]
    fn precession_about_z() {
        let nu = 37.0;
        let t = 0.004;
        let cfg = one_qubit(nu);
        let prog = PulseProgram::new(vec![PulseEvent::delay(t)]);
        let out = evolve_program(&Ket::plus().to_density(), &prog, &cfg, EvolveOptions::default()).unwrap();
        let b = bloch_vector(&out).unwrap();
        let phi = TAU * nu * t;
        assert!((b.x - phi.cos()).abs() < 1e-12);
        assert!((b.y - phi.sin()).abs() < 1e-12);
    }

    #[test]
    fn empty_program_is_identity() {
        let rho = DensityMatrix::basis(2, 2);
        let out = evolve_program(&rho, &PulseProgram::default(), &SpinSystemConfig::gemini(), EvolveOptions::default()).unwrap();
        assert_eq!(out, rho);
    }

    #[test]
    fn crusher_examples() {
        let out = apply_crusher(&Ket::plus().to_density());
        assert!(linalg::max_abs_diff(out.matrix(), DensityMatrix::maximally_mixed(1).matrix()) < 1e-15);
        let rho = DensityMatrix::basis(2, 1);
        assert_eq!(apply_crusher(&rho), rho);
    }

    #[test]
    fn relaxation_transverse_decay() {
        let cfg = one_qubit(0.0).with_polarization(0.0);
        let rho = Ket::plus().to_density();
        let out = apply_relaxation(&rho, cfg.nuclei[0].t2_s, &cfg);
        assert!((bloch_vector(&out).unwrap().x - (-1.0f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn relaxation_inversion_recovery() {
        let cfg = one_qubit(0.0);
        let eps = cfg.nuclei[0].polarization;
        let inverted = DensityMatrix::new(
            crate::pauli::PauliCoefficients::from_terms(1, &[("Z", -eps)]).unwrap().to_matrix(),
        )
        .unwrap();
        let dt = 0.7;
        let out = apply_relaxation(&inverted, dt, &cfg);
        let expected = eps * (1.0 - 2.0 * (-dt / cfg.nuclei[0].t1_s).exp());
        assert!((bloch_vector(&out).unwrap().z - expected).abs() < 1e-12);
        assert_eq!(apply_relaxation(&inverted, 0.0, &cfg), inverted);
    }

    #[test]
    fn program_json_roundtrip() {
        let prog = PulseProgram::new(vec![
            PulseEvent::rf(vec![100.0, 0.0], vec![0.0, PI], 1e-3),
            PulseEvent::delay(2e-3),
            PulseEvent::Crusher,
        ]);
        let text = serde_json::to_string(&prog).unwrap();
        assert!(text.contains("\"type\":\"rf\"") && text.contains("\"type\":\"crusher\""));
        assert_eq!(PulseProgram::from_json_str(&text, "p").unwrap(), prog);
        assert!((prog.total_duration() - 3e-3).abs() < 1e-18);
    }

    #[test]
    fn bad_channel_count_rejected() {
        let prog = PulseProgram::new(vec![PulseEvent::rf(vec![1.0], vec![0.0], 1e-3)]);
        assert!(prog.validate(&SpinSystemConfig::gemini()).is_err());
    }
}
