// Copyright 2026 The nmrqc Authors
// SPDX-License-Identifier: Apache-2.0

//! Harmonic-oscillator simulation on two spins.
//!
//! The lowest four levels map to `|n=0⟩ ↔ |↑↑⟩`, `|1⟩ ↔ |↓↑⟩`, `|2⟩ ↔ |↓↓⟩`,
//! `|3⟩ ↔ |↑↓⟩` with `|↑⟩ = |0⟩`. Up to a global phase the propagator is
//! `exp(iΩt σ_z²) exp(iΩt σ_z¹σ_z²/2)`: the coupling term comes from a
//! refocused J delay, the single-spin term from a y rotation conjugated by x
//! rotations.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::str::FromStr;

use rayon::prelude::*;
use serde_json::{json, Value};

use crate::control::{Circuit, GateKind};
use crate::error::{Error, Result};
use crate::linalg::{c, CMatrix, CVector};
use crate::measurement::tomography;
use crate::spin::SpinSystemConfig;
use crate::state::Ket;

use super::{ket_fidelity, AlgorithmReport, Runner};

/// Basis index of oscillator level `n`, for `n = 0..3`.
pub const QHO_LEVELS: [usize; 4] = [0b00, 0b10, 0b11, 0b01];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QhoInitial {
    /// Ground level.
    N0,
    /// `(|0⟩ + |3⟩)/√2`.
    N0PlusN3,
    /// Equal superposition of all four levels.
    Uniform4,
}

impl QhoInitial {
    pub const ALL: [QhoInitial; 3] = [QhoInitial::N0, QhoInitial::N0PlusN3, QhoInitial::Uniform4];

    pub fn name(self) -> &'static str {
        match self {
            QhoInitial::N0 => "n0",
            QhoInitial::N0PlusN3 => "n0_plus_n3",
            QhoInitial::Uniform4 => "uniform4",
        }
    }

    fn prepare(self, c: Circuit) -> Circuit {
        match self {
            QhoInitial::N0 => c,
            QhoInitial::N0PlusN3 => c.add(GateKind::H, &[1]),
            QhoInitial::Uniform4 => c.add(GateKind::H, &[0]).add(GateKind::H, &[1]),
        }
    }

    fn ket(self) -> Ket {
        let mut v = CVector::zeros(4);
        let levels: &[usize] = match self {
            QhoInitial::N0 => &[0],
            QhoInitial::N0PlusN3 => &[0, 3],
            QhoInitial::Uniform4 => &[0, 1, 2, 3],
        };
        for &n in levels {
            v[QHO_LEVELS[n]] = c(1.0, 0.0);
        }
        Ket::normalized(v).expect("nonzero")
    }
}

impl FromStr for QhoInitial {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        QhoInitial::ALL
            .into_iter()
            .find(|c| c.name() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::invalid("initial", format!("expected n0, n0_plus_n3 or uniform4, got {s:?}")))
    }
}

/// J-delay length `|Ωt| / (π|J|)` realizing `exp(iΩt σ_z¹σ_z²/2)`.
pub fn qho_delay(omega_t: f64, j_hz: f64) -> f64 {
    omega_t.abs() / (PI * j_hz.abs())
}

/// `exp(-iΩt(n + 1/2))` on the mapped levels.
pub fn qho_exact_unitary(omega_t: f64) -> CMatrix {
    let mut u = CMatrix::zeros(4, 4);
    for (n, &idx) in QHO_LEVELS.iter().enumerate() {
        let phase = -omega_t * (n as f64 + 0.5);
        u[(idx, idx)] = c(phase.cos(), phase.sin());
    }
    u
}

fn check_machine(config: &SpinSystemConfig) -> Result<f64> {
    if config.n_qubits() != 2 {
        return Err(Error::invalid("n", format!("the oscillator uses 2 qubits, got {}", config.n_qubits())));
    }
    let j = config.j(0, 1);
    if j == 0.0 {
        return Err(Error::UncoupledPair(0, 1));
    }
    if config.nuclei.iter().any(|n| n.offset_hz != 0.0) {
        return Err(Error::invalid("offset_hz", "the J delay assumes on-resonance spins"));
    }
    Ok(j)
}

/// Preparation of `initial`, then one step of `Ωt`.
///
/// The delay adds `exp(-iπJτ σ_z¹σ_z²/2)`; it is sandwiched by `Rx¹(π)`,
/// `Rx¹(-π)` when the sign of `J` opposes the sign of `Ωt`, which is the usual
/// case of positive `J` and `Ωt`.
pub fn qho_circuit(initial: QhoInitial, omega_t: f64, config: &SpinSystemConfig) -> Result<Circuit> {
    if !omega_t.is_finite() {
        return Err(Error::invalid("omega_t", format!("must be finite, got {omega_t}")));
    }
    let j = check_machine(config)?;
    let delay = GateKind::Delay(qho_delay(omega_t, j));
    let mut c = initial.prepare(Circuit::new(2));
    if omega_t * j > 0.0 {
        c = c.add(GateKind::Rx(PI), &[0]).add(delay, &[]).add(GateKind::Rx(-PI), &[0]);
    } else {
        c = c.add(delay, &[]);
    }
    Ok(c.add(GateKind::Rx(FRAC_PI_2), &[1])
        .add(GateKind::Ry(2.0 * omega_t), &[1])
        .add(GateKind::Rx(-FRAC_PI_2), &[1]))
}

fn wrap_phase(x: f64) -> f64 {
    let w = x.rem_euclid(TAU);
    if w > PI {
        w - TAU
    } else {
        w
    }
}

/// One report per `Ωt`; each final state is reconstructed by tomography.
///
/// `derived.coherence_phase` is `arg ρ[|↑↑⟩, |↑↓⟩]`, which advances by `3Ωt`
/// for the `|0⟩ + |3⟩` start.
pub fn simulate_qho(initial: QhoInitial, omega_t_values: &[f64], runner: &Runner) -> Result<Vec<AlgorithmReport>> {
    check_machine(&runner.config)?;
    omega_t_values
        .par_iter()
        .map(|&wt| {
            let circuit = qho_circuit(initial, wt, &runner.config)?;
            let rho = runner.run_from_ground(&circuit)?;
            let rho = tomography(&rho, &runner.config)?;
            let ideal = initial.ket().apply(&qho_exact_unitary(wt))?;
            let fidelity = ket_fidelity(&ideal, &rho)?;
            let coherence = rho.matrix()[(QHO_LEVELS[0], QHO_LEVELS[3])];
            let phase = if coherence.norm() > 1e-9 { json!(coherence.arg()) } else { Value::Null };
            let mut report = AlgorithmReport::new("qho", runner.path, circuit, rho);
            report.fidelity = Some(fidelity);
            Ok(report
                .with("initial", json!(initial.name()))
                .with("omega_t", json!(wt))
                .with("delay_s", json!(qho_delay(wt, runner.config.j(0, 1))))
                .with("coherence_phase", phase)
                .with("expected_phase", json!(wrap_phase(3.0 * wt))))
        })
        .collect()
}
