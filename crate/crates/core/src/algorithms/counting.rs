// Copyright 2026 The nmrqc Authors
// SPDX-License-Identifier: Apache-2.0

//! Approximate counting on a one-qubit search register (`N = 2`).
//!
//! A control qubit in `|+⟩` drives `l` controlled Grover iterations on the
//! register; after a final Hadamard its `⟨σ_z⟩` oscillates as `cos(lθ)` with
//! `sin²(θ/2) = M/N`, so fitting θ counts the marked items `M`.

use std::f64::consts::PI;
use std::str::FromStr;

use rayon::prelude::*;
use serde_json::json;

use crate::control::{Circuit, GateKind};
use crate::error::{Error, Result};
use crate::linalg;
use crate::state::{partial_trace, DensityMatrix};

use super::{AlgorithmReport, Runner};

/// Register size: one qubit, two items.
const N_ITEMS: f64 = 2.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CountingCase {
    /// No marked item.
    M0,
    /// `|0⟩` marked.
    M1First,
    /// `|1⟩` marked.
    M1Second,
    /// Both marked.
    M2,
}

impl CountingCase {
    pub const ALL: [CountingCase; 4] = [
        CountingCase::M0,
        CountingCase::M1First,
        CountingCase::M1Second,
        CountingCase::M2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CountingCase::M0 => "m0",
            CountingCase::M1First => "m1_first",
            CountingCase::M1Second => "m1_second",
            CountingCase::M2 => "m2",
        }
    }

    pub fn marked(self) -> usize {
        match self {
            CountingCase::M0 => 0,
            CountingCase::M1First | CountingCase::M1Second => 1,
            CountingCase::M2 => 2,
        }
    }

    /// Rotation angle of the Grover iteration, `2 asin(√(M/N))`.
    pub fn theta(self) -> f64 {
        2.0 * (self.marked() as f64 / N_ITEMS).sqrt().asin()
    }

    /// Controlled oracle with the control on qubit 0 and the register on qubit 1.
    fn controlled_oracle(self, c: Circuit) -> Circuit {
        match self {
            CountingCase::M0 => c,
            CountingCase::M1First => c
                .add(GateKind::X, &[1])
                .add(GateKind::Cz, &[0, 1])
                .add(GateKind::X, &[1]),
            CountingCase::M1Second => c.add(GateKind::Cz, &[0, 1]),
            CountingCase::M2 => c.add(GateKind::Z, &[0]),
        }
    }
}

impl FromStr for CountingCase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CountingCase::ALL
            .into_iter()
            .find(|c| c.name() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::invalid("case", format!("expected m0, m1_first, m1_second or m2, got {s:?}")))
    }
}

/// `H` on both qubits, `l` times (controlled oracle, CNOT), then `H` on the control.
pub fn counting_circuit(case: CountingCase, l: usize) -> Circuit {
    let mut c = Circuit::new(2).add(GateKind::H, &[0]).add(GateKind::H, &[1]);
    for _ in 0..l {
        c = case.controlled_oracle(c).add(GateKind::Cnot, &[0, 1]);
    }
    c.add(GateKind::H, &[0])
}

fn control_sigma_z(rho: &DensityMatrix) -> Result<f64> {
    let reduced = partial_trace(rho, &[0])?;
    Ok(reduced.expectation(&linalg::sigma_z()).re)
}

/// Least-squares θ in `[0, π]` for `s_l ≈ cos(lθ)`: grid search, then Newton polishing.
pub fn fit_rotation_angle(l_values: &[usize], sz: &[f64]) -> Result<f64> {
    if l_values.is_empty() || l_values.len() != sz.len() {
        return Err(Error::invalid("l_values", "need one signal per l and at least one l"));
    }
    let cost = |t: f64| -> f64 {
        l_values
            .iter()
            .zip(sz)
            .map(|(&l, &s)| ((l as f64 * t).cos() - s).powi(2))
            .sum()
    };
    let steps = 4000;
    let mut theta = (0..=steps)
        .map(|i| PI * i as f64 / steps as f64)
        .min_by(|a, b| cost(*a).total_cmp(&cost(*b)))
        .expect("grid is nonempty");
    for _ in 0..50 {
        let (mut g, mut h) = (0.0, 0.0);
        for (&l, &s) in l_values.iter().zip(sz) {
            let l = l as f64;
            let (sin, cos) = (l * theta).sin_cos();
            g += -2.0 * (cos - s) * l * sin;
            h += 2.0 * l * l * (sin * sin - (cos - s) * cos);
        }
        if h <= 0.0 {
            break;
        }
        let next = (theta - g / h).clamp(0.0, PI);
        if cost(next) > cost(theta) || next == theta {
            break;
        }
        theta = next;
    }
    Ok(theta)
}

/// Runs every `l` in `l_values`; the report holds the circuit and state of the last one.
pub fn run_counting(case: CountingCase, l_values: &[usize], runner: &Runner) -> Result<AlgorithmReport> {
    runner.check_n(2)?;
    if l_values.is_empty() {
        return Err(Error::invalid("l_values", "need at least one l"));
    }
    let runs: Vec<(Circuit, DensityMatrix, f64)> = l_values
        .par_iter()
        .map(|&l| {
            let circuit = counting_circuit(case, l);
            let rho = runner.run_from_ground(&circuit)?;
            let sz = control_sigma_z(&rho)?;
            Ok((circuit, rho, sz))
        })
        .collect::<Result<_>>()?;
    let sz: Vec<f64> = runs.iter().map(|r| r.2).collect();
    let theta = fit_rotation_angle(l_values, &sz)?;
    let m_estimate = N_ITEMS * (theta / 2.0).sin().powi(2);
    let (circuit, rho, _) = runs.into_iter().last().expect("nonempty");
    Ok(AlgorithmReport::new("count", runner.path, circuit, rho)
        .with("case", json!(case.name()))
        .with("l_values", json!(l_values))
        .with("sigma_z", json!(sz))
        .with("theta", json!(theta))
        .with("m_estimate", json!(m_estimate))
        .with("m", json!(m_estimate.round() as i64))
        .with("n_items", json!(N_ITEMS as i64)))
}
