// Copyright 2026 The nmrqc Authors
// SPDX-License-Identifier: Apache-2.0

//! Oracle algorithms: Deutsch, Grover search over four items, Bernstein–Vazirani.

use std::str::FromStr;

use serde_json::json;

use crate::control::{circuit_unitary, Circuit, GateKind};
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::state::Ket;

use super::{basis_label, ket_fidelity, parse_bits, AlgorithmReport, Runner};

/// The four one-bit functions: `f1 = 0`, `f2 = 1`, `f3 = x`, `f4 = ¬x`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DeutschCase {
    F1,
    F2,
    F3,
    F4,
}

impl DeutschCase {
    pub const ALL: [DeutschCase; 4] = [DeutschCase::F1, DeutschCase::F2, DeutschCase::F3, DeutschCase::F4];

    pub fn name(self) -> &'static str {
        match self {
            DeutschCase::F1 => "f1",
            DeutschCase::F2 => "f2",
            DeutschCase::F3 => "f3",
            DeutschCase::F4 => "f4",
        }
    }

    pub fn is_balanced(self) -> bool {
        matches!(self, DeutschCase::F3 | DeutschCase::F4)
    }

    /// `U_f |x⟩|y⟩ = |x⟩|y ⊕ f(x)⟩` as gates on (query, answer) = (0, 1).
    fn oracle(self, c: Circuit) -> Circuit {
        match self {
            DeutschCase::F1 => c,
            DeutschCase::F2 => c.add(GateKind::X, &[1]),
            DeutschCase::F3 => c.add(GateKind::Cnot, &[0, 1]),
            DeutschCase::F4 => c
                .add(GateKind::X, &[0])
                .add(GateKind::Cnot, &[0, 1])
                .add(GateKind::X, &[0]),
        }
    }
}

impl FromStr for DeutschCase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        DeutschCase::ALL
            .into_iter()
            .find(|c| c.name() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::invalid("case", format!("expected f1..f4, got {s:?}")))
    }
}

/// `X₂`, then `H⊗H`, `U_f`, `H⊗H`.
pub fn deutsch_circuit(case: DeutschCase) -> Circuit {
    let c = Circuit::new(2)
        .add(GateKind::X, &[1])
        .add(GateKind::H, &[0])
        .add(GateKind::H, &[1]);
    case.oracle(c).add(GateKind::H, &[0]).add(GateKind::H, &[1])
}

/// Final state `|f(0)⊕f(1)⟩|1⟩`; the verdict is "balanced" when `P(|11⟩) > 1/2`.
pub fn run_deutsch(case: DeutschCase, runner: &Runner) -> Result<AlgorithmReport> {
    runner.check_n(2)?;
    let circuit = deutsch_circuit(case);
    let rho = runner.run_from_ground(&circuit)?;
    let expected = if case.is_balanced() { 0b11 } else { 0b01 };
    let fidelity = ket_fidelity(&Ket::basis(2, expected), &rho)?;
    let mut report = AlgorithmReport::new("deutsch", runner.path, circuit, rho);
    let verdict = if report.probability("11") > 0.5 { "balanced" } else { "constant" };
    report.fidelity = Some(fidelity);
    Ok(report
        .with("case", json!(case.name()))
        .with("verdict", json!(verdict))
        .with("expected", json!(basis_label(expected, 2))))
}

fn check_target(target: usize) -> Result<usize> {
    if (1..=4).contains(&target) {
        Ok(target - 1)
    } else {
        Err(Error::invalid("target", format!("expected 1..4, got {target}")))
    }
}

/// Sign flip of `|target⟩`: CZ conjugated by X on every qubit whose target bit is 0.
fn grover_oracle(c: Circuit, index: usize) -> Circuit {
    let flips: Vec<usize> = (0..2).filter(|q| index >> (1 - q) & 1 == 0).collect();
    let mut c = c;
    for &q in &flips {
        c = c.add(GateKind::X, &[q]);
    }
    c = c.add(GateKind::Cz, &[0, 1]);
    for &q in &flips {
        c = c.add(GateKind::X, &[q]);
    }
    c
}

/// `H⊗² X⊗² CZ X⊗² H⊗²`.
fn grover_diffusion(c: Circuit) -> Circuit {
    let layer = |c: Circuit, g: GateKind| c.add(g.clone(), &[0]).add(g, &[1]);
    let c = layer(layer(c, GateKind::H), GateKind::X).add(GateKind::Cz, &[0, 1]);
    layer(layer(c, GateKind::X), GateKind::H)
}

/// Items `1..4` are the basis states `|00⟩, |01⟩, |10⟩, |11⟩`: `H⊗²`, then one iteration `G`.
pub fn grover_circuit(target: usize) -> Result<Circuit> {
    let index = check_target(target)?;
    let c = Circuit::new(2).add(GateKind::H, &[0]).add(GateKind::H, &[1]);
    Ok(grover_diffusion(grover_oracle(c, index)))
}

/// The iteration `G = R2 R1` as a 4×4 matrix.
pub fn grover_operator(target: usize) -> Result<CMatrix> {
    let index = check_target(target)?;
    circuit_unitary(&grover_diffusion(grover_oracle(Circuit::new(2), index)), None)
}

/// `G` restricted to `span{|α⟩, |β⟩}` (`|β⟩` the target, `|α⟩` the uniform superposition
/// of the rest), with the global sign fixed so the `β←α` element is non-negative.
pub fn grover_rotation(target: usize) -> Result<[[f64; 2]; 2]> {
    let index = check_target(target)?;
    let g = grover_operator(target)?;
    let w = 1.0 / 3f64.sqrt();
    let alpha: Vec<(usize, f64)> = (0..4).filter(|&i| i != index).map(|i| (i, w)).collect();
    let beta = vec![(index, 1.0)];
    let elem = |bra: &[(usize, f64)], ket: &[(usize, f64)]| -> f64 {
        let mut acc = num_complex::Complex64::new(0.0, 0.0);
        for &(i, a) in bra {
            for &(j, b) in ket {
                acc += g[(i, j)] * (a * b);
            }
        }
        acc.re
    };
    let m = [[elem(&alpha, &alpha), elem(&alpha, &beta)], [elem(&beta, &alpha), elem(&beta, &beta)]];
    let s = if m[1][0] < 0.0 { -1.0 } else { 1.0 };
    Ok([[s * m[0][0], s * m[0][1]], [s * m[1][0], s * m[1][1]]])
}

pub fn run_grover4(target: usize, runner: &Runner) -> Result<AlgorithmReport> {
    runner.check_n(2)?;
    let circuit = grover_circuit(target)?;
    let index = target - 1;
    let rho = runner.run_from_ground(&circuit)?;
    let fidelity = ket_fidelity(&Ket::basis(2, index), &rho)?;
    let r = grover_rotation(target)?;
    let mut report = AlgorithmReport::new("grover4", runner.path, circuit, rho);
    report.fidelity = Some(fidelity);
    Ok(report
        .with("target", json!(target))
        .with("target_label", json!(basis_label(index, 2)))
        .with("rotation_angle", json!(r[1][0].atan2(r[0][0]))))
}

/// `H⊗ⁿ`, `U_f = ⊗ Z^{a_i}`, `H⊗ⁿ`: only single-qubit gates.
pub fn bv_circuit(a: &str) -> Result<Circuit> {
    parse_bits(a, "a")?;
    let n = a.len();
    if n > 3 {
        return Err(Error::invalid("a", format!("at most 3 bits, got {n}")));
    }
    let mut c = Circuit::new(n);
    for q in 0..n {
        c = c.add(GateKind::H, &[q]);
    }
    for (q, bit) in a.chars().enumerate() {
        if bit == '1' {
            c = c.add(GateKind::Z, &[q]);
        }
    }
    for q in 0..n {
        c = c.add(GateKind::H, &[q]);
    }
    Ok(c)
}

pub fn run_bernstein_vazirani(a: &str, runner: &Runner) -> Result<AlgorithmReport> {
    let circuit = bv_circuit(a)?;
    runner.check_n(circuit.n)?;
    let index = parse_bits(a, "a")?;
    let rho = runner.run_from_ground(&circuit)?;
    let fidelity = ket_fidelity(&Ket::basis(a.len(), index), &rho)?;
    let two_qubit = circuit.two_qubit_gate_count();
    let mut report = AlgorithmReport::new("bv", runner.path, circuit, rho);
    report.fidelity = Some(fidelity);
    let (outcome, _) = report.dominant();
    Ok(report
        .with("a", json!(a))
        .with("outcome", json!(outcome))
        .with("two_qubit_gates", json!(two_qubit)))
}
