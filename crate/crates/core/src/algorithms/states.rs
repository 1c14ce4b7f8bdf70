// Copyright 2026 The nmrqc Authors
// SPDX-License-Identifier: Apache-2.0

//! Bell-state preparation, CNOT truth tables and the one-clean-qubit trace estimate.

use std::f64::consts::FRAC_1_SQRT_2;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::control::{circuit_unitary, Circuit, Gate, GateKind};
use crate::error::{Error, Result};
use crate::linalg::{self, c, CMatrix, CVector};
use crate::measurement::tomography;
use crate::state::{partial_trace, DensityMatrix, Ket};

use super::{basis_label, ket_fidelity, probabilities_of, dominant, AlgorithmReport, ExecutionPath, Runner};

/// `Ψ± = (|00⟩ ± |11⟩)/√2`, `Φ± = (|01⟩ ± |10⟩)/√2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BellState {
    PsiPlus,
    PsiMinus,
    PhiPlus,
    PhiMinus,
}

impl BellState {
    pub const ALL: [BellState; 4] = [BellState::PsiPlus, BellState::PsiMinus, BellState::PhiPlus, BellState::PhiMinus];

    pub fn name(self) -> &'static str {
        match self {
            BellState::PsiPlus => "psi+",
            BellState::PsiMinus => "psi-",
            BellState::PhiPlus => "phi+",
            BellState::PhiMinus => "phi-",
        }
    }

    pub fn ket(self) -> Ket {
        let s = FRAC_1_SQRT_2;
        let (i, j, sign) = match self {
            BellState::PsiPlus => (0, 3, 1.0),
            BellState::PsiMinus => (0, 3, -1.0),
            BellState::PhiPlus => (1, 2, 1.0),
            BellState::PhiMinus => (1, 2, -1.0),
        };
        let mut v = CVector::zeros(4);
        v[i] = c(s, 0.0);
        v[j] = c(sign * s, 0.0);
        Ket::new(v).expect("normalized")
    }
}

impl FromStr for BellState {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.to_ascii_lowercase().replace("plus", "+").replace("minus", "-").replace('_', "");
        BellState::ALL
            .into_iter()
            .find(|b| b.name() == key)
            .ok_or_else(|| Error::invalid("state", format!("expected psi+, psi-, phi+ or phi-, got {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BellRecipe {
    /// `H¹, X², CY`; defined for `Φ⁻` only.
    Cy,
    /// Hadamard, optional `X²` and `Z¹`, then `CNOT₁₂`.
    Cnot,
}

impl BellRecipe {
    pub fn name(self) -> &'static str {
        match self {
            BellRecipe::Cy => "cy",
            BellRecipe::Cnot => "cnot",
        }
    }
}

impl FromStr for BellRecipe {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cy" => Ok(BellRecipe::Cy),
            "cnot" | "cx" => Ok(BellRecipe::Cnot),
            _ => Err(Error::invalid("recipe", format!("expected cy or cnot, got {s:?}"))),
        }
    }
}

pub fn bell_circuit(which: BellState, recipe: BellRecipe) -> Result<Circuit> {
    let c = Circuit::new(2).add(GateKind::H, &[0]);
    match recipe {
        BellRecipe::Cy if which == BellState::PhiMinus => {
            Ok(c.add(GateKind::X, &[1]).add(GateKind::Cy, &[0, 1]))
        }
        BellRecipe::Cy => Err(Error::invalid(
            "recipe",
            format!("the CY recipe prepares phi- only, not {}", which.name()),
        )),
        BellRecipe::Cnot => {
            let c = match which {
                BellState::PhiPlus | BellState::PhiMinus => c.add(GateKind::X, &[1]),
                _ => c,
            };
            let c = match which {
                BellState::PsiMinus | BellState::PhiMinus => c.add(GateKind::Z, &[0]),
                _ => c,
            };
            Ok(c.add(GateKind::Cnot, &[0, 1]))
        }
    }
}

/// Prepare a Bell state from `|00⟩`; the fidelity is against the ideal Bell ket.
pub fn prepare_bell(which: BellState, recipe: BellRecipe, runner: &Runner) -> Result<AlgorithmReport> {
    runner.check_n(2)?;
    let circuit = bell_circuit(which, recipe)?;
    let rho = runner.run_from_ground(&circuit)?;
    let fidelity = ket_fidelity(&which.ket(), &rho)?;
    let purities = [partial_trace(&rho, &[0])?.purity(), partial_trace(&rho, &[1])?.purity()];
    let mut report = AlgorithmReport::new("bell", runner.path, circuit, rho);
    report.fidelity = Some(fidelity);
    Ok(report
        .with("state", json!(which.name()))
        .with("recipe", json!(recipe.name()))
        .with("reduced_purity", json!(purities)))
}

/// CNOT orientation: `12` has qubit 0 as control, `21` qubit 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CnotDirection {
    D12,
    D21,
}

impl CnotDirection {
    pub fn name(self) -> &'static str {
        match self {
            CnotDirection::D12 => "12",
            CnotDirection::D21 => "21",
        }
    }

    fn gate(self) -> Gate {
        match self {
            CnotDirection::D12 => Gate::cnot(0, 1),
            CnotDirection::D21 => Gate::cnot(1, 0),
        }
    }

    /// Classical truth table of the gate on basis index `i`.
    pub fn apply(self, i: usize) -> usize {
        match self {
            CnotDirection::D12 if i & 0b10 != 0 => i ^ 0b01,
            CnotDirection::D21 if i & 0b01 != 0 => i ^ 0b10,
            _ => i,
        }
    }
}

impl FromStr for CnotDirection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "12" => Ok(CnotDirection::D12),
            "21" => Ok(CnotDirection::D21),
            _ => Err(Error::invalid("direction", format!("expected 12 or 21, got {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TruthRow {
    pub input: String,
    /// Dominant basis state of the tomographed output.
    pub output: String,
    pub probability: f64,
    /// Expected classical output.
    pub expected: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TruthTable {
    pub direction: CnotDirection,
    pub path: ExecutionPath,
    pub rows: Vec<TruthRow>,
}

impl TruthTable {
    pub fn to_json(&self) -> Value {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                json!({
                    "input": r.input,
                    "output": r.output,
                    "probability": r.probability,
                    "expected": r.expected,
                })
            })
            .collect();
        json!({
            "algorithm": "cnot-table",
            "direction": self.direction.name(),
            "path": self.path.name(),
            "rows": rows,
        })
    }
}

/// For each basis input (prepared with X gates) apply the CNOT, reconstruct the
/// output by tomography and report its dominant basis state.
pub fn cnot_truth_table(direction: CnotDirection, runner: &Runner) -> Result<TruthTable> {
    runner.check_n(2)?;
    let rows = (0..4usize)
        .into_par_iter()
        .map(|input| {
            let mut circuit = Circuit::new(2);
            for q in 0..2 {
                if input >> (1 - q) & 1 == 1 {
                    circuit.push(Gate::on(GateKind::X, q));
                }
            }
            circuit.push(direction.gate());
            let rho = tomography(&runner.run_from_ground(&circuit)?, &runner.config)?;
            let (output, probability) = dominant(&probabilities_of(&rho));
            Ok(TruthRow {
                input: basis_label(input, 2),
                output,
                probability,
                expected: basis_label(direction.apply(input), 2),
            })
        })
        .collect::<Result<_>>()?;
    Ok(TruthTable {
        direction,
        path: runner.path,
        rows,
    })
}

fn dqc1_register(u: &CMatrix) -> Result<usize> {
    let d = u.nrows();
    if !u.is_square() || !(d == 2 || d == 4) {
        return Err(Error::invalid("u", format!("need a 2x2 or 4x4 unitary, got {}x{}", d, u.ncols())));
    }
    if !linalg::is_unitary(u, 1e-10) {
        return Err(Error::invalid("u", "not unitary"));
    }
    Ok(d.trailing_zeros() as usize)
}

/// `H` on the clean qubit 0, then `|0⟩⟨0| ⊗ I + |1⟩⟨1| ⊗ u` on all qubits.
pub fn dqc1_circuit(u: &CMatrix) -> Result<Circuit> {
    let n = dqc1_register(u)?;
    let d = u.nrows();
    let mut cu = linalg::identity(2 * d);
    cu.view_mut((d, d), (d, d)).copy_from(u);
    let targets: Vec<usize> = (0..=n).collect();
    Ok(Circuit::new(n + 1)
        .add(GateKind::H, &[0])
        .add(GateKind::Custom(cu), &targets))
}

fn dqc1_state(u: &CMatrix, epsilon: f64) -> Result<(Circuit, DensityMatrix)> {
    if epsilon == 0.0 || !epsilon.is_finite() || epsilon.abs() > 1.0 {
        return Err(Error::invalid("epsilon", format!("need 0 < |ε| <= 1, got {epsilon}")));
    }
    let circuit = dqc1_circuit(u)?;
    let n = circuit.n - 1;
    let clean = (linalg::identity(2) + linalg::sigma_z() * c(epsilon, 0.0)) * c(0.5, 0.0);
    let mixed = linalg::identity(1 << n) * c(1.0 / (1 << n) as f64, 0.0);
    let rho0 = DensityMatrix::new(linalg::kron(&clean, &mixed))?;
    let rho = rho0.evolve(&circuit_unitary(&circuit, None)?)?;
    Ok((circuit, rho))
}

fn dqc1_estimate(rho: &DensityMatrix, epsilon: f64) -> Result<Complex64> {
    let control = partial_trace(rho, &[0])?;
    let x = control.expectation(&linalg::sigma_x()).re;
    let y = control.expectation(&linalg::sigma_y()).re;
    Ok(c(x, y) / epsilon)
}

/// Normalized trace `Tr(u)/2ⁿ` read from the clean qubit's `(⟨σx⟩ + i⟨σy⟩)/ε`.
pub fn dqc1_trace(u: &CMatrix, epsilon: f64) -> Result<Complex64> {
    let (_, rho) = dqc1_state(u, epsilon)?;
    dqc1_estimate(&rho, epsilon)
}

/// [`dqc1_trace`] as a report; always on the ideal path.
pub fn run_dqc1(u: &CMatrix, epsilon: f64) -> Result<AlgorithmReport> {
    let (circuit, rho) = dqc1_state(u, epsilon)?;
    let estimate = dqc1_estimate(&rho, epsilon)?;
    let exact = linalg::trace(u) / u.nrows() as f64;
    Ok(AlgorithmReport::new("dqc1", ExecutionPath::Ideal, circuit, rho)
        .with("epsilon", json!(epsilon))
        .with("trace_re", json!(estimate.re))
        .with("trace_im", json!(estimate.im))
        .with("exact_re", json!(exact.re))
        .with("exact_im", json!(exact.im)))
}
