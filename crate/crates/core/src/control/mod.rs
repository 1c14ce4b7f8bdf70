// Copyright 2026 The nmrqc Authors
// SPDX-License-Identifier: Apache-2.0

//! Gates, circuits, pulse compilation and GRAPE.

mod compile;
mod gates;
mod grape;

pub use compile::{compile_circuit, DEFAULT_PULSE_AMP_HZ};
pub use gates::{
    circuit_unitary, controlled, decompose_single_qubit, gate_matrix, gate_matrix_on, rx, ry, rz,
    BlochDecomposition, Circuit, Gate, GateKind,
};
pub use grape::{
    grape_optimize, ControlAmplitudes, GradientMode, GrapeConfig, GrapeInit, GrapeProblem,
    GrapeResult, SearchDirection,
};

use crate::error::{Error, Result};
use crate::linalg::CMatrix;

/// `|Tr(u target†)|² / d²`, insensitive to global phase.
pub fn gate_fidelity(u: &CMatrix, target: &CMatrix) -> Result<f64> {
    if u.nrows() != target.nrows() || !u.is_square() || !target.is_square() {
        return Err(Error::Dimension {
            expected: target.nrows(),
            got: u.nrows(),
        });
    }
    let d = u.nrows() as f64;
    let overlap: num_complex::Complex64 = u
        .iter()
        .zip(target.iter())
        .map(|(a, b)| a * b.conj())
        .sum();
    Ok((overlap.norm_sqr() / (d * d)).min(1.0))
}
