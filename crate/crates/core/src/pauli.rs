// Copyright 2026 The nmrqc Authors
// SPDX-License-Identifier: Apache-2.0

//! Product-operator (Pauli string) basis for density matrices.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::state::{DensityMatrix, DENSITY_TOL};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    pub fn matrix(self) -> CMatrix {
        match self {
            Pauli::I => linalg::identity(2),
            Pauli::X => linalg::sigma_x(),
            Pauli::Y => linalg::sigma_y(),
            Pauli::Z => linalg::sigma_z(),
        }
    }

    fn digit(self) -> usize {
        self as usize
    }

    pub fn is_transverse(self) -> bool {
        matches!(self, Pauli::X | Pauli::Y)
    }
}

/// Tensor product `P_0 ⊗ P_1 ⊗ ... ⊗ P_{n-1}` of single-qubit Paulis.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString(Vec<Pauli>);

impl PauliString {
    pub fn new(factors: Vec<Pauli>) -> Self {
        PauliString(factors)
    }

    pub fn identity(n: usize) -> Self {
        PauliString(vec![Pauli::I; n])
    }

    /// Single non-identity factor `p` on `qubit`.
    pub fn single(n: usize, qubit: usize, p: Pauli) -> Self {
        let mut f = vec![Pauli::I; n];
        f[qubit] = p;
        PauliString(f)
    }

    /// String with index `index` in base-4 ordering (qubit 0 most significant).
    pub fn from_index(n: usize, mut index: usize) -> Self {
        let mut f = vec![Pauli::I; n];
        for slot in f.iter_mut().rev() {
            *slot = Pauli::ALL[index % 4];
            index /= 4;
        }
        PauliString(f)
    }

    pub fn index(&self) -> usize {
        self.0.iter().fold(0, |acc, p| acc * 4 + p.digit())
    }

    pub fn factors(&self) -> &[Pauli] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().all(|&p| p == Pauli::I)
    }

    /// Number of non-identity factors.
    pub fn weight(&self) -> usize {
        self.0.iter().filter(|&&p| p != Pauli::I).count()
    }

    /// Strings that induce an FID: exactly one X or Y factor.
    pub fn is_observable(&self) -> bool {
        self.0.iter().filter(|p| p.is_transverse()).count() == 1
    }

    fn masks(&self) -> (usize, usize, u32) {
        let n = self.0.len();
        let mut x = 0usize;
        let mut z = 0usize;
        let mut ny = 0u32;
        for (q, p) in self.0.iter().enumerate() {
            let bit = 1usize << (n - 1 - q);
            match p {
                Pauli::I => {}
                Pauli::X => x |= bit,
                Pauli::Z => z |= bit,
                Pauli::Y => {
                    x |= bit;
                    z |= bit;
                    ny += 1;
                }
            }
        }
        (x, z, ny)
    }

    pub fn matrix(&self) -> CMatrix {
        let dim = 1usize << self.0.len();
        let (x, z, ny) = self.masks();
        let phase = linalg::I.powu(ny);
        let mut m = CMatrix::zeros(dim, dim);
        for col in 0..dim {
            let sign = if (col & z).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            m[(col ^ x, col)] = phase * sign;
        }
        m
    }

    /// `m += scale * P` without forming `P`.
    pub fn add_scaled_to(&self, m: &mut CMatrix, scale: Complex64) {
        let (x, z, ny) = self.masks();
        let phase = linalg::I.powu(ny) * scale;
        for col in 0..m.ncols() {
            if (col & z).count_ones() % 2 == 0 {
                m[(col ^ x, col)] += phase;
            } else {
                m[(col ^ x, col)] -= phase;
            }
        }
    }

    /// `Tr(m P)` without forming `P`.
    pub fn trace_with(&self, m: &CMatrix) -> Complex64 {
        let dim = m.nrows();
        let (x, z, ny) = self.masks();
        let phase = linalg::I.powu(ny);
        let mut acc = linalg::ZERO;
        for col in 0..dim {
            let v = m[(col, col ^ x)];
            if (col & z).count_ones() % 2 == 0 {
                acc += v;
            } else {
                acc -= v;
            }
        }
        acc * phase
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.0 {
            let ch = match p {
                Pauli::I => 'I',
                Pauli::X => 'X',
                Pauli::Y => 'Y',
                Pauli::Z => 'Z',
            };
            write!(f, "{ch}")?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|ch| match ch.to_ascii_uppercase() {
                'I' | '0' => Ok(Pauli::I),
                'X' => Ok(Pauli::X),
                'Y' => Ok(Pauli::Y),
                'Z' => Ok(Pauli::Z),
                other => Err(Error::invalid("pauli string", format!("bad factor '{other}'"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(PauliString)
    }
}

/// Real coefficients `c_P = Tr(rho P)` over all `4^n` Pauli strings.
///
/// The all-identity coefficient is the trace and equals 1 for states.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliCoefficients {
    n: usize,
    values: Vec<f64>,
}

impl PauliCoefficients {
    /// Coefficients of the state `I/2^n` (identity coefficient 1, rest 0).
    pub fn new(n: usize) -> Self {
        let mut values = vec![0.0; 1 << (2 * n)];
        values[0] = 1.0;
        PauliCoefficients { n, values }
    }

    /// Build from `(label, value)` pairs on top of the identity term.
    pub fn from_terms(n: usize, terms: &[(&str, f64)]) -> Result<Self> {
        let mut c = PauliCoefficients::new(n);
        for (label, v) in terms {
            let p: PauliString = label.parse()?;
            if p.len() != n {
                return Err(Error::invalid(
                    "pauli string",
                    format!("'{label}' has length {} for n = {n}", p.len()),
                ));
            }
            c.set(&p, *v);
        }
        Ok(c)
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn get(&self, p: &PauliString) -> f64 {
        self.values[p.index()]
    }

    pub fn get_label(&self, label: &str) -> Result<f64> {
        let p: PauliString = label.parse()?;
        Ok(self.get(&p))
    }

    pub fn set(&mut self, p: &PauliString, value: f64) {
        self.values[p.index()] = value;
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn iter(&self) -> impl Iterator<Item = (PauliString, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(move |(i, &v)| (PauliString::from_index(self.n, i), v))
    }

    /// Largest absolute difference to `other`.
    pub fn max_abs_diff(&self, other: &PauliCoefficients) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// `(1/2^n) Σ c_P P` without positivity checks; usable for deviation operators.
    pub fn to_matrix(&self) -> CMatrix {
        let dim = 1usize << self.n;
        let mut m = CMatrix::zeros(dim, dim);
        let norm = 1.0 / dim as f64;
        for (i, &v) in self.values.iter().enumerate() {
            if v != 0.0 {
                PauliString::from_index(self.n, i).add_scaled_to(&mut m, linalg::cr(v * norm));
            }
        }
        m
    }
}

/// `c_P = Tr(rho P)` for every Pauli string.
pub fn pauli_expand(rho: &DensityMatrix) -> PauliCoefficients {
    pauli_expand_matrix(rho.matrix())
}

/// Pauli expansion of any square matrix (real part of each coefficient).
pub fn pauli_expand_matrix(m: &CMatrix) -> PauliCoefficients {
    let n = m.nrows().trailing_zeros() as usize;
    let values = (0..1usize << (2 * n))
        .map(|i| PauliString::from_index(n, i).trace_with(m).re)
        .collect();
    PauliCoefficients { n, values }
}

/// `rho = (1/2^n) Σ c_P P`; the identity coefficient must be 1.
pub fn pauli_reconstruct(coeffs: &PauliCoefficients) -> Result<DensityMatrix> {
    if (coeffs.values[0] - 1.0).abs() > DENSITY_TOL {
        return Err(Error::invalid(
            "pauli coefficients",
            format!("identity coefficient {} implies trace != 1", coeffs.values[0]),
        ));
    }
    DensityMatrix::new(coeffs.to_matrix())
}
