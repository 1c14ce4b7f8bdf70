// Copyright 2026 The nmrqc Authors
// SPDX-License-Identifier: Apache-2.0

//! State vectors, density matrices, Bloch vectors and state fidelity.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector};

/// Normalization tolerance for kets.
pub const KET_NORM_TOL: f64 = 1e-10;
/// Hermiticity and trace tolerance for density matrices.
pub const DENSITY_TOL: f64 = 1e-10;
/// Smallest eigenvalue accepted for a density matrix.
pub const EIGEN_FLOOR: f64 = -1e-9;
/// `1 - Tr(rho^2)` below this counts as pure.
pub const PURITY_TOL: f64 = 1e-9;
/// Largest supported register.
pub const MAX_QUBITS: usize = 6;

fn qubits_for_dim(dim: usize) -> Result<usize> {
    if dim < 2 || !dim.is_power_of_two() {
        return Err(Error::invalid("dimension", format!("{dim} is not 2^n with n >= 1")));
    }
    let n = dim.trailing_zeros() as usize;
    if n > MAX_QUBITS {
        return Err(Error::invalid(
            "dimension",
            format!("{n} qubits exceeds the supported maximum of {MAX_QUBITS}"),
        ));
    }
    Ok(n)
}

/// Normalized pure state of `n` qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct Ket {
    amplitudes: CVector,
}

impl Ket {
    pub fn new(amplitudes: CVector) -> Result<Self> {
        qubits_for_dim(amplitudes.len())?;
        let norm2: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm2 - 1.0).abs() > KET_NORM_TOL {
            return Err(Error::invalid("ket", format!("squared norm {norm2} != 1")));
        }
        Ok(Ket { amplitudes })
    }

    /// Build from arbitrary amplitudes, normalizing them.
    pub fn normalized(amplitudes: CVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if norm == 0.0 {
            return Err(Error::invalid("ket", "zero vector"));
        }
        Ket::new(amplitudes / Complex64::new(norm, 0.0))
    }

    /// Computational basis state `|index⟩` of `n` qubits.
    pub fn basis(n: usize, index: usize) -> Self {
        let mut v = CVector::zeros(1 << n);
        v[index] = linalg::ONE;
        Ket { amplitudes: v }
    }

    /// Basis state from a bit string such as `"01"`; the first character is qubit 0.
    pub fn from_bits(bits: &str) -> Result<Self> {
        let n = bits.len();
        let index = usize::from_str_radix(bits, 2)
            .map_err(|_| Error::invalid("bits", format!("'{bits}' is not a bit string")))?;
        qubits_for_dim(1 << n)?;
        Ok(Ket::basis(n, index))
    }

    /// `cos(θ/2)|0⟩ + e^{iφ} sin(θ/2)|1⟩`.
    pub fn from_bloch_angles(theta: f64, phi: f64) -> Self {
        let v = CVector::from_vec(vec![
            linalg::cr((theta / 2.0).cos()),
            Complex64::from_polar((theta / 2.0).sin(), phi),
        ]);
        Ket { amplitudes: v }
    }

    pub fn plus() -> Self {
        Ket::from_bloch_angles(std::f64::consts::FRAC_PI_2, 0.0)
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn n_qubits(&self) -> usize {
        self.dim().trailing_zeros() as usize
    }

    pub fn tensor(&self, other: &Ket) -> Ket {
        Ket {
            amplitudes: linalg::kron_vec(&self.amplitudes, &other.amplitudes),
        }
    }

    pub fn inner(&self, other: &Ket) -> Complex64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    pub fn apply(&self, u: &CMatrix) -> Result<Ket> {
        if u.nrows() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                got: u.nrows(),
            });
        }
        Ket::normalized(u * &self.amplitudes)
    }

    pub fn to_density(&self) -> DensityMatrix {
        let m = &self.amplitudes * self.amplitudes.adjoint();
        DensityMatrix {
            n: self.n_qubits(),
            m,
        }
    }
}

/// Hermitian, unit-trace, positive semidefinite `2^n x 2^n` matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    n: usize,
    m: CMatrix,
}

impl DensityMatrix {
    /// Validate and wrap a matrix.
    pub fn new(m: CMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::invalid("density matrix", "matrix is not square"));
        }
        let n = qubits_for_dim(m.nrows())?;
        if !linalg::is_hermitian(&m, DENSITY_TOL) {
            return Err(Error::invalid("density matrix", "not Hermitian"));
        }
        let tr = linalg::trace(&m);
        if (tr.re - 1.0).abs() > DENSITY_TOL || tr.im.abs() > DENSITY_TOL {
            return Err(Error::invalid("density matrix", format!("trace {tr} != 1")));
        }
        let (values, _) = linalg::hermitian_eigen(&m);
        if let Some(&lowest) = values.first() {
            if lowest < EIGEN_FLOOR {
                return Err(Error::invalid(
                    "density matrix",
                    format!("negative eigenvalue {lowest:e}"),
                ));
            }
        }
        Ok(DensityMatrix { n, m })
    }

    /// Wrap a matrix produced by a trace- and Hermiticity-preserving map.
    pub(crate) fn from_matrix_unchecked(m: CMatrix) -> Self {
        let n = m.nrows().trailing_zeros() as usize;
        DensityMatrix { n, m }
    }

    pub fn maximally_mixed(n: usize) -> Self {
        let d = 1usize << n;
        DensityMatrix {
            n,
            m: linalg::identity(d).map(|z| z / d as f64),
        }
    }

    pub fn basis(n: usize, index: usize) -> Self {
        Ket::basis(n, index).to_density()
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> CMatrix {
        self.m
    }

    pub fn trace(&self) -> Complex64 {
        linalg::trace(&self.m)
    }

    pub fn purity(&self) -> f64 {
        linalg::trace(&(&self.m * &self.m)).re
    }

    pub fn is_pure(&self) -> bool {
        (1.0 - self.purity()).abs() <= PURITY_TOL
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::hermitian_eigen(&self.m).0
    }

    /// Populations of the computational basis states.
    pub fn probabilities(&self) -> Vec<f64> {
        self.m.diagonal().iter().map(|z| z.re).collect()
    }

    /// `u rho u†`.
    pub fn evolve(&self, u: &CMatrix) -> Result<DensityMatrix> {
        if u.nrows() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                got: u.nrows(),
            });
        }
        Ok(DensityMatrix::from_matrix_unchecked(linalg::conjugate(u, &self.m)))
    }

    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        DensityMatrix {
            n: self.n + other.n,
            m: linalg::kron(&self.m, &other.m),
        }
    }

    /// Expectation value `Tr(rho O)`.
    pub fn expectation(&self, op: &CMatrix) -> Complex64 {
        linalg::trace(&(&self.m * op))
    }
}

/// Either operand kind accepted by [`tensor`].
#[derive(Clone, Debug, PartialEq)]
pub enum Operand {
    Vector(CVector),
    Matrix(CMatrix),
}

/// Kronecker product of two states or two operators; `a` is the leftmost factor.
pub fn tensor(a: &Operand, b: &Operand) -> Result<Operand> {
    match (a, b) {
        (Operand::Vector(x), Operand::Vector(y)) => Ok(Operand::Vector(linalg::kron_vec(x, y))),
        (Operand::Matrix(x), Operand::Matrix(y)) => {
            if !x.is_square() || !y.is_square() {
                return Err(Error::invalid("tensor", "operators must be square"));
            }
            Ok(Operand::Matrix(linalg::kron(x, y)))
        }
        _ => Err(Error::invalid(
            "tensor",
            "cannot mix a state vector with an operator",
        )),
    }
}

/// Reduced density matrix on the qubits in `keep` (0-based, any order; the
/// result orders kept qubits ascending).
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    let n = rho.n_qubits();
    if keep.is_empty() {
        return Err(Error::invalid("keep", "qubit set is empty"));
    }
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    if let Some(&bad) = kept.iter().find(|&&q| q >= n) {
        return Err(Error::invalid("keep", format!("qubit {bad} out of range for n = {n}")));
    }
    let traced: Vec<usize> = (0..n).filter(|q| !kept.contains(q)).collect();
    let k = kept.len();
    let shift = |q: usize| n - 1 - q;
    let compose = |kept_bits: usize, traced_bits: usize| -> usize {
        let mut idx = 0usize;
        for (pos, &q) in kept.iter().enumerate() {
            idx |= ((kept_bits >> (k - 1 - pos)) & 1) << shift(q);
        }
        let t = traced.len();
        for (pos, &q) in traced.iter().enumerate() {
            idx |= ((traced_bits >> (t - 1 - pos)) & 1) << shift(q);
        }
        idx
    };
    let dk = 1usize << k;
    let dt = 1usize << traced.len();
    let mut out = CMatrix::zeros(dk, dk);
    for r in 0..dk {
        for col in 0..dk {
            let mut acc = linalg::ZERO;
            for e in 0..dt {
                acc += rho.m[(compose(r, e), compose(col, e))];
            }
            out[(r, col)] = acc;
        }
    }
    Ok(DensityMatrix::from_matrix_unchecked(out))
}

/// `(⟨σx⟩, ⟨σy⟩, ⟨σz⟩)` of a single-qubit state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    /// Polar and azimuthal angles `(θ, φ)`.
    pub fn angles(&self) -> (f64, f64) {
        let r = self.norm();
        if r == 0.0 {
            return (0.0, 0.0);
        }
        ((self.z / r).clamp(-1.0, 1.0).acos(), self.y.atan2(self.x))
    }
}

pub fn bloch_vector(rho: &DensityMatrix) -> Result<BlochVector> {
    if rho.n_qubits() != 1 {
        return Err(Error::invalid(
            "bloch vector",
            format!("requires a single qubit, got {}", rho.n_qubits()),
        ));
    }
    Ok(BlochVector {
        x: rho.expectation(&linalg::sigma_x()).re,
        y: rho.expectation(&linalg::sigma_y()).re,
        z: rho.expectation(&linalg::sigma_z()).re,
    })
}

/// Pure or mixed state argument of [`state_fidelity`].
#[derive(Clone, Debug)]
pub enum QuantumState {
    Pure(Ket),
    Mixed(DensityMatrix),
}

impl QuantumState {
    fn dim(&self) -> usize {
        match self {
            QuantumState::Pure(k) => k.dim(),
            QuantumState::Mixed(r) => r.dim(),
        }
    }
}

impl From<Ket> for QuantumState {
    fn from(k: Ket) -> Self {
        QuantumState::Pure(k)
    }
}

impl From<DensityMatrix> for QuantumState {
    fn from(r: DensityMatrix) -> Self {
        QuantumState::Mixed(r)
    }
}

/// Uhlmann fidelity `(Tr sqrt(sqrt(σ) ρ sqrt(σ)))^2`, computed as the squared
/// nuclear norm of `sqrt(σ) sqrt(ρ)`.
///
/// Eigenvalues at round-off level are zeroed before the square root; otherwise
/// a rank-deficient argument turns `1e-17` noise into `3e-9` errors.
pub fn uhlmann_fidelity(sigma: &DensityMatrix, rho: &DensityMatrix) -> f64 {
    let root = |m: &CMatrix| {
        let (values, _) = linalg::hermitian_eigen(m);
        let floor = 1e-14 * values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        linalg::hermitian_map(m, |l| linalg::cr(if l > floor { l.sqrt() } else { 0.0 }))
    };
    let product = root(&sigma.m) * root(&rho.m);
    let tr: f64 = product.singular_values().iter().sum();
    tr * tr
}

/// Fidelity between two states, symmetric in its arguments and clamped to `[0, 1]`.
pub fn state_fidelity(a: &QuantumState, b: &QuantumState) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::Dimension {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    let f = match (a, b) {
        (QuantumState::Pure(x), QuantumState::Pure(y)) => x.inner(y).norm_sqr(),
        (QuantumState::Pure(x), QuantumState::Mixed(r))
        | (QuantumState::Mixed(r), QuantumState::Pure(x)) => {
            let v = x.amplitudes();
            (v.adjoint() * r.matrix() * v)[(0, 0)].re
        }
        (QuantumState::Mixed(s), QuantumState::Mixed(r)) => uhlmann_fidelity(s, r),
    };
    Ok(f.clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{cr, max_abs_diff};

    #[test]
    fn tensor_basis_states() {
        let k0 = Operand::Vector(Ket::basis(1, 0).amplitudes().clone());
        let k1 = Operand::Vector(Ket::basis(1, 1).amplitudes().clone());
        let Operand::Vector(v) = tensor(&k0, &k1).unwrap() else {
            panic!("expected vector")
        };
        assert_eq!(v, Ket::from_bits("01").unwrap().amplitudes().clone());
    }

    #[test]
    fn tensor_identities_and_rejects_mixed() {
        let id = Operand::Matrix(linalg::identity(2));
        let Operand::Matrix(m) = tensor(&id, &id).unwrap() else {
            panic!("expected matrix")
        };
        assert_eq!(m, linalg::identity(4));
        let v = Operand::Vector(Ket::basis(1, 0).amplitudes().clone());
        assert!(tensor(&id, &v).is_err());
    }

    #[test]
    fn partial_trace_element_formula() {
        // Reduced matrix of qubit 0 of a 4x4 matrix sums blocks elementwise.
        let m = CMatrix::from_fn(4, 4, |r, c| {
            if r == c {
                cr(0.25)
            } else {
                linalg::c(0.01 * (r + 2 * c) as f64, 0.0)
            }
        });
        let m = (&m + m.adjoint()).map(|z| z * 0.5);
        let rho = DensityMatrix::from_matrix_unchecked(m.clone());
        let red = partial_trace(&rho, &[0]).unwrap();
        let e = |r: usize, c: usize| m[(r, c)];
        let expected = CMatrix::from_row_slice(
            2,
            2,
            &[
                e(0, 0) + e(1, 1),
                e(0, 2) + e(1, 3),
                e(2, 0) + e(3, 1),
                e(2, 2) + e(3, 3),
            ],
        );
        assert!(max_abs_diff(red.matrix(), &expected) < 1e-15);
    }

    #[test]
    fn partial_trace_rejects_bad_keep() {
        let rho = DensityMatrix::maximally_mixed(2);
        assert!(partial_trace(&rho, &[]).is_err());
        assert!(partial_trace(&rho, &[2]).is_err());
    }

    #[test]
    fn bloch_examples() {
        let b = bloch_vector(&Ket::basis(1, 0).to_density()).unwrap();
        assert_eq!((b.x, b.y, b.z), (0.0, 0.0, 1.0));
        let half_pi = std::f64::consts::FRAC_PI_2;
        let b = bloch_vector(&Ket::from_bloch_angles(half_pi, half_pi).to_density()).unwrap();
        assert!(b.x.abs() < 1e-15 && (b.y - 1.0).abs() < 1e-15 && b.z.abs() < 1e-15);
        let b = bloch_vector(&DensityMatrix::maximally_mixed(1)).unwrap();
        assert_eq!(b.norm(), 0.0);
        assert!(bloch_vector(&DensityMatrix::maximally_mixed(2)).is_err());
    }

    #[test]
    fn fidelity_examples() {
        let k0: QuantumState = Ket::basis(1, 0).into();
        let k1: QuantumState = Ket::basis(1, 1).into();
        assert_eq!(state_fidelity(&k0, &k0).unwrap(), 1.0);
        assert_eq!(state_fidelity(&k0, &k1).unwrap(), 0.0);
        let plus: QuantumState = Ket::plus().into();
        let mixed: QuantumState = DensityMatrix::maximally_mixed(1).into();
        assert!((state_fidelity(&plus, &mixed).unwrap() - 0.5).abs() < 1e-15);
        assert!((state_fidelity(&mixed, &plus).unwrap() - 0.5).abs() < 1e-15);
        let k00: QuantumState = Ket::basis(2, 0).into();
        assert!(state_fidelity(&k0, &k00).is_err());
    }

    #[test]
    fn density_validation() {
        let bad_trace = linalg::identity(2);
        assert!(DensityMatrix::new(bad_trace).is_err());
        let negative = CMatrix::from_row_slice(2, 2, &[cr(1.5), cr(0.0), cr(0.0), cr(-0.5)]);
        assert!(DensityMatrix::new(negative).is_err());
        let non_herm =
            CMatrix::from_row_slice(2, 2, &[cr(0.5), cr(0.1), cr(0.0), cr(0.5)]);
        assert!(DensityMatrix::new(non_herm).is_err());
        assert!(Ket::new(CVector::from_vec(vec![cr(1.0), cr(1.0)])).is_err());
    }
}
