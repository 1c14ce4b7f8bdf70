// Copyright 2026 The nmrqc Authors
// SPDX-License-Identifier: Apache-2.0

//! Dense complex linear algebra used throughout the emulator.
//!
//! Matrices are `nalgebra::DMatrix<Complex64>`. Qubit 0 is the leftmost
//! tensor factor, i.e. the most significant bit of a basis index.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[inline]
pub fn cr(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn identity(dim: usize) -> CMatrix {
    CMatrix::identity(dim, dim)
}

pub fn sigma_x() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
}

pub fn sigma_y() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO])
}

pub fn sigma_z() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE])
}

/// Kronecker product; `a` is the leftmost factor.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Kronecker product of two column vectors.
pub fn kron_vec(a: &CVector, b: &CVector) -> CVector {
    let mut out = CVector::zeros(a.len() * b.len());
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i * b.len() + j] = x * y;
        }
    }
    out
}

/// Embed a single-qubit operator on `qubit` of an `n`-qubit register.
pub fn embed_single(op: &CMatrix, qubit: usize, n: usize) -> CMatrix {
    let mut out = identity(1);
    for k in 0..n {
        if k == qubit {
            out = kron(&out, op);
        } else {
            out = kron(&out, &identity(2));
        }
    }
    out
}

/// Embed a 2^k x 2^k operator acting on the ordered qubit list `targets`.
///
/// `targets[0]` is the most significant qubit of `op`'s own index space.
pub fn embed(op: &CMatrix, targets: &[usize], n: usize) -> CMatrix {
    let k = targets.len();
    let dim = 1usize << n;
    let sub = 1usize << k;
    assert_eq!(op.nrows(), sub);
    let mut out = CMatrix::zeros(dim, dim);
    // Bits of the full index that belong to the targets.
    let shift = |q: usize| n - 1 - q;
    let target_mask: usize = targets.iter().map(|&q| 1usize << shift(q)).sum();
    let sub_index = |full: usize| -> usize {
        targets
            .iter()
            .fold(0usize, |acc, &q| (acc << 1) | ((full >> shift(q)) & 1))
    };
    let scatter = |base: usize, s: usize| -> usize {
        let mut idx = base & !target_mask;
        for (pos, &q) in targets.iter().enumerate() {
            let bit = (s >> (k - 1 - pos)) & 1;
            idx |= bit << shift(q);
        }
        idx
    };
    for col in 0..dim {
        let sc = sub_index(col);
        for sr in 0..sub {
            let v = op[(sr, sc)];
            if v != ZERO {
                out[(scatter(col, sr), col)] = v;
            }
        }
    }
    out
}

pub fn trace(a: &CMatrix) -> Complex64 {
    a.diagonal().iter().sum()
}

/// Largest elementwise modulus of `a - b`.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn max_abs(a: &CMatrix) -> f64 {
    a.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

pub fn is_hermitian(a: &CMatrix, tol: f64) -> bool {
    a.is_square() && max_abs_diff(a, &a.adjoint()) <= tol
}

pub fn is_unitary(u: &CMatrix, tol: f64) -> bool {
    u.is_square() && max_abs_diff(&(u.adjoint() * u), &identity(u.nrows())) <= tol
}

/// Hermitian eigendecomposition `h = V diag(values) V†`, eigenvalues ascending.
pub fn hermitian_eigen(h: &CMatrix) -> (Vec<f64>, CMatrix) {
    // Symmetrize to remove round-off asymmetry before the QR sweeps.
    let sym = (h + h.adjoint()).map(|z| z * 0.5);
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMatrix::zeros(h.nrows(), h.ncols());
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

/// Apply a scalar function to a Hermitian matrix through its spectrum.
pub fn hermitian_map(h: &CMatrix, f: impl Fn(f64) -> Complex64) -> CMatrix {
    let (values, v) = hermitian_eigen(h);
    let d = CVector::from_iterator(values.len(), values.iter().map(|&x| f(x)));
    let scaled = CMatrix::from_fn(v.nrows(), v.ncols(), |r, col| v[(r, col)] * d[col]);
    scaled * v.adjoint()
}

/// `exp(-i h t)` for Hermitian `h`.
pub fn expm_hermitian(h: &CMatrix, t: f64) -> Result<CMatrix> {
    if !is_hermitian(h, 1e-9 * (1.0 + max_abs(h))) {
        return Err(Error::invalid("hamiltonian", "generator is not Hermitian"));
    }
    Ok(hermitian_map(h, |lambda| Complex64::from_polar(1.0, -lambda * t)))
}

/// Principal square root of a positive semidefinite Hermitian matrix.
/// Negative eigenvalues from round-off are clamped to zero.
pub fn sqrtm_psd(h: &CMatrix) -> CMatrix {
    hermitian_map(h, |lambda| cr(lambda.max(0.0).sqrt()))
}

/// Apply `u rho u†`.
pub fn conjugate(u: &CMatrix, rho: &CMatrix) -> CMatrix {
    u * rho * u.adjoint()
}

/// Solve a real least-squares system `a x = b` via SVD.
pub fn lstsq(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    let svd = a.clone().svd(true, true);
    let max_sv = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let min_sv = svd
        .singular_values
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    if max_sv == 0.0 || min_sv < 1e-12 * max_sv {
        return Err(Error::Numerical("rank-deficient least-squares system".into()));
    }
    svd.solve(b, 1e-14 * max_sv)
        .map_err(|e| Error::Numerical(e.to_string()))
}

/// Solve a complex square system.
pub fn solve_complex(a: &CMatrix, b: &CVector) -> Result<CVector> {
    a.clone()
        .lu()
        .solve(b)
        .ok_or_else(|| Error::Numerical("singular linear system".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kron_zz_is_diag() {
        let zz = kron(&sigma_z(), &sigma_z());
        let expected = CMatrix::from_diagonal(&CVector::from_vec(vec![ONE, -ONE, -ONE, ONE]));
        assert!(max_abs_diff(&zz, &expected) < 1e-15);
    }

    #[test]
    fn embed_matches_kron() {
        let x = sigma_x();
        let y = sigma_y();
        let xy = kron(&x, &y);
        // Operator on (0, 2) of three qubits equals x ⊗ I ⊗ y.
        let expected = kron(&kron(&x, &identity(2)), &y);
        assert!(max_abs_diff(&embed(&xy, &[0, 2], 3), &expected) < 1e-15);
        // Reversed target order swaps the roles.
        let expected_rev = kron(&kron(&y, &identity(2)), &x);
        assert!(max_abs_diff(&embed(&xy, &[2, 0], 3), &expected_rev) < 1e-15);
    }

    #[test]
    fn expm_rejects_non_hermitian() {
        let a = CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ZERO, ZERO]);
        assert!(expm_hermitian(&a, 1.0).is_err());
    }

    #[test]
    fn sqrtm_squares_back() {
        let h = CMatrix::from_row_slice(2, 2, &[cr(2.0), c(0.5, 0.5), c(0.5, -0.5), cr(1.0)]);
        let s = sqrtm_psd(&h);
        assert!(max_abs_diff(&(&s * &s), &h) < 1e-12);
    }
}
