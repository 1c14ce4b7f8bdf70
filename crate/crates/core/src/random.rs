// Copyright 2026 The nmrqc Authors
// SPDX-License-Identifier: Apache-2.0

//! Seeded sampling of unitaries and states for tests and randomized checks.

use rand::SeedableRng;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{self, CMatrix, CVector};
use crate::state::{DensityMatrix, Ket};

pub type SimRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        linalg::c(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

/// Haar-distributed unitary via QR of a Ginibre matrix with the phase fix on R's diagonal.
pub fn haar_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    let qr = ginibre(dim, dim, rng).qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { linalg::ONE };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Haar-random diagonal unitary.
pub fn random_diagonal_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    let phases = CVector::from_fn(dim, |_, _| {
        num_complex::Complex64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU))
    });
    CMatrix::from_diagonal(&phases)
}

pub fn random_ket<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Ket {
    let v = ginibre(1 << n, 1, rng).column(0).into_owned();
    Ket::normalized(v).expect("gaussian vector is nonzero")
}

/// Full-rank random density matrix `G G† / Tr(G G†)` (Hilbert–Schmidt measure).
pub fn random_density<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DensityMatrix {
    let dim = 1 << n;
    let g = ginibre(dim, dim, rng);
    let m = &g * g.adjoint();
    let tr = linalg::trace(&m);
    let m = m / tr;
    let m = (&m + m.adjoint()) * linalg::cr(0.5);
    DensityMatrix::new(m).expect("Hilbert-Schmidt sample is a valid state")
}

/// Mix of a random pure state with a random full-rank state, covering both regimes.
pub fn random_state<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DensityMatrix {
    if rng.random_bool(0.3) {
        random_ket(n, rng).to_density()
    } else {
        random_density(n, rng)
    }
}
