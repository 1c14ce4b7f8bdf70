// Copyright 2026 The nmrqc Authors
// SPDX-License-Identifier: Apache-2.0

//! Core invariants shared by the property suite and the acceptance run.

#![allow(dead_code)]

use nmrqc::control::{gate_matrix, Gate, GateKind};
use nmrqc::linalg::{self, CMatrix};
use nmrqc::pauli::{pauli_expand, pauli_reconstruct};
use nmrqc::random::{haar_unitary, random_density, random_ket, random_state, seeded, SimRng};
use nmrqc::state::{partial_trace, state_fidelity, uhlmann_fidelity, DensityMatrix, QuantumState};
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;
use rand::Rng;

pub type Check = Result<(), TestCaseError>;

const TOL: f64 = 1e-10;

fn close(what: &str, err: f64, tol: f64) -> Check {
    prop_assert!(err <= tol, "{what}: deviation {err:e} > {tol:e}");
    Ok(())
}

/// Random Hermitian matrix with entries of order `scale`.
fn random_hermitian(dim: usize, scale: f64, rng: &mut SimRng) -> CMatrix {
    let a = CMatrix::from_fn(dim, dim, |_, _| linalg::c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    (&a + a.adjoint()) * linalg::cr(0.5 * scale)
}

/// Haar samples, `exp(-iHt)` and gate matrices are unitary.
pub fn unitarity(seed: u64, n: usize) -> Check {
    let mut rng = seeded(seed);
    let dim = 1 << n;
    let id = linalg::identity(dim);
    let h = random_hermitian(dim, 2e3, &mut rng);
    let t = rng.random_range(0.0..1e-2);
    let mut us = vec![haar_unitary(dim, &mut rng), linalg::expm_hermitian(&h, t).unwrap()];
    let q = rng.random_range(0..n);
    let theta = rng.random_range(-10.0..10.0);
    for kind in [GateKind::Rx(theta), GateKind::Ry(theta), GateKind::Rz(theta), GateKind::H] {
        us.push(gate_matrix(&Gate::on(kind, q), n).unwrap());
    }
    if n >= 2 {
        us.push(gate_matrix(&Gate::cnot(q, (q + 1) % n), n).unwrap());
    }
    for u in &us {
        close("U†U - I", linalg::max_abs_diff(&(u.adjoint() * u), &id), TOL)?;
    }
    // exp(-iHt) exp(-iHs) = exp(-iH(t+s)).
    let s = rng.random_range(0.0..1e-2);
    let lhs = linalg::expm_hermitian(&h, t).unwrap() * linalg::expm_hermitian(&h, s).unwrap();
    close("group law", linalg::max_abs_diff(&lhs, &linalg::expm_hermitian(&h, t + s).unwrap()), TOL)
}

/// Unitary evolution keeps unit trace, Hermiticity, the spectrum and positivity.
pub fn evolution_preserves_state(seed: u64, n: usize) -> Check {
    let mut rng = seeded(seed);
    let rho = random_state(n, &mut rng);
    let u = haar_unitary(1 << n, &mut rng);
    let out = rho.evolve(&u).unwrap();
    close("trace", (out.trace() - linalg::ONE).norm(), TOL)?;
    close("hermiticity", linalg::max_abs_diff(out.matrix(), &out.matrix().adjoint()), TOL)?;
    close("purity", (out.purity() - rho.purity()).abs(), TOL)?;
    let (a, b) = (sorted(rho.eigenvalues()), sorted(out.eigenvalues()));
    for (x, y) in a.iter().zip(&b) {
        close("spectrum", (x - y).abs(), 1e-9)?;
    }
    prop_assert!(b[0] >= -1e-10, "negative eigenvalue {}", b[0]);
    // Back to the start with U†.
    let back = out.evolve(&u.adjoint()).unwrap();
    close("inverse", linalg::max_abs_diff(back.matrix(), rho.matrix()), TOL)
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

/// Expanding in Pauli strings and summing back is the identity, with real coefficients.
pub fn pauli_roundtrip(seed: u64, n: usize) -> Check {
    let mut rng = seeded(seed);
    let rho = random_state(n, &mut rng);
    let coeffs = pauli_expand(&rho);
    prop_assert_eq!(coeffs.values().len(), 1 << (2 * n));
    close("identity coefficient", (coeffs.values()[0] - 1.0).abs(), TOL)?;
    let back = pauli_reconstruct(&coeffs).unwrap();
    close("roundtrip", linalg::max_abs_diff(back.matrix(), rho.matrix()), TOL)?;
    // Each coefficient is Tr(Pρ), checked directly.
    for (p, v) in coeffs.iter() {
        let direct = (p.matrix() * rho.matrix()).trace();
        close("coefficient", (direct - linalg::cr(v)).norm(), TOL)?;
    }
    Ok(())
}

/// Tracing out a product factor recovers it; tracing in steps equals tracing at once.
pub fn partial_trace_consistency(seed: u64, n: usize) -> Check {
    let mut rng = seeded(seed);
    let a = random_density(1, &mut rng);
    let rest = random_state(n, &mut rng);
    let joint = a.tensor(&rest);
    let keep_a = partial_trace(&joint, &[0]).unwrap();
    close("factor A", linalg::max_abs_diff(keep_a.matrix(), a.matrix()), TOL)?;
    let all_rest: Vec<usize> = (1..=n).collect();
    let keep_rest = partial_trace(&joint, &all_rest).unwrap();
    close("factor B", linalg::max_abs_diff(keep_rest.matrix(), rest.matrix()), TOL)?;

    let rho = random_state(n + 1, &mut rng);
    let q = rng.random_range(0..=n);
    let single = partial_trace(&rho, &[q]).unwrap();
    close("reduced trace", (single.trace() - linalg::ONE).norm(), TOL)?;
    close("reduced hermiticity", linalg::max_abs_diff(single.matrix(), &single.matrix().adjoint()), TOL)?;
    // Local expectation values are unchanged by the trace.
    let z = linalg::embed_single(&linalg::sigma_z(), q, n + 1);
    close("local expectation", (rho.expectation(&z) - single.expectation(&linalg::sigma_z())).norm(), TOL)?;
    if n >= 1 {
        let other = (q + 1) % (n + 1);
        let pair = partial_trace(&rho, &[q, other]).unwrap();
        let pos = if q < other { 0 } else { 1 };
        let stepwise = partial_trace(&pair, &[pos]).unwrap();
        close("stepwise", linalg::max_abs_diff(stepwise.matrix(), single.matrix()), TOL)?;
    }
    Ok(())
}

/// Fidelity lies in [0, 1], is symmetric, is one on equal states and agrees
/// across the pure and mixed formulas.
pub fn fidelity_bounds(seed: u64, n: usize) -> Check {
    let mut rng = seeded(seed);
    let rho = random_density(n, &mut rng);
    let sigma = random_state(n, &mut rng);
    let psi = random_ket(n, &mut rng);
    let (r, s) = (QuantumState::from(rho.clone()), QuantumState::from(sigma.clone()));
    let f = state_fidelity(&r, &s).unwrap();
    prop_assert!((0.0..=1.0).contains(&f), "F = {f}");
    close("symmetry", (f - state_fidelity(&s, &r).unwrap()).abs(), 1e-8)?;
    close("self", (state_fidelity(&r, &r).unwrap() - 1.0).abs(), 1e-8)?;
    let p = QuantumState::from(psi.clone());
    close("pure self", (state_fidelity(&p, &p).unwrap() - 1.0).abs(), TOL)?;
    let pure_mixed = state_fidelity(&p, &r).unwrap();
    let general = uhlmann_fidelity(&psi.to_density(), &rho);
    close("pure vs uhlmann", (pure_mixed - general).abs(), 1e-8)?;
    // Invariant under a common unitary.
    let u = haar_unitary(1 << n, &mut rng);
    let moved = state_fidelity(&QuantumState::from(rho.evolve(&u).unwrap()), &QuantumState::from(sigma.evolve(&u).unwrap()))
        .unwrap();
    close("unitary invariance", (moved - f).abs(), 1e-8)?;
    // Orthogonal basis states have zero overlap.
    let (b0, b1) = (DensityMatrix::basis(n, 0), DensityMatrix::basis(n, (1 << n) - 1));
    close("orthogonal", uhlmann_fidelity(&b0, &b1), TOL)
}

/// All five invariants on one sample.
pub fn all_invariants(seed: u64, n: usize) -> Check {
    unitarity(seed, n)?;
    evolution_preserves_state(seed, n)?;
    pauli_roundtrip(seed, n)?;
    partial_trace_consistency(seed, n.min(2))?;
    fidelity_bounds(seed, n)
}
