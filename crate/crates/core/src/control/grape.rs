// Copyright 2026 The nmrqc Authors
// SPDX-License-Identifier: Apache-2.0

//! Gradient ascent pulse engineering over piecewise-constant x/y controls.

use rand::Rng;
use rayon::prelude::*;

use crate::dynamics::{PulseEvent, PulseProgram};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::random;
use crate::spin::{ControlOperators, SpinSystemConfig};

use super::gate_fidelity;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GrapeInit {
    /// Uniform in `[-u_max_hz, u_max_hz]` for every control.
    Random { u_max_hz: f64 },
    Constant { ux_hz: f64, uy_hz: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum GradientMode {
    /// `∂U_j/∂u ≈ -iΔt H_k U_j`, accurate when `Δt·‖H‖` is small.
    #[default]
    FirstOrder,
    /// Exact derivative of the segment exponential via its eigenbasis.
    Exact,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GrapeConfig {
    pub segments: usize,
    pub dt: f64,
    pub max_iters: usize,
    pub target_fidelity: f64,
    pub initial: GrapeInit,
    /// First trial step length along the normalized gradient, Hz.
    pub max_step_hz: f64,
    pub shrink: f64,
    pub max_trials: usize,
    pub gradient: GradientMode,
    pub direction: SearchDirection,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SearchDirection {
    /// Plain normalized gradient.
    #[default]
    Gradient,
    /// Polak–Ribière conjugate gradient, restarted whenever it stops ascending.
    ConjugateGradient,
}

impl Default for GrapeConfig {
    fn default() -> Self {
        GrapeConfig {
            segments: 100,
            dt: 1e-5,
            max_iters: 1000,
            target_fidelity: 0.995,
            initial: GrapeInit::Random { u_max_hz: 1000.0 },
            max_step_hz: 1e4,
            shrink: 0.5,
            max_trials: 30,
            gradient: GradientMode::FirstOrder,
            direction: SearchDirection::Gradient,
        }
    }
}

impl GrapeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.segments == 0 {
            return Err(Error::invalid("segments", "must be > 0"));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::invalid("dt", "must be > 0"));
        }
        if !(self.target_fidelity > 0.0 && self.target_fidelity <= 1.0) {
            return Err(Error::invalid("target_fidelity", "must lie in (0, 1]"));
        }
        if !(self.max_step_hz > 0.0) || !(self.shrink > 0.0 && self.shrink < 1.0) {
            return Err(Error::invalid("step search", "need max_step_hz > 0 and 0 < shrink < 1"));
        }
        Ok(())
    }

    pub fn total_duration(&self) -> f64 {
        self.segments as f64 * self.dt
    }
}

/// Piecewise-constant controls: `ux[j][c]`, `uy[j][c]` in Hz for segment `j`, channel `c`.
#[derive(Clone, Debug, PartialEq)]
pub struct ControlAmplitudes {
    pub ux: Vec<Vec<f64>>,
    pub uy: Vec<Vec<f64>>,
}

impl ControlAmplitudes {
    pub fn zeros(segments: usize, channels: usize) -> Self {
        ControlAmplitudes {
            ux: vec![vec![0.0; channels]; segments],
            uy: vec![vec![0.0; channels]; segments],
        }
    }

    pub fn segments(&self) -> usize {
        self.ux.len()
    }

    pub fn channels(&self) -> usize {
        self.ux.first().map_or(0, Vec::len)
    }

    fn flat_len(&self) -> usize {
        2 * self.segments() * self.channels()
    }

    // Flat layout: segment-major, then channel, then (x, y).
    fn get(&self, i: usize) -> f64 {
        let nc = self.channels();
        let (j, r) = (i / (2 * nc), i % (2 * nc));
        if r % 2 == 0 {
            self.ux[j][r / 2]
        } else {
            self.uy[j][r / 2]
        }
    }

    fn set(&mut self, i: usize, v: f64) {
        let nc = self.channels();
        let (j, r) = (i / (2 * nc), i % (2 * nc));
        if r % 2 == 0 {
            self.ux[j][r / 2] = v;
        } else {
            self.uy[j][r / 2] = v;
        }
    }

    fn axpy(&self, step: f64, dir: &[f64]) -> Self {
        let mut out = self.clone();
        for (i, d) in dir.iter().enumerate() {
            out.set(i, self.get(i) + step * d);
        }
        out
    }

    /// One square RF segment per time slice.
    pub fn to_program(&self, dt: f64) -> PulseProgram {
        let events = (0..self.segments())
            .map(|j| {
                let amp = (0..self.channels())
                    .map(|c| self.ux[j][c].hypot(self.uy[j][c]))
                    .collect();
                let phase = (0..self.channels())
                    .map(|c| self.uy[j][c].atan2(self.ux[j][c]))
                    .collect();
                PulseEvent::rf(amp, phase, dt)
            })
            .collect();
        PulseProgram::new(events)
    }
}

#[derive(Clone, Debug)]
pub struct GrapeResult {
    pub amplitudes: ControlAmplitudes,
    /// Fidelity before the first update and after every accepted step.
    pub fidelity_trace: Vec<f64>,
    pub final_unitary: CMatrix,
    pub final_fidelity: f64,
    pub iterations: usize,
    pub converged: bool,
    pub seed: u64,
    pub dt: f64,
}

impl GrapeResult {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("segment_index,channel,u_x_hz,u_y_hz\n");
        for j in 0..self.amplitudes.segments() {
            for c in 0..self.amplitudes.channels() {
                s.push_str(&format!(
                    "{j},{c},{},{}\n",
                    crate::report::fmt_float(self.amplitudes.ux[j][c]),
                    crate::report::fmt_float(self.amplitudes.uy[j][c])
                ));
            }
        }
        s
    }
}

/// Evaluates fidelity and its gradient for fixed target and machine.
pub struct GrapeProblem {
    h0: CMatrix,
    controls: ControlOperators,
    target: CMatrix,
    dt: f64,
}

impl GrapeProblem {
    pub fn new(target: &CMatrix, config: &SpinSystemConfig, dt: f64) -> Result<Self> {
        if target.nrows() != config.dim() || !target.is_square() {
            return Err(Error::Dimension {
                expected: config.dim(),
                got: target.nrows(),
            });
        }
        if !linalg::is_unitary(target, 1e-9) {
            return Err(Error::invalid("target", "not unitary"));
        }
        Ok(GrapeProblem {
            h0: config.internal_hamiltonian(),
            controls: config.control_operators(),
            target: target.clone(),
            dt,
        })
    }

    pub fn n_channels(&self) -> usize {
        self.controls.n_channels()
    }

    fn segment_hamiltonian(&self, u: &ControlAmplitudes, j: usize) -> CMatrix {
        &self.h0 + self.controls.rf_cartesian(&u.ux[j], &u.uy[j])
    }

    fn propagators(&self, u: &ControlAmplitudes) -> Vec<CMatrix> {
        (0..u.segments())
            .into_par_iter()
            .map(|j| linalg::hermitian_map(&self.segment_hamiltonian(u, j), |l| {
                num_complex::Complex64::from_polar(1.0, -l * self.dt)
            }))
            .collect()
    }

    pub fn unitary(&self, u: &ControlAmplitudes) -> CMatrix {
        self.propagators(u)
            .into_iter()
            .fold(linalg::identity(self.h0.nrows()), |acc, step| step * acc)
    }

    pub fn fidelity(&self, u: &ControlAmplitudes) -> f64 {
        gate_fidelity(&self.unitary(u), &self.target).expect("dimensions checked")
    }

    /// Fidelity and `∂F/∂u` in the flat layout of [`ControlAmplitudes`].
    pub fn gradient(&self, u: &ControlAmplitudes, mode: GradientMode) -> (f64, Vec<f64>) {
        let dim = self.h0.nrows();
        let d2 = (dim * dim) as f64;
        let n = u.segments();
        let nc = u.channels();
        let props: Vec<CMatrix> = match mode {
            GradientMode::FirstOrder => self.propagators(u),
            GradientMode::Exact => Vec::new(),
        };
        let eig: Vec<(Vec<f64>, CMatrix)> = match mode {
            GradientMode::Exact => (0..n)
                .into_par_iter()
                .map(|j| linalg::hermitian_eigen(&self.segment_hamiltonian(u, j)))
                .collect(),
            GradientMode::FirstOrder => Vec::new(),
        };
        let props: Vec<CMatrix> = if props.is_empty() {
            eig.iter()
                .map(|(vals, v)| {
                    let d = CMatrix::from_fn(dim, dim, |r, col| v[(r, col)] * num_complex::Complex64::from_polar(1.0, -vals[col] * self.dt));
                    d * v.adjoint()
                })
                .collect()
        } else {
            props
        };
        // forward[j] = U_j ... U_1 (after segment j), backward[j] = U_{j+1}† ... U_N† · target
        let mut forward = Vec::with_capacity(n);
        let mut acc = linalg::identity(dim);
        for p in &props {
            acc = p * acc;
            forward.push(acc.clone());
        }
        let total = acc;
        let mut backward = vec![CMatrix::zeros(dim, dim); n];
        let mut b = self.target.clone();
        for j in (0..n).rev() {
            backward[j] = b.clone();
            b = props[j].adjoint() * b;
        }
        let g = linalg::trace(&(self.target.adjoint() * &total));
        let fid = g.norm_sqr() / d2;
        let minus_i_dt = linalg::c(0.0, -self.dt);
        let grads: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|j| {
                let mut out = Vec::with_capacity(2 * nc);
                for c in 0..nc {
                    for hk in [&self.controls.x[c], &self.controls.y[c]] {
                        // dU_j: derivative of segment j's propagator.
                        let du = match mode {
                            GradientMode::FirstOrder => hk * &props[j] * minus_i_dt,
                            GradientMode::Exact => exact_derivative(&eig[j], hk, self.dt),
                        };
                        let prev = if j == 0 { linalg::identity(dim) } else { forward[j - 1].clone() };
                        let m = du * prev;
                        // Tr(B† M) = Σ conj(B) ∘ M
                        let t: num_complex::Complex64 = backward[j]
                            .iter()
                            .zip(m.iter())
                            .map(|(x, y)| x.conj() * y)
                            .sum();
                        out.push(2.0 * (g.conj() * t).re / d2);
                    }
                }
                out
            })
            .collect();
        (fid, grads.into_iter().flatten().collect())
    }
}

/// `d/du exp(-i (H + u H_k) dt)` at `u = 0`, with `H = V Λ V†`.
fn exact_derivative(eig: &(Vec<f64>, CMatrix), hk: &CMatrix, dt: f64) -> CMatrix {
    let (vals, v) = eig;
    let dim = vals.len();
    let hk_e = v.adjoint() * hk * v;
    let e: Vec<num_complex::Complex64> = vals
        .iter()
        .map(|&l| num_complex::Complex64::from_polar(1.0, -l * dt))
        .collect();
    let m = CMatrix::from_fn(dim, dim, |a, b| {
        let dl = vals[a] - vals[b];
        let factor = if (dl * dt).abs() < 1e-10 {
            e[a] * linalg::c(0.0, -dt)
        } else {
            (e[a] - e[b]) / dl
        };
        hk_e[(a, b)] * factor
    });
    v * m * v.adjoint()
}

fn initial_amplitudes(gcfg: &GrapeConfig, channels: usize, seed: u64) -> ControlAmplitudes {
    let mut u = ControlAmplitudes::zeros(gcfg.segments, channels);
    match gcfg.initial {
        GrapeInit::Constant { ux_hz, uy_hz } => {
            for j in 0..gcfg.segments {
                u.ux[j].fill(ux_hz);
                u.uy[j].fill(uy_hz);
            }
        }
        GrapeInit::Random { u_max_hz } => {
            let mut rng = random::seeded(seed);
            for i in 0..u.flat_len() {
                let v = if u_max_hz > 0.0 {
                    rng.random_range(-u_max_hz..=u_max_hz)
                } else {
                    0.0
                };
                u.set(i, v);
            }
        }
    }
    u
}

/// Optimize piecewise-constant controls so the pulse realizes `target` up to global phase.
///
/// Each iteration moves along the normalized gradient with a backtracking
/// step search that only accepts fidelity increases, so the recorded trace
/// is nondecreasing.
pub fn grape_optimize(
    target: &CMatrix,
    config: &SpinSystemConfig,
    gcfg: &GrapeConfig,
    seed: u64,
) -> Result<GrapeResult> {
    gcfg.validate()?;
    let problem = GrapeProblem::new(target, config, gcfg.dt)?;
    let mut u = initial_amplitudes(gcfg, problem.n_channels(), seed);
    let mut trace = Vec::new();
    let mut iterations = 0;
    let (mut fid, mut grad) = problem.gradient(&u, gcfg.gradient);
    trace.push(fid);
    let mut converged = fid >= gcfg.target_fidelity;
    let mut prev_grad: Option<Vec<f64>> = None;
    let mut search: Vec<f64> = Vec::new();
    while !converged && iterations < gcfg.max_iters {
        search = match (gcfg.direction, &prev_grad) {
            (SearchDirection::ConjugateGradient, Some(pg)) => {
                let num: f64 = grad.iter().zip(pg).map(|(g, p)| g * (g - p)).sum();
                let den: f64 = pg.iter().map(|p| p * p).sum();
                let beta = if den > 0.0 { (num / den).max(0.0) } else { 0.0 };
                let d: Vec<f64> = grad.iter().zip(&search).map(|(g, s)| g + beta * s).collect();
                if d.iter().zip(&grad).map(|(a, b)| a * b).sum::<f64>() > 0.0 {
                    d
                } else {
                    grad.clone()
                }
            }
            _ => grad.clone(),
        };
        let norm = search.iter().map(|g| g * g).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            break;
        }
        let dir: Vec<f64> = search.iter().map(|g| g / norm).collect();
        let mut step = gcfg.max_step_hz;
        let mut accepted = None;
        for _ in 0..gcfg.max_trials {
            let trial = u.axpy(step, &dir);
            let f = problem.fidelity(&trial);
            step *= gcfg.shrink;
            if f > fid {
                // Keep shrinking while the smaller step does better.
                let mut best = (trial, f);
                for _ in 0..gcfg.max_trials {
                    let t2 = u.axpy(step, &dir);
                    let f2 = problem.fidelity(&t2);
                    if f2 <= best.1 {
                        break;
                    }
                    best = (t2, f2);
                    step *= gcfg.shrink;
                }
                accepted = Some(best);
                break;
            }
        }
        let Some((next, f)) = accepted else { break };
        iterations += 1;
        let improvement = f - fid;
        u = next;
        let (f2, g2) = problem.gradient(&u, gcfg.gradient);
        fid = f2;
        prev_grad = Some(std::mem::replace(&mut grad, g2));
        trace.push(fid);
        converged = fid >= gcfg.target_fidelity;
        if improvement < 1e-12 {
            break;
        }
    }
    let final_unitary = problem.unitary(&u);
    let final_fidelity = gate_fidelity(&final_unitary, target)?;
    Ok(GrapeResult {
        amplitudes: u,
        fidelity_trace: trace,
        final_unitary,
        final_fidelity,
        iterations,
        converged,
        seed,
        dt: gcfg.dt,
    })
}
