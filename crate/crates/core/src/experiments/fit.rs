// Copyright 2026 The nmrqc Authors
// SPDX-License-Identifier: Apache-2.0

//! Two-parameter least-squares fits by Levenberg–Marquardt.

use std::f64::consts::PI;

use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitModel {
    /// `A e^{-x/τ}`
    ExpDecay,
    /// `B (1 - 2 e^{-x/τ})`
    InversionRecovery,
    /// `A |sin(π x / t180)|`
    AbsSine,
}

impl FitModel {
    pub fn name(self) -> &'static str {
        match self {
            FitModel::ExpDecay => "exp_decay",
            FitModel::InversionRecovery => "inversion_recovery",
            FitModel::AbsSine => "abs_sine",
        }
    }

    pub fn param_names(self) -> [&'static str; 2] {
        match self {
            FitModel::ExpDecay => ["A", "tau"],
            FitModel::InversionRecovery => ["B", "tau"],
            FitModel::AbsSine => ["A", "t180"],
        }
    }

    /// Model value at `x` for parameters `(amplitude, time)`.
    pub fn eval(self, p: [f64; 2], x: f64) -> f64 {
        let [a, t] = p;
        match self {
            FitModel::ExpDecay => a * (-x / t).exp(),
            FitModel::InversionRecovery => a * (1.0 - 2.0 * (-x / t).exp()),
            FitModel::AbsSine => a * (PI * x / t).sin().abs(),
        }
    }

    /// Value and gradient with respect to `(amplitude, ln time)`.
    fn eval_grad(self, a: f64, ln_t: f64, x: f64) -> (f64, [f64; 2]) {
        let t = ln_t.exp();
        match self {
            FitModel::ExpDecay => {
                let e = (-x / t).exp();
                (a * e, [e, a * e * x / t])
            }
            FitModel::InversionRecovery => {
                let e = (-x / t).exp();
                (a * (1.0 - 2.0 * e), [1.0 - 2.0 * e, -2.0 * a * e * x / t])
            }
            FitModel::AbsSine => {
                let arg = PI * x / t;
                let s = arg.sin();
                let sign = if s < 0.0 { -1.0 } else { 1.0 };
                (a * s.abs(), [s.abs(), -a * sign * arg.cos() * arg])
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub model: FitModel,
    /// `[amplitude, time constant]` in the order of [`FitModel::param_names`].
    pub params: [f64; 2],
    /// Root-mean-square residual.
    pub residual: f64,
    pub iterations: usize,
}

impl FitReport {
    pub fn eval(&self, x: f64) -> f64 {
        self.model.eval(self.params, x)
    }

    pub fn amplitude(&self) -> f64 {
        self.params[0]
    }

    pub fn time(&self) -> f64 {
        self.params[1]
    }
}

const MAX_ITERS: usize = 500;
const LAMBDA0: f64 = 1e-3;

fn rms(model: FitModel, a: f64, ln_t: f64, x: &[f64], y: &[f64]) -> f64 {
    let ss: f64 = x
        .iter()
        .zip(y)
        .map(|(&xi, &yi)| (model.eval([a, ln_t.exp()], xi) - yi).powi(2))
        .sum();
    (ss / x.len() as f64).sqrt()
}

/// Best amplitude for a fixed time constant (linear least squares).
fn best_amplitude(model: FitModel, t: f64, x: &[f64], y: &[f64]) -> f64 {
    let (num, den) = x.iter().zip(y).fold((0.0, 0.0), |(n, d), (&xi, &yi)| {
        let b = model.eval([1.0, t], xi);
        (n + b * yi, d + b * b)
    });
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

fn initial_guess(model: FitModel, x: &[f64], y: &[f64]) -> (f64, f64) {
    let (xmin, xmax) = x
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let range = xmax - xmin;
    let peak = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let at = |target: f64| {
        x.iter()
            .zip(y)
            .min_by(|a, b| (a.0 - target).abs().total_cmp(&(b.0 - target).abs()))
            .map(|(_, &v)| v)
            .unwrap_or(0.0)
    };
    match model {
        FitModel::ExpDecay => (peak.copysign(at(xmin)), 0.5 * range),
        FitModel::InversionRecovery => (peak.copysign(at(xmax)), 0.5 * range),
        FitModel::AbsSine => {
            // |sin| has many local minima in t180; scan a log grid first.
            let mut gaps: Vec<f64> = x.windows(2).map(|w| (w[1] - w[0]).abs()).filter(|g| *g > 0.0).collect();
            gaps.sort_by(f64::total_cmp);
            let lo = gaps.first().copied().unwrap_or(range).max(1e-300) * 2.0;
            let hi = 4.0 * xmax.abs().max(range);
            let steps = 2000;
            (0..=steps)
                .map(|i| lo * (hi / lo).powf(i as f64 / steps as f64))
                .map(|t| {
                    let a = best_amplitude(model, t, x, y);
                    (a, t, rms(model, a, t.ln(), x, y))
                })
                .min_by(|a, b| a.2.total_cmp(&b.2))
                .map(|(a, t, _)| (a, t))
                .expect("grid is nonempty")
        }
    }
}

/// Least-squares fit of `model` to `(x, y)`; deterministic for given data.
pub fn fit_model(x: &[f64], y: &[f64], model: FitModel) -> Result<FitReport> {
    if x.len() != y.len() {
        return Err(Error::invalid("y", format!("length {} != x length {}", y.len(), x.len())));
    }
    if x.len() < 3 {
        return Err(Error::invalid("x", format!("need >= 3 points to fit 2 parameters, got {}", x.len())));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::invalid("data", "non-finite value"));
    }
    let peak = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak == 0.0 {
        return Err(Error::Fit(format!("{}: all-zero data determine no time constant", model.name())));
    }
    let (a0, t0) = initial_guess(model, x, y);
    if !(t0 > 0.0 && t0.is_finite()) {
        return Err(Error::Fit(format!("{}: x values span no range", model.name())));
    }
    let mut p = Vector2::new(a0, t0.ln());
    let mut cost = rms(model, p[0], p[1], x, y);
    let mut lambda = LAMBDA0;
    let mut iterations = 0;
    while iterations < MAX_ITERS {
        iterations += 1;
        let mut jtj = Matrix2::zeros();
        let mut jtr = Vector2::zeros();
        for (&xi, &yi) in x.iter().zip(y) {
            let (f, g) = model.eval_grad(p[0], p[1], xi);
            let g = Vector2::new(g[0], g[1]);
            jtj += g * g.transpose();
            jtr += g * (yi - f);
        }
        let mut accepted = false;
        while lambda < 1e16 {
            let damped = jtj + Matrix2::from_diagonal(&jtj.diagonal()) * lambda;
            let Some(step) = damped.lu().solve(&jtr) else {
                lambda *= 10.0;
                continue;
            };
            let trial = p + step;
            let c = rms(model, trial[0], trial[1], x, y);
            if c.is_finite() && c <= cost {
                let small = step.norm() <= 1e-14 * (1.0 + p.norm());
                p = trial;
                cost = c;
                lambda = (lambda / 10.0).max(1e-12);
                accepted = true;
                if small {
                    return finish(model, p, cost, iterations);
                }
                break;
            }
            lambda *= 10.0;
        }
        if !accepted {
            // No downhill step at any damping: at a minimum to working precision.
            return finish(model, p, cost, iterations);
        }
    }
    finish(model, p, cost, iterations)
}

fn finish(model: FitModel, p: Vector2<f64>, residual: f64, iterations: usize) -> Result<FitReport> {
    let params = [p[0], p[1].exp()];
    if !params.iter().all(|v| v.is_finite()) || params[1] <= 0.0 {
        return Err(Error::Fit(format!("{}: diverged to {params:?}", model.name())));
    }
    Ok(FitReport {
        model,
        params,
        residual,
        iterations,
    })
}
