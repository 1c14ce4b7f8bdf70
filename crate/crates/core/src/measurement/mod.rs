// Copyright 2026 The nmrqc Authors
// SPDX-License-Identifier: Apache-2.0

//! NMR observation: FID synthesis, spectra, peak picking, Pauli readout and tomography.
//!
//! The receiver records `S(t) = Σ_k Tr(ρ(t) (σ_x^k + iσ_y^k)) e^{-t/T2_k}` over
//! the spins `k` of one channel, so a spin precessing at offset `ν` produces a
//! line at `+ν` whose real part is the x-phase and imaginary part the y-phase.

mod readout;
mod tomography;

use std::f64::consts::TAU;
use std::fmt::Write as _;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::pauli::{Pauli, PauliString};
use crate::report::fmt_float;
use crate::spin::SpinSystemConfig;
use crate::state::DensityMatrix;

pub use readout::{readout_pauli_coefficients, LineAmplitude, Readout};
pub use tomography::{tomography, tomography_with, ReadoutSetting, TomographyOptions, TomographyReport};

/// Sampled complex free induction decay of one RF channel.
#[derive(Clone, Debug, PartialEq)]
pub struct FidSignal {
    pub channel: String,
    pub samples: Vec<Complex64>,
    pub dt: f64,
}

impl FidSignal {
    pub fn new(channel: impl Into<String>, samples: Vec<Complex64>, dt: f64) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::invalid("fid", format!("needs >= 2 samples, got {}", samples.len())));
        }
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::invalid("dt", format!("must be > 0, got {dt}")));
        }
        Ok(FidSignal {
            channel: channel.into(),
            samples,
            dt,
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.samples.len()).map(move |m| m as f64 * self.dt)
    }

    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|s| s.norm_sqr()).sum()
    }

    /// CSV with header `t_s,re,im`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t_s,re,im\n");
        for (t, s) in self.times().zip(&self.samples) {
            let _ = writeln!(out, "{},{},{}", fmt_float(t), fmt_float(s.re), fmt_float(s.im));
        }
        out
    }
}

/// Unitary DFT of a FID on an ascending frequency grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    pub channel: String,
    pub frequencies: Vec<f64>,
    pub amplitudes: Vec<Complex64>,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies.is_empty()
    }

    pub fn bin_width(&self) -> f64 {
        self.frequencies[1] - self.frequencies[0]
    }

    pub fn energy(&self) -> f64 {
        self.amplitudes.iter().map(|s| s.norm_sqr()).sum()
    }

    /// CSV with header `freq_hz,re,im,magnitude`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("freq_hz,re,im,magnitude\n");
        for (f, a) in self.frequencies.iter().zip(&self.amplitudes) {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                fmt_float(*f),
                fmt_float(a.re),
                fmt_float(a.im),
                fmt_float(a.norm())
            );
        }
        out
    }
}

/// A spectral line. `amplitude` is the bin value divided by `√N`, so an
/// undamped unit tone sitting on a bin reads 1.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Peak {
    pub frequency_hz: f64,
    pub amplitude: Complex64,
}

/// Peaks below this fraction of the largest magnitude are ignored.
pub const PEAK_THRESHOLD: f64 = 0.05;
/// Absolute magnitude floor (per `√N`-normalized bin) for a peak.
const PEAK_FLOOR: f64 = 1e-9;

/// `σ_x + iσ_y` on qubit `k` of `n`.
pub(crate) fn raising_on(k: usize, n: usize) -> CMatrix {
    let x = PauliString::single(n, k, Pauli::X).matrix();
    let y = PauliString::single(n, k, Pauli::Y).matrix();
    x + y * linalg::I
}

/// Sample the FID of `channel` for `rho` under free evolution by `H0`.
pub fn synthesize_fid(
    rho: &DensityMatrix,
    config: &SpinSystemConfig,
    channel: &str,
    duration: f64,
    dt: f64,
) -> Result<FidSignal> {
    let ch = config.channel(channel)?;
    if rho.dim() != config.dim() {
        return Err(Error::Dimension {
            expected: config.dim(),
            got: rho.dim(),
        });
    }
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::invalid("dt", format!("must be > 0, got {dt}")));
    }
    if !(duration.is_finite() && duration >= 0.0) {
        return Err(Error::invalid("duration", format!("must be >= 0, got {duration}")));
    }
    let m = (duration / dt + 1e-9).floor() as usize;
    if m < 2 {
        return Err(Error::invalid(
            "duration",
            format!("{duration} s at dt = {dt} s gives fewer than 2 samples"),
        ));
    }
    let n = config.n_qubits();
    let (energies, v) = linalg::hermitian_eigen(&config.internal_hamiltonian());
    let rho_e = v.adjoint() * rho.matrix() * &v;
    // Each spin contributes Σ_ab ρ_ab O_ba e^{-i(E_a - E_b)t}; gather the nonzero terms.
    let mut terms: Vec<(f64, Complex64, f64)> = Vec::new();
    for &k in &ch.qubits {
        let o = v.adjoint() * raising_on(k, n) * &v;
        let t2 = config.nuclei[k].t2_s;
        for a in 0..rho_e.nrows() {
            for b in 0..rho_e.ncols() {
                let w = rho_e[(a, b)] * o[(b, a)];
                if w.norm() > 1e-15 {
                    terms.push((energies[a] - energies[b], w, t2));
                }
            }
        }
    }
    let samples = (0..m)
        .map(|i| {
            let t = i as f64 * dt;
            terms
                .iter()
                .map(|&(w, amp, t2)| amp * Complex64::from_polar((-t / t2).exp(), -w * t))
                .sum()
        })
        .collect();
    FidSignal::new(ch.label, samples, dt)
}

/// Unitary DFT (`1/√N`), reordered so frequencies ascend from `-1/(2dt)`.
pub fn spectrum(fid: &FidSignal) -> Spectrum {
    let n = fid.len();
    let mut buf = fid.samples.clone();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let scale = 1.0 / (n as f64).sqrt();
    let df = 1.0 / (n as f64 * fid.dt);
    let half = n / 2;
    let mut frequencies = Vec::with_capacity(n);
    let mut amplitudes = Vec::with_capacity(n);
    for i in 0..n {
        let k = i as i64 - half as i64;
        frequencies.push(k as f64 * df);
        amplitudes.push(buf[k.rem_euclid(n as i64) as usize] * scale);
    }
    Spectrum {
        channel: fid.channel.clone(),
        frequencies,
        amplitudes,
    }
}

/// DFT of `fid` then local maxima of `|X|` above [`PEAK_THRESHOLD`] of the largest.
pub fn spectrum_peaks(fid: &FidSignal) -> Vec<Peak> {
    let spec = spectrum(fid);
    let root_n = (spec.len() as f64).sqrt();
    let mags: Vec<f64> = spec.amplitudes.iter().map(|a| a.norm() / root_n).collect();
    let max = mags.iter().cloned().fold(0.0, f64::max);
    if max < PEAK_FLOOR {
        return Vec::new();
    }
    let cut = (PEAK_THRESHOLD * max).max(PEAK_FLOOR);
    let last = mags.len() - 1;
    (0..mags.len())
        .filter(|&i| {
            mags[i] >= cut
                && (i == 0 || mags[i] > mags[i - 1])
                && (i == last || mags[i] >= mags[i + 1])
        })
        .map(|i| Peak {
            frequency_hz: spec.frequencies[i],
            amplitude: spec.amplitudes[i] / root_n,
        })
        .collect()
}

/// Unnormalized DFT of a damped unit tone `e^{i2πft - t/T2}` at frequency `bin_hz`.
pub(crate) fn tone_response(f: f64, t2: f64, bin_hz: f64, n: usize, dt: f64) -> Complex64 {
    // Geometric series Σ r^m with r = e^{(i2π(f - bin) - 1/T2) dt}.
    let r = Complex64::new(-dt / t2, TAU * (f - bin_hz) * dt).exp();
    if (r - linalg::ONE).norm() < 1e-12 {
        return Complex64::new(n as f64, 0.0);
    }
    (linalg::ONE - r.powu(n as u32)) / (linalg::ONE - r)
}

/// Unnormalized DFT of the sampled `fid` at an arbitrary frequency.
pub(crate) fn dft_at(fid: &FidSignal, f: f64) -> Complex64 {
    let step = Complex64::from_polar(1.0, -TAU * f * fid.dt);
    let mut w = linalg::ONE;
    let mut acc = Complex64::new(0.0, 0.0);
    for s in &fid.samples {
        acc += s * w;
        w *= step;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spectrum_grid_is_ascending_and_centered() {
        for n in [8usize, 9] {
            let fid = FidSignal::new("x", vec![linalg::ONE; n], 0.01).unwrap();
            let s = spectrum(&fid);
            assert!(s.frequencies.windows(2).all(|w| (w[1] - w[0] - 100.0 / n as f64).abs() < 1e-9));
            let zero = s.frequencies.iter().position(|f| f.abs() < 1e-12).unwrap();
            assert!((s.amplitudes[zero].re - (n as f64).sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn tone_response_matches_direct_sum() {
        let (n, dt, f, t2) = (64, 1e-3, 37.3, 0.05);
        let samples = (0..n)
            .map(|m| Complex64::from_polar((-(m as f64) * dt / t2).exp(), TAU * f * m as f64 * dt))
            .collect();
        let fid = FidSignal::new("x", samples, dt).unwrap();
        for bin in [0.0, 31.25, 46.875] {
            let d = dft_at(&fid, bin) - tone_response(f, t2, bin, n, dt);
            assert!(d.norm() < 1e-10);
        }
    }
}
