// Copyright 2026 The nmrqc Authors
// SPDX-License-Identifier: Apache-2.0

//! Peak amplitudes to Pauli coefficients for weakly coupled spins.
//!
//! Spin `k` has one line per state of its coupled partners. With `s_j = +1`
//! for partner `j` in `|0⟩` the line sits at `ν_k + Σ_j s_j J_kj / 2` and
//! carries `A_s = Tr(ρ (σ_x^k + iσ_y^k) Π_j (I + s_j σ_z^j))`, so
//! `c_{xZ_T} + i c_{yZ_T} = 2^{1-n} Σ_s (Π_{j∈T} s_j) A_s`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector};
use crate::pauli::{Pauli, PauliString};
use crate::spin::{CouplingModel, SpinSystemConfig};
use crate::state::DensityMatrix;

use super::{dft_at, synthesize_fid, tone_response};

const MIN_SAMPLES: usize = 256;
const MAX_SAMPLES: usize = 65536;
/// Lines closer than this many linewidths `1/(πT2)` are unresolved.
const RESOLUTION_LINEWIDTHS: f64 = 3.0;

/// One line of a weak-coupling multiplet.
#[derive(Clone, Debug, PartialEq)]
pub struct LineAmplitude {
    pub qubit: usize,
    /// State of every other qubit (`0`/`1`), indexed by qubit; the entry for `qubit` is unused.
    pub partner_bits: Vec<u8>,
    pub frequency_hz: f64,
    pub amplitude: Complex64,
}

/// Coefficients of every Pauli string with exactly one x/y factor, plus the line table.
#[derive(Clone, Debug, PartialEq)]
pub struct Readout {
    pub n: usize,
    pub coefficients: Vec<(PauliString, f64)>,
    pub lines: Vec<LineAmplitude>,
}

impl Readout {
    pub fn get(&self, p: &PauliString) -> Option<f64> {
        self.coefficients.iter().find(|(q, _)| q == p).map(|(_, v)| *v)
    }

    pub fn get_label(&self, label: &str) -> Result<Option<f64>> {
        let p: PauliString = label.parse()?;
        Ok(self.get(&p))
    }

    /// Lines of `qubit` in ascending frequency.
    pub fn lines_of(&self, qubit: usize) -> Vec<&LineAmplitude> {
        let mut v: Vec<&LineAmplitude> = self.lines.iter().filter(|l| l.qubit == qubit).collect();
        v.sort_by(|a, b| a.frequency_hz.total_cmp(&b.frequency_hz));
        v
    }
}

struct Line {
    qubit: usize,
    signs: Vec<f64>,
    freq: f64,
    t2: f64,
}

fn channel_lines(config: &SpinSystemConfig, qubits: &[usize]) -> Vec<Line> {
    let n = config.n_qubits();
    let mut out = Vec::new();
    for &k in qubits {
        let partners: Vec<usize> = (0..n).filter(|&j| j != k).collect();
        for mask in 0..1usize << partners.len() {
            let mut signs = vec![1.0; n];
            let mut freq = config.nuclei[k].offset_hz;
            for (b, &j) in partners.iter().enumerate() {
                // Partner bits are read most significant first.
                let bit = (mask >> (partners.len() - 1 - b)) & 1;
                signs[j] = if bit == 0 { 1.0 } else { -1.0 };
                freq += signs[j] * config.j(k, j) / 2.0;
            }
            out.push(Line {
                qubit: k,
                signs,
                freq,
                t2: config.nuclei[k].t2_s,
            });
        }
    }
    out
}

/// Read every one-x/y-factor Pauli coefficient of `rho` from synthesized spectra.
///
/// Lines are located at their known frequencies and separated with a model of
/// damped tones, so the inversion is exact on noiseless data. Errors with
/// [`Error::Unresolved`] when two lines of a channel sit within three linewidths.
pub fn readout_pauli_coefficients(rho: &DensityMatrix, config: &SpinSystemConfig) -> Result<Readout> {
    if config.coupling_model != CouplingModel::Weak {
        return Err(Error::invalid(
            "coupling_model",
            "peak assignment needs the weak-coupling model",
        ));
    }
    let n = config.n_qubits();
    if n > 3 {
        return Err(Error::invalid("n", format!("readout supports n <= 3, got {n}")));
    }
    if rho.dim() != config.dim() {
        return Err(Error::Dimension {
            expected: config.dim(),
            got: rho.dim(),
        });
    }
    let scale = (1usize << (n - 1)) as f64;
    let mut coefficients = Vec::new();
    let mut table = Vec::new();
    for ch in config.channels() {
        let lines = channel_lines(config, &ch.qubits);
        let unresolved = |message: String| Error::Unresolved {
            channel: ch.label.clone(),
            message,
        };
        let mut min_gap = f64::INFINITY;
        for (i, a) in lines.iter().enumerate() {
            for b in &lines[i + 1..] {
                let gap = (a.freq - b.freq).abs();
                let width = 1.0 / (PI * a.t2.min(b.t2));
                if gap < RESOLUTION_LINEWIDTHS * width {
                    return Err(unresolved(format!(
                        "lines at {} Hz and {} Hz are {gap} Hz apart, below {RESOLUTION_LINEWIDTHS} linewidths ({width} Hz)",
                        a.freq, b.freq
                    )));
                }
                min_gap = min_gap.min(gap);
            }
        }
        let t2_min = lines.iter().map(|l| l.t2).fold(f64::INFINITY, f64::min);
        let span = lines.iter().map(|l| l.freq.abs()).fold(0.0, f64::max) + 10.0 / (PI * t2_min) + 1.0;
        let mut df = if min_gap.is_finite() { min_gap / 16.0 } else { span / 16.0 };
        let needed = (4.0 * span / df).ceil() as usize;
        let n_samples = needed.next_power_of_two().clamp(MIN_SAMPLES, MAX_SAMPLES);
        if (n_samples as f64) * df < 4.0 * span {
            df = 4.0 * span / n_samples as f64;
        }
        let dt = 1.0 / (n_samples as f64 * df);
        let fid = synthesize_fid(rho, config, &ch.label, n_samples as f64 * dt, dt)?;
        let bins: Vec<f64> = lines.iter().map(|l| (l.freq / df).round() * df).collect();
        for (i, a) in bins.iter().enumerate() {
            if bins[i + 1..].iter().any(|b| (a - b).abs() < 0.5 * df) {
                return Err(unresolved(format!("two lines share the {a} Hz bin")));
            }
        }
        let m = lines.len();
        let design = CMatrix::from_fn(m, m, |i, j| {
            tone_response(lines[j].freq, lines[j].t2, bins[i], fid.len(), dt) / scale
        });
        let observed = CVector::from_iterator(m, bins.iter().map(|&b| dft_at(&fid, b)));
        let amps = linalg::solve_complex(&design, &observed)
            .map_err(|e| unresolved(format!("line model is singular: {e}")))?;
        for (l, a) in lines.iter().zip(amps.iter()) {
            table.push(LineAmplitude {
                qubit: l.qubit,
                partner_bits: l.signs.iter().map(|&s| u8::from(s < 0.0)).collect(),
                frequency_hz: l.freq,
                amplitude: *a,
            });
        }
        for &k in &ch.qubits {
            let partners: Vec<usize> = (0..n).filter(|&j| j != k).collect();
            for subset in 0..1usize << partners.len() {
                let in_t = |b: usize| (subset >> (partners.len() - 1 - b)) & 1 == 1;
                let mut acc = Complex64::new(0.0, 0.0);
                for (l, a) in lines.iter().zip(amps.iter()).filter(|(l, _)| l.qubit == k) {
                    let chi: f64 = partners
                        .iter()
                        .enumerate()
                        .filter(|&(b, _)| in_t(b))
                        .map(|(_, &j)| l.signs[j])
                        .product();
                    acc += a * chi;
                }
                acc /= scale;
                for (pauli, value) in [(Pauli::X, acc.re), (Pauli::Y, acc.im)] {
                    let mut factors = vec![Pauli::I; n];
                    factors[k] = pauli;
                    for (b, &j) in partners.iter().enumerate() {
                        if in_t(b) {
                            factors[j] = Pauli::Z;
                        }
                    }
                    coefficients.push((PauliString::new(factors), value));
                }
            }
        }
    }
    coefficients.sort_by_key(|(p, _)| p.index());
    Ok(Readout {
        n,
        coefficients,
        lines: table,
    })
}
