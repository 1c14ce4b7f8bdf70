// Copyright 2026 The nmrqc Authors
// SPDX-License-Identifier: Apache-2.0

//! Full state tomography from `3^n` readout settings `{I, Rx(π/2), Ry(π/2)}^{⊗n}`.

use std::f64::consts::FRAC_PI_2;

use rayon::prelude::*;

use crate::control::{circuit_unitary, compile_circuit, Circuit, GateKind, DEFAULT_PULSE_AMP_HZ};
use crate::dynamics::{evolve_program, EvolveOptions};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::pauli::{self, PauliCoefficients, PauliString};
use crate::spin::SpinSystemConfig;
use crate::state::DensityMatrix;

use super::readout::{readout_pauli_coefficients, Readout};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TomographyOptions {
    /// Apply readout rotations as compiled hard pulses instead of ideal unitaries.
    pub compiled_readout: bool,
    pub pulse_amp_hz: f64,
}

impl Default for TomographyOptions {
    fn default() -> Self {
        TomographyOptions {
            compiled_readout: false,
            pulse_amp_hz: DEFAULT_PULSE_AMP_HZ,
        }
    }
}

/// Readout rotation per qubit: `'I'`, `'X'` for `Rx(π/2)` or `'Y'` for `Ry(π/2)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReadoutSetting(pub String);

impl ReadoutSetting {
    /// All `3^n` settings, qubit 0 varying slowest.
    pub fn all(n: usize) -> Vec<ReadoutSetting> {
        (0..3usize.pow(n as u32))
            .map(|mut i| {
                let mut s = vec!['I'; n];
                for q in (0..n).rev() {
                    s[q] = ['I', 'X', 'Y'][i % 3];
                    i /= 3;
                }
                ReadoutSetting(s.into_iter().collect())
            })
            .collect()
    }

    fn circuit(&self) -> Circuit {
        let mut c = Circuit::new(self.0.len());
        for (q, ch) in self.0.chars().enumerate() {
            match ch {
                'X' => c = c.add(GateKind::Rx(FRAC_PI_2), &[q]),
                'Y' => c = c.add(GateKind::Ry(FRAC_PI_2), &[q]),
                _ => {}
            }
        }
        c
    }
}

#[derive(Clone, Debug)]
pub struct TomographyReport {
    pub state: DensityMatrix,
    pub coefficients: PauliCoefficients,
    pub settings: Vec<(ReadoutSetting, Readout)>,
}

/// Signed Pauli string equal to `m` (a conjugated Pauli string).
fn as_signed_pauli(m: &CMatrix, n: usize) -> (PauliString, f64) {
    let dim = (1usize << n) as f64;
    (0..1usize << (2 * n))
        .map(|i| {
            let p = PauliString::from_index(n, i);
            let v = p.trace_with(m).re / dim;
            (p, v)
        })
        .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        .expect("nonempty")
}

/// Reconstruct `rho` by tomography with ideal readout rotations.
pub fn tomography(rho: &DensityMatrix, config: &SpinSystemConfig) -> Result<DensityMatrix> {
    tomography_with(rho, config, TomographyOptions::default()).map(|r| r.state)
}

pub fn tomography_with(
    rho: &DensityMatrix,
    config: &SpinSystemConfig,
    options: TomographyOptions,
) -> Result<TomographyReport> {
    let n = config.n_qubits();
    if n > 3 {
        return Err(Error::invalid("n", format!("tomography supports n <= 3, got {n}")));
    }
    if rho.dim() != config.dim() {
        return Err(Error::Dimension {
            expected: config.dim(),
            got: rho.dim(),
        });
    }
    let settings = ReadoutSetting::all(n);
    let results: Vec<(ReadoutSetting, CMatrix, Readout)> = settings
        .into_par_iter()
        .map(|s| {
            let circuit = s.circuit();
            let r = circuit_unitary(&circuit, None)?;
            let rotated = if options.compiled_readout {
                let program = compile_circuit(&circuit, config, options.pulse_amp_hz)?;
                evolve_program(rho, &program, config, EvolveOptions::hard())?
            } else {
                rho.evolve(&r)?
            };
            let readout = readout_pauli_coefficients(&rotated, config)?;
            Ok((s, r, readout))
        })
        .collect::<Result<_>>()?;

    // Each reading is ±c_P for P = R† Q R; average all readings of each P.
    let size = 1usize << (2 * n);
    let mut sum = vec![0.0; size];
    let mut count = vec![0usize; size];
    for (_, r, readout) in &results {
        for (q, value) in &readout.coefficients {
            let m = r.adjoint() * q.matrix() * r;
            let (p, sign) = as_signed_pauli(&m, n);
            sum[p.index()] += sign.signum() * value;
            count[p.index()] += 1;
        }
    }
    let mut coefficients = PauliCoefficients::new(n);
    for i in 1..size {
        let p = PauliString::from_index(n, i);
        if count[i] == 0 {
            return Err(Error::Numerical(format!("no readout setting measures {p}")));
        }
        coefficients.set(&p, sum[i] / count[i] as f64);
    }
    let state = match pauli::pauli_reconstruct(&coefficients) {
        Ok(s) => s,
        Err(_) => {
            // Project onto the nearest state by clipping negative eigenvalues.
            let m = linalg::hermitian_map(&coefficients.to_matrix(), |x| linalg::cr(x.max(0.0)));
            let tr = linalg::trace(&m).re;
            DensityMatrix::new(m / linalg::cr(tr))?
        }
    };
    Ok(TomographyReport {
        state,
        coefficients,
        settings: results.into_iter().map(|(s, _, r)| (s, r)).collect(),
    })
}
