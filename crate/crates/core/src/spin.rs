// Copyright 2026 The nmrqc Authors
// SPDX-License-Identifier: Apache-2.0

//! Machine model: nuclei, offsets, scalar couplings, relaxation times, and
//! the rotating-frame Hamiltonians and thermal state built from them.
//!
//! Frequencies in configs are in Hz; every Hamiltonian matrix is in rad/s
//! with ħ = 1 and `I_a = σ_a / 2`.

use std::f64::consts::TAU;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::pauli::{Pauli, PauliString};
use crate::state::{DensityMatrix, EIGEN_FLOOR, MAX_QUBITS};

const GEMINI_JSON: &str = include_str!("../presets/gemini.json");
const TRIANGULUM_JSON: &str = include_str!("../presets/triangulum.json");

pub const PRESET_NAMES: [&str; 2] = ["gemini", "triangulum"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CouplingModel {
    /// Secular `J I_z I_z` coupling only.
    Weak,
    /// Full `J I·I` coupling.
    Isotropic,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NucleusSpec {
    pub label: String,
    pub offset_hz: f64,
    pub t1_s: f64,
    pub t2_s: f64,
    pub polarization: f64,
}

impl NucleusSpec {
    pub fn new(label: &str, offset_hz: f64, t1_s: f64, t2_s: f64, polarization: f64) -> Self {
        NucleusSpec {
            label: label.to_string(),
            offset_hz,
            t1_s,
            t2_s,
            polarization,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpinSystemConfig {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    pub coupling_model: CouplingModel,
    pub nuclei: Vec<NucleusSpec>,
    pub j_hz: Vec<Vec<f64>>,
}

/// Nuclei driven by one RF field (same label).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Channel {
    pub label: String,
    pub qubits: Vec<usize>,
}

/// Per-channel `2π Σ I_x` and `2π Σ I_y`, the generators multiplied by `u_x`, `u_y` in Hz.
#[derive(Clone, Debug)]
pub struct ControlOperators {
    pub x: Vec<CMatrix>,
    pub y: Vec<CMatrix>,
}

impl SpinSystemConfig {
    /// Build and validate.
    pub fn new(
        name: &str,
        coupling_model: CouplingModel,
        nuclei: Vec<NucleusSpec>,
        j_hz: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let cfg = SpinSystemConfig {
            name: name.to_string(),
            note: None,
            coupling_model,
            nuclei,
            j_hz,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// One nucleus, no couplings.
    pub fn single(label: &str, offset_hz: f64, t1_s: f64, t2_s: f64, polarization: f64) -> Result<Self> {
        SpinSystemConfig::new(
            label,
            CouplingModel::Weak,
            vec![NucleusSpec::new(label, offset_hz, t1_s, t2_s, polarization)],
            vec![vec![0.0]],
        )
    }

    pub fn preset(name: &str) -> Result<Self> {
        let text = match name {
            "gemini" => GEMINI_JSON,
            "triangulum" => TRIANGULUM_JSON,
            other => {
                return Err(Error::invalid(
                    "machine",
                    format!("unknown preset '{other}' (known: {})", PRESET_NAMES.join(", ")),
                ))
            }
        };
        SpinSystemConfig::from_json_str(text, name)
    }

    pub fn gemini() -> Self {
        SpinSystemConfig::preset("gemini").expect("embedded preset is valid")
    }

    pub fn triangulum() -> Self {
        SpinSystemConfig::preset("triangulum").expect("embedded preset is valid")
    }

    pub fn from_json_str(text: &str, source_name: &str) -> Result<Self> {
        let cfg: SpinSystemConfig = serde_json::from_str(text).map_err(|e| Error::Parse {
            source_name: source_name.to_string(),
            message: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Load and validate a machine config file.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        SpinSystemConfig::from_json_str(&text, &path.display().to_string())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.nuclei.len();
        if n == 0 || n > MAX_QUBITS {
            return Err(Error::invalid(
                "nuclei",
                format!("need 1..={MAX_QUBITS} nuclei, got {n}"),
            ));
        }
        for (k, nuc) in self.nuclei.iter().enumerate() {
            let field = |f: &str| format!("nuclei[{k}].{f}");
            if nuc.label.is_empty() {
                return Err(Error::invalid(field("label"), "empty label"));
            }
            if !nuc.offset_hz.is_finite() {
                return Err(Error::invalid(field("offset_hz"), "not finite"));
            }
            if !(nuc.t1_s.is_finite() && nuc.t1_s > 0.0) {
                return Err(Error::invalid(field("t1_s"), format!("must be > 0, got {}", nuc.t1_s)));
            }
            if !(nuc.t2_s.is_finite() && nuc.t2_s > 0.0) {
                return Err(Error::invalid(field("t2_s"), format!("must be > 0, got {}", nuc.t2_s)));
            }
            if !(nuc.polarization.abs() <= 1.0) {
                return Err(Error::invalid(
                    field("polarization"),
                    format!("|polarization| must be <= 1, got {}", nuc.polarization),
                ));
            }
        }
        if self.j_hz.len() != n || self.j_hz.iter().any(|row| row.len() != n) {
            return Err(Error::invalid("j_hz", format!("must be a {n}x{n} matrix")));
        }
        for j in 0..n {
            if self.j_hz[j][j] != 0.0 {
                return Err(Error::invalid(
                    "j_hz",
                    format!("diagonal entry [{j}][{j}] must be 0, got {}", self.j_hz[j][j]),
                ));
            }
            for k in 0..n {
                let v = self.j_hz[j][k];
                if !v.is_finite() {
                    return Err(Error::invalid("j_hz", format!("entry [{j}][{k}] not finite")));
                }
                if (v - self.j_hz[k][j]).abs() > 1e-12 {
                    return Err(Error::invalid(
                        "j_hz",
                        format!("not symmetric: [{j}][{k}] = {v}, [{k}][{j}] = {}", self.j_hz[k][j]),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn n_qubits(&self) -> usize {
        self.nuclei.len()
    }

    pub fn dim(&self) -> usize {
        1 << self.nuclei.len()
    }

    pub fn j(&self, a: usize, b: usize) -> f64 {
        self.j_hz[a][b]
    }

    /// RF channels in order of first appearance of each label.
    pub fn channels(&self) -> Vec<Channel> {
        let mut out: Vec<Channel> = Vec::new();
        for (k, nuc) in self.nuclei.iter().enumerate() {
            match out.iter_mut().find(|c| c.label == nuc.label) {
                Some(c) => c.qubits.push(k),
                None => out.push(Channel {
                    label: nuc.label.clone(),
                    qubits: vec![k],
                }),
            }
        }
        out
    }

    pub fn channel_index_of_qubit(&self, qubit: usize) -> usize {
        self.channels()
            .iter()
            .position(|c| c.qubits.contains(&qubit))
            .expect("every qubit belongs to a channel")
    }

    pub fn channel(&self, label: &str) -> Result<Channel> {
        self.channels()
            .into_iter()
            .find(|c| c.label == label)
            .ok_or_else(|| Error::invalid("channel", format!("no nucleus labelled '{label}'")))
    }

    /// Rotating-frame internal Hamiltonian `H0` in rad/s.
    pub fn internal_hamiltonian(&self) -> CMatrix {
        let n = self.n_qubits();
        let dim = self.dim();
        // Diagonal part: offsets and zz couplings, read off the basis bits.
        let mut h = CMatrix::zeros(dim, dim);
        for idx in 0..dim {
            let z = |q: usize| if (idx >> (n - 1 - q)) & 1 == 0 { 0.5 } else { -0.5 };
            let mut e = 0.0;
            for q in 0..n {
                e += TAU * self.nuclei[q].offset_hz * z(q);
                for p in q + 1..n {
                    e += TAU * self.j_hz[q][p] * z(q) * z(p);
                }
            }
            h[(idx, idx)] = linalg::cr(e);
        }
        if self.coupling_model == CouplingModel::Isotropic {
            for q in 0..n {
                for p in q + 1..n {
                    let jqp = self.j_hz[q][p];
                    if jqp == 0.0 {
                        continue;
                    }
                    for a in [Pauli::X, Pauli::Y] {
                        let mut f = vec![Pauli::I; n];
                        f[q] = a;
                        f[p] = a;
                        h += PauliString::new(f).matrix() * linalg::cr(TAU * jqp / 4.0);
                    }
                }
            }
        }
        h
    }

    pub fn control_operators(&self) -> ControlOperators {
        let n = self.n_qubits();
        let build = |qubits: &[usize], p: Pauli| {
            let mut m = CMatrix::zeros(self.dim(), self.dim());
            for &q in qubits {
                m += PauliString::single(n, q, p).matrix();
            }
            // 2π · Σ σ/2
            m * linalg::cr(TAU / 2.0)
        };
        let channels = self.channels();
        ControlOperators {
            x: channels.iter().map(|c| build(&c.qubits, Pauli::X)).collect(),
            y: channels.iter().map(|c| build(&c.qubits, Pauli::Y)).collect(),
        }
    }

    /// `H_rf = Σ_c 2π u_c (cos φ_c Σ I_x + sin φ_c Σ I_y)` in rad/s.
    pub fn rf_hamiltonian(&self, amplitudes_hz: &[f64], phases_rad: &[f64]) -> Result<CMatrix> {
        self.control_operators().rf(amplitudes_hz, phases_rad)
    }

    /// Thermal equilibrium `(I + Σ ε_k σ_z^k) / 2^n`.
    pub fn thermal_state(&self) -> Result<DensityMatrix> {
        let n = self.n_qubits();
        let dim = self.dim();
        let mut diag = Vec::with_capacity(dim);
        for idx in 0..dim {
            let mut v = 1.0;
            for (q, nuc) in self.nuclei.iter().enumerate() {
                let s = if (idx >> (n - 1 - q)) & 1 == 0 { 1.0 } else { -1.0 };
                v += s * nuc.polarization;
            }
            let p = v / dim as f64;
            if p < EIGEN_FLOOR {
                return Err(Error::invalid(
                    "polarization",
                    format!("thermal state has negative population {p} at basis index {idx}"),
                ));
            }
            diag.push(linalg::cr(p.max(0.0)));
        }
        let m = CMatrix::from_diagonal(&linalg::CVector::from_vec(diag));
        Ok(DensityMatrix::from_matrix_unchecked(m))
    }

    /// Copy with every polarization set to `eps`.
    pub fn with_polarization(&self, eps: f64) -> Self {
        let mut c = self.clone();
        for nuc in &mut c.nuclei {
            nuc.polarization = eps;
        }
        c
    }
}

impl ControlOperators {
    pub fn n_channels(&self) -> usize {
        self.x.len()
    }

    pub fn rf(&self, amplitudes_hz: &[f64], phases_rad: &[f64]) -> Result<CMatrix> {
        let nc = self.n_channels();
        if amplitudes_hz.len() != nc || phases_rad.len() != nc {
            return Err(Error::invalid(
                "rf channels",
                format!(
                    "expected {nc} amplitude/phase pairs, got {}/{}",
                    amplitudes_hz.len(),
                    phases_rad.len()
                ),
            ));
        }
        let dim = self.x[0].nrows();
        let mut h = CMatrix::zeros(dim, dim);
        for c in 0..nc {
            let u = amplitudes_hz[c];
            if u == 0.0 {
                continue;
            }
            let (s, co) = phases_rad[c].sin_cos();
            h += &self.x[c] * linalg::cr(u * co) + &self.y[c] * linalg::cr(u * s);
        }
        Ok(h)
    }

    /// `Σ_c (u_x,c · 2πΣI_x + u_y,c · 2πΣI_y)` from Cartesian amplitudes.
    pub fn rf_cartesian(&self, ux: &[f64], uy: &[f64]) -> CMatrix {
        let dim = self.x[0].nrows();
        let mut h = CMatrix::zeros(dim, dim);
        for c in 0..self.n_channels() {
            h += &self.x[c] * linalg::cr(ux[c]) + &self.y[c] * linalg::cr(uy[c]);
        }
        h
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_load() {
        let g = SpinSystemConfig::gemini();
        assert_eq!(g.n_qubits(), 2);
        assert_eq!(g.j(0, 1), 697.4);
        assert_eq!(g.channels().len(), 2);
        let t = SpinSystemConfig::triangulum();
        assert_eq!(t.n_qubits(), 3);
        assert_eq!(t.coupling_model, CouplingModel::Isotropic);
        assert_eq!(t.channels().len(), 1);
        assert_eq!(t.channels()[0].qubits, vec![0, 1, 2]);
    }

    #[test]
    fn asymmetric_j_names_field() {
        let mut g = SpinSystemConfig::gemini();
        g.j_hz[0][1] = 10.0;
        match g.validate() {
            Err(Error::Invalid { field, .. }) => assert_eq!(field, "j_hz"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn nonpositive_t1_rejected() {
        let mut g = SpinSystemConfig::gemini();
        g.nuclei[1].t1_s = 0.0;
        match g.validate() {
            Err(Error::Invalid { field, .. }) => assert_eq!(field, "nuclei[1].t1_s"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn parse_error_reports_location() {
        let err = SpinSystemConfig::from_json_str("{\"name\": 3}", "m.json").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("m.json") && msg.contains("line 1"), "{msg}");
    }

    #[test]
    fn gemini_h0_diagonal_pattern() {
        let h = SpinSystemConfig::gemini().internal_hamiltonian();
        let e = TAU * 697.4 / 4.0;
        let expected = [e, -e, -e, e];
        for (i, &v) in expected.iter().enumerate() {
            assert!((h[(i, i)].re - v).abs() < 1e-9);
        }
        assert!(h.iter().enumerate().all(|(k, z)| k % 5 == 0 || *z == linalg::ZERO));
    }

    #[test]
    fn isotropic_pair_spectrum() {
        let j = 50.0;
        let cfg = SpinSystemConfig::new(
            "pair",
            CouplingModel::Isotropic,
            vec![NucleusSpec::new("A", 0.0, 1.0, 1.0, 0.0), NucleusSpec::new("A", 0.0, 1.0, 1.0, 0.0)],
            vec![vec![0.0, j], vec![j, 0.0]],
        )
        .unwrap();
        let (vals, _) = linalg::hermitian_eigen(&cfg.internal_hamiltonian());
        let pi = std::f64::consts::PI;
        assert!((vals[0] + 1.5 * pi * j).abs() < 1e-9);
        for v in &vals[1..] {
            assert!((v - 0.5 * pi * j).abs() < 1e-9);
        }
    }

    #[test]
    fn rf_single_qubit() {
        let cfg = SpinSystemConfig::single("1H", 0.0, 1.0, 1.0, 1.0).unwrap();
        let h = cfg.rf_hamiltonian(&[100.0], &[0.0]).unwrap();
        let expected = linalg::sigma_x() * linalg::cr(std::f64::consts::PI * 100.0);
        assert!(linalg::max_abs_diff(&h, &expected) < 1e-12);
        assert!(cfg.rf_hamiltonian(&[1.0, 2.0], &[0.0, 0.0]).is_err());
    }

    #[test]
    fn thermal_examples() {
        let one = SpinSystemConfig::single("1H", 0.0, 1.0, 1.0, 1.0).unwrap();
        let rho = one.thermal_state().unwrap();
        assert!((rho.matrix()[(0, 0)].re - 1.0).abs() < 1e-15);
        let too_big = SpinSystemConfig::gemini().with_polarization(1.0);
        assert!(too_big.thermal_state().is_err());
        let zero = SpinSystemConfig::gemini().with_polarization(0.0);
        let rho = zero.thermal_state().unwrap();
        assert!(linalg::max_abs_diff(rho.matrix(), DensityMatrix::maximally_mixed(2).matrix()) < 1e-15);
    }
}
