// Copyright 2026 The nmrqc Authors
// SPDX-License-Identifier: Apache-2.0

//! Gate library, circuits and single-qubit Bloch decomposition.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};
use std::fmt;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, c, cr, CMatrix, ONE, ZERO};
use crate::spin::SpinSystemConfig;

#[derive(Clone, Debug, PartialEq)]
pub enum GateKind {
    I,
    X,
    Y,
    Z,
    H,
    /// Phase gate `diag(1, e^{iφ})`.
    P(f64),
    X90,
    Y90,
    Rx(f64),
    Ry(f64),
    Rz(f64),
    Cnot,
    Cz,
    /// Controlled `[[0, -1], [1, 0]]`.
    Cy,
    Swap,
    /// Free evolution under the machine's internal Hamiltonian for the given seconds.
    Delay(f64),
    Custom(CMatrix),
}

impl GateKind {
    pub fn name(&self) -> &'static str {
        match self {
            GateKind::I => "I",
            GateKind::X => "X",
            GateKind::Y => "Y",
            GateKind::Z => "Z",
            GateKind::H => "H",
            GateKind::P(_) => "P",
            GateKind::X90 => "X90",
            GateKind::Y90 => "Y90",
            GateKind::Rx(_) => "Rx",
            GateKind::Ry(_) => "Ry",
            GateKind::Rz(_) => "Rz",
            GateKind::Cnot => "CNOT",
            GateKind::Cz => "CZ",
            GateKind::Cy => "CY",
            GateKind::Swap => "SWAP",
            GateKind::Delay(_) => "Delay",
            GateKind::Custom(_) => "U",
        }
    }

    /// Number of target qubits; `Delay` acts on the whole register and takes none.
    pub fn arity(&self) -> usize {
        match self {
            GateKind::Cnot | GateKind::Cz | GateKind::Cy | GateKind::Swap => 2,
            GateKind::Delay(_) => 0,
            GateKind::Custom(m) => m.nrows().trailing_zeros() as usize,
            _ => 1,
        }
    }

    pub fn params(&self) -> Vec<f64> {
        match self {
            GateKind::P(a) | GateKind::Rx(a) | GateKind::Ry(a) | GateKind::Rz(a) | GateKind::Delay(a) => {
                vec![*a]
            }
            GateKind::Custom(m) => {
                let mut v = Vec::with_capacity(2 * m.len());
                for r in 0..m.nrows() {
                    for col in 0..m.ncols() {
                        v.push(m[(r, col)].re);
                        v.push(m[(r, col)].im);
                    }
                }
                v
            }
            _ => Vec::new(),
        }
    }

    pub fn from_name(name: &str, params: &[f64]) -> Result<Self> {
        let want = |k: usize| -> Result<()> {
            if params.len() != k {
                return Err(Error::invalid(
                    "params",
                    format!("gate {name} takes {k} parameter(s), got {}", params.len()),
                ));
            }
            Ok(())
        };
        let kind = match name.to_ascii_uppercase().as_str() {
            "I" | "ID" => GateKind::I,
            "X" => GateKind::X,
            "Y" => GateKind::Y,
            "Z" => GateKind::Z,
            "H" => GateKind::H,
            "X90" => GateKind::X90,
            "Y90" => GateKind::Y90,
            "CNOT" | "CX" => GateKind::Cnot,
            "CZ" => GateKind::Cz,
            "CY" => GateKind::Cy,
            "SWAP" => GateKind::Swap,
            "P" | "PHASE" => {
                want(1)?;
                GateKind::P(params[0])
            }
            "RX" => {
                want(1)?;
                GateKind::Rx(params[0])
            }
            "RY" => {
                want(1)?;
                GateKind::Ry(params[0])
            }
            "RZ" => {
                want(1)?;
                GateKind::Rz(params[0])
            }
            "DELAY" => {
                want(1)?;
                GateKind::Delay(params[0])
            }
            "U" | "CUSTOM" => {
                // Row-major (re, im) pairs.
                let len = params.len() / 2;
                let dim = (len as f64).sqrt().round() as usize;
                if params.len() % 2 != 0 || dim * dim != len || !dim.is_power_of_two() || dim < 2 {
                    return Err(Error::invalid(
                        "params",
                        "custom unitary needs 2·d² row-major (re, im) values with d a power of two",
                    ));
                }
                let m = CMatrix::from_fn(dim, dim, |r, col| {
                    let i = 2 * (r * dim + col);
                    c(params[i], params[i + 1])
                });
                GateKind::Custom(m)
            }
            other => return Err(Error::invalid("name", format!("unknown gate '{other}'"))),
        };
        if !matches!(kind, GateKind::Custom(_) | GateKind::P(_) | GateKind::Rx(_) | GateKind::Ry(_) | GateKind::Rz(_) | GateKind::Delay(_)) {
            want(0)?;
        }
        Ok(kind)
    }

    /// Matrix on the gate's own targets (`2^arity` square); `Delay` has none.
    pub fn local_matrix(&self) -> Option<CMatrix> {
        let h = FRAC_1_SQRT_2;
        let m = match self {
            GateKind::I => linalg::identity(2),
            GateKind::X => linalg::sigma_x(),
            GateKind::Y => linalg::sigma_y(),
            GateKind::Z => linalg::sigma_z(),
            GateKind::H => CMatrix::from_row_slice(2, 2, &[cr(h), cr(h), cr(h), cr(-h)]),
            GateKind::P(phi) => CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, Complex64::from_polar(1.0, *phi)]),
            GateKind::X90 => rx(FRAC_PI_2),
            GateKind::Y90 => ry(FRAC_PI_2),
            GateKind::Rx(t) => rx(*t),
            GateKind::Ry(t) => ry(*t),
            GateKind::Rz(t) => rz(*t),
            GateKind::Cnot => controlled(&linalg::sigma_x()),
            GateKind::Cz => controlled(&linalg::sigma_z()),
            GateKind::Cy => controlled(&CMatrix::from_row_slice(2, 2, &[ZERO, -ONE, ONE, ZERO])),
            GateKind::Swap => {
                let mut m = CMatrix::zeros(4, 4);
                m[(0, 0)] = ONE;
                m[(1, 2)] = ONE;
                m[(2, 1)] = ONE;
                m[(3, 3)] = ONE;
                m
            }
            GateKind::Delay(_) => return None,
            GateKind::Custom(m) => m.clone(),
        };
        Some(m)
    }
}

pub fn rx(theta: f64) -> CMatrix {
    let (s, co) = (theta / 2.0).sin_cos();
    CMatrix::from_row_slice(2, 2, &[cr(co), c(0.0, -s), c(0.0, -s), cr(co)])
}

pub fn ry(theta: f64) -> CMatrix {
    let (s, co) = (theta / 2.0).sin_cos();
    CMatrix::from_row_slice(2, 2, &[cr(co), cr(-s), cr(s), cr(co)])
}

pub fn rz(theta: f64) -> CMatrix {
    CMatrix::from_row_slice(
        2,
        2,
        &[Complex64::from_polar(1.0, -theta / 2.0), ZERO, ZERO, Complex64::from_polar(1.0, theta / 2.0)],
    )
}

/// `|0⟩⟨0| ⊗ I + |1⟩⟨1| ⊗ u` for a single-qubit `u`.
pub fn controlled(u: &CMatrix) -> CMatrix {
    let mut m = CMatrix::identity(4, 4);
    m.view_mut((2, 2), (2, 2)).copy_from(u);
    m
}

#[derive(Clone, Debug, PartialEq)]
pub struct Gate {
    pub kind: GateKind,
    /// Qubit indices, control first for two-qubit gates.
    pub targets: Vec<usize>,
}

impl Gate {
    pub fn new(kind: GateKind, targets: &[usize]) -> Self {
        Gate {
            kind,
            targets: targets.to_vec(),
        }
    }

    pub fn on(kind: GateKind, q: usize) -> Self {
        Gate::new(kind, &[q])
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        Gate::new(GateKind::Cnot, &[control, target])
    }

    pub fn is_two_qubit(&self) -> bool {
        self.targets.len() >= 2
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        let arity = self.kind.arity();
        let name = self.kind.name();
        if self.targets.len() != arity {
            return Err(Error::invalid(
                "targets",
                format!("gate {name} needs {arity} target(s), got {}", self.targets.len()),
            ));
        }
        for (i, &q) in self.targets.iter().enumerate() {
            if q >= n {
                return Err(Error::invalid("targets", format!("gate {name}: qubit {q} out of range for n = {n}")));
            }
            if self.targets[..i].contains(&q) {
                return Err(Error::invalid("targets", format!("gate {name}: repeated qubit {q}")));
            }
        }
        if self.kind.params().iter().any(|p| !p.is_finite()) {
            return Err(Error::invalid("params", format!("gate {name}: non-finite parameter")));
        }
        if let GateKind::Delay(t) = self.kind {
            if t < 0.0 {
                return Err(Error::invalid("params", "delay duration must be >= 0"));
            }
        }
        if let GateKind::Custom(m) = &self.kind {
            if !m.nrows().is_power_of_two() || m.nrows() < 2 || !m.is_square() {
                return Err(Error::invalid("params", "custom matrix must be square with power-of-two size"));
            }
            if !linalg::is_unitary(m, 1e-10) {
                return Err(Error::invalid("params", "custom matrix is not unitary"));
            }
        }
        Ok(())
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{:?}", self.kind.name(), self.targets)
    }
}

/// Wire form used in circuit JSON files.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GateJson {
    name: String,
    #[serde(default)]
    targets: Vec<usize>,
    #[serde(default)]
    params: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CircuitJson {
    n: usize,
    gates: Vec<GateJson>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    pub n: usize,
    pub gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(n: usize) -> Self {
        Circuit { n, gates: Vec::new() }
    }

    pub fn push(&mut self, g: Gate) -> &mut Self {
        self.gates.push(g);
        self
    }

    pub fn add(mut self, kind: GateKind, targets: &[usize]) -> Self {
        self.gates.push(Gate::new(kind, targets));
        self
    }

    pub fn extend(&mut self, other: &Circuit) {
        self.gates.extend(other.gates.iter().cloned());
    }

    pub fn two_qubit_gate_count(&self) -> usize {
        self.gates.iter().filter(|g| g.is_two_qubit()).count()
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.n > crate::state::MAX_QUBITS {
            return Err(Error::invalid("n", format!("qubit count {} out of range", self.n)));
        }
        for (i, g) in self.gates.iter().enumerate() {
            g.validate(self.n).map_err(|e| match e {
                Error::Invalid { field, message } => Error::Invalid {
                    field: format!("gates[{i}].{field}"),
                    message,
                },
                other => other,
            })?;
        }
        Ok(())
    }

    pub fn from_json_str(text: &str, source_name: &str) -> Result<Self> {
        let raw: CircuitJson = serde_json::from_str(text).map_err(|e| Error::Parse {
            source_name: source_name.to_string(),
            message: e.to_string(),
        })?;
        let mut gates = Vec::with_capacity(raw.gates.len());
        for (i, g) in raw.gates.into_iter().enumerate() {
            let kind = GateKind::from_name(&g.name, &g.params).map_err(|e| match e {
                Error::Invalid { field, message } => Error::Invalid {
                    field: format!("gates[{i}].{field}"),
                    message,
                },
                other => other,
            })?;
            gates.push(Gate { kind, targets: g.targets });
        }
        let c = Circuit { n: raw.n, gates };
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        Circuit::from_json_str(&text, &path.display().to_string())
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        let raw = CircuitJson {
            n: self.n,
            gates: self
                .gates
                .iter()
                .map(|g| GateJson {
                    name: g.kind.name().to_string(),
                    targets: g.targets.clone(),
                    params: g.kind.params(),
                })
                .collect(),
        };
        serde_json::to_value(raw).expect("circuit serializes")
    }
}

/// Full-register matrix of `g`. `Delay` needs a machine model; see [`gate_matrix_on`].
pub fn gate_matrix(g: &Gate, n: usize) -> Result<CMatrix> {
    g.validate(n)?;
    match g.kind.local_matrix() {
        Some(m) => Ok(linalg::embed(&m, &g.targets, n)),
        None => Err(Error::invalid(
            "gate",
            "Delay has no machine-independent matrix; supply a spin system",
        )),
    }
}

/// Like [`gate_matrix`], resolving `Delay(t)` as `exp(-i H0 t)` on `config`.
pub fn gate_matrix_on(g: &Gate, config: &SpinSystemConfig) -> Result<CMatrix> {
    match g.kind {
        GateKind::Delay(t) => {
            g.validate(config.n_qubits())?;
            linalg::expm_hermitian(&config.internal_hamiltonian(), t)
        }
        _ => gate_matrix(g, config.n_qubits()),
    }
}

/// Product of gate matrices in time order (later gates multiply on the left).
pub fn circuit_unitary(c: &Circuit, config: Option<&SpinSystemConfig>) -> Result<CMatrix> {
    c.validate()?;
    if let Some(cfg) = config {
        if cfg.n_qubits() != c.n {
            return Err(Error::Dimension {
                expected: cfg.n_qubits(),
                got: c.n,
            });
        }
    }
    let mut u = linalg::identity(1 << c.n);
    for g in &c.gates {
        let m = match config {
            Some(cfg) => gate_matrix_on(g, cfg)?,
            None => gate_matrix(g, c.n)?,
        };
        u = m * u;
    }
    Ok(u)
}

/// Angles with `u = e^{iα} Rx(β) Ry(γ) Rx(δ)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlochDecomposition {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
}

impl BlochDecomposition {
    pub fn matrix(&self) -> CMatrix {
        rx(self.beta) * ry(self.gamma) * rx(self.delta) * Complex64::from_polar(1.0, self.alpha)
    }
}

pub fn decompose_single_qubit(u: &CMatrix) -> Result<BlochDecomposition> {
    if u.nrows() != 2 || u.ncols() != 2 {
        return Err(Error::Dimension { expected: 2, got: u.nrows() });
    }
    if !linalg::is_unitary(u, 1e-10) {
        return Err(Error::invalid("unitary", "matrix is not unitary"));
    }
    // Rx(β)Ry(γ)Rx(δ) = Ry(π/2) Rz(β)Ry(γ)Rz(δ) Ry(-π/2); solve the z-y-z form.
    let v = ry(-FRAC_PI_2) * u * ry(FRAC_PI_2);
    let a = v[(0, 0)];
    let cc = v[(1, 0)];
    let det_phase = (v[(0, 0)] * v[(1, 1)] - v[(0, 1)] * v[(1, 0)]).arg() / 2.0;
    let unphase = Complex64::from_polar(1.0, -det_phase);
    let (a, cc) = (a * unphase, cc * unphase);
    let gamma = 2.0 * cc.norm().atan2(a.norm());
    let sum = if a.norm() > 1e-12 { -2.0 * a.arg() } else { 0.0 };
    let diff = if cc.norm() > 1e-12 { 2.0 * cc.arg() } else { 0.0 };
    let beta = (sum + diff) / 2.0;
    let delta = (sum - diff) / 2.0;
    let mut d = BlochDecomposition {
        alpha: 0.0,
        beta,
        gamma,
        delta,
    };
    // Global phase from the overlap with the phase-free reconstruction.
    let r = d.matrix();
    let overlap: Complex64 = r.iter().zip(u.iter()).map(|(x, y)| x.conj() * y).sum();
    d.alpha = overlap.arg();
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn cnot_orientations() {
        let c12 = gate_matrix(&Gate::cnot(0, 1), 2).unwrap();
        let c21 = gate_matrix(&Gate::cnot(1, 0), 2).unwrap();
        // |10⟩ -> |11⟩ for CNOT12, |01⟩ -> |11⟩ for CNOT21
        assert_eq!(c12[(3, 2)], ONE);
        assert_eq!(c21[(3, 1)], ONE);
        assert_eq!(c21[(2, 2)], ONE);
    }

    #[test]
    fn rx_two_pi_is_minus_identity() {
        let m = gate_matrix(&Gate::on(GateKind::Rx(2.0 * PI), 0), 1).unwrap();
        assert!(linalg::max_abs_diff(&m, &(-linalg::identity(2))) < 1e-15);
    }

    #[test]
    fn delay_needs_machine() {
        let g = Gate::new(GateKind::Delay(1e-3), &[]);
        assert!(gate_matrix(&g, 2).is_err());
        assert!(gate_matrix_on(&g, &SpinSystemConfig::gemini()).is_ok());
    }

    #[test]
    fn malformed_targets() {
        assert!(gate_matrix(&Gate::new(GateKind::Cnot, &[0]), 2).is_err());
        assert!(gate_matrix(&Gate::new(GateKind::Cnot, &[1, 1]), 2).is_err());
        assert!(gate_matrix(&Gate::on(GateKind::H, 2), 2).is_err());
    }

    #[test]
    fn decompose_rx_and_h() {
        let d = decompose_single_qubit(&rx(0.7)).unwrap();
        assert!(linalg::max_abs_diff(&d.matrix(), &rx(0.7)) < 1e-12);
        let h = GateKind::H.local_matrix().unwrap();
        let d = decompose_single_qubit(&h).unwrap();
        assert!(linalg::max_abs_diff(&d.matrix(), &h) < 1e-12);
        assert!(decompose_single_qubit(&(h * cr(1.1))).is_err());
    }

    #[test]
    fn circuit_json_roundtrip() {
        let text = r#"{"n": 2, "gates": [{"name": "H", "targets": [0]}, {"name": "CNOT", "targets": [0, 1]}, {"name": "Rz", "targets": [1], "params": [0.5]}]}"#;
        let c = Circuit::from_json_str(text, "c").unwrap();
        assert_eq!(c.gates.len(), 3);
        let back = Circuit::from_json_str(&c.to_json_value().to_string(), "c").unwrap();
        assert_eq!(back, c);
        let bad = r#"{"n": 2, "gates": [{"name": "CNOT", "targets": [0, 2]}]}"#;
        match Circuit::from_json_str(bad, "c") {
            Err(Error::Invalid { field, .. }) => assert_eq!(field, "gates[0].targets"),
            other => panic!("{other:?}"),
        }
    }
}
