// Copyright 2026 The nmrqc Authors
// SPDX-License-Identifier: Apache-2.0

//! End-to-end algorithm runs: Deutsch, Grover (N = 4), Bernstein–Vazirani,
//! approximate counting, Bell preparation, oscillator simulation, DQC1 and
//! CNOT truth tables.
//!
//! Every algorithm builds a [`Circuit`] and hands it to a [`Runner`], which
//! either applies the ideal unitary or compiles the circuit to pulses and
//! evolves the density matrix through them. Runs start from the pure
//! `|0…0⟩`, the limit a pseudo-pure preparation stands in for.
//!
//! "Measurement" is the exact diagonal of the final density matrix, the
//! ensemble average an NMR spectrometer reports. [`sample_shots`] draws
//! single-shot outcomes from it for illustration.

mod counting;
mod oracles;
mod qho;
mod states;

use std::collections::BTreeMap;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::control::{circuit_unitary, compile_circuit, Circuit, DEFAULT_PULSE_AMP_HZ};
use crate::dynamics::{evolve_program, EvolveOptions, PulseModel};
use crate::error::{Error, Result};
use crate::random;
use crate::spin::SpinSystemConfig;
use crate::state::{state_fidelity, DensityMatrix, Ket, QuantumState};

pub use counting::{counting_circuit, fit_rotation_angle, run_counting, CountingCase};
pub use oracles::{
    bv_circuit, deutsch_circuit, grover_circuit, grover_operator, grover_rotation, run_bernstein_vazirani,
    run_deutsch, run_grover4, DeutschCase,
};
pub use qho::{qho_circuit, qho_delay, qho_exact_unitary, simulate_qho, QhoInitial, QHO_LEVELS};
pub use states::{
    bell_circuit, cnot_truth_table, dqc1_circuit, dqc1_trace, prepare_bell, run_dqc1, BellRecipe, BellState,
    CnotDirection, TruthRow, TruthTable,
};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExecutionPath {
    /// Exact circuit unitary.
    #[default]
    Ideal,
    /// Compiled square pulses evolved on the machine model.
    Pulse,
}

impl ExecutionPath {
    pub fn name(self) -> &'static str {
        match self {
            ExecutionPath::Ideal => "ideal",
            ExecutionPath::Pulse => "pulse",
        }
    }
}

impl std::str::FromStr for ExecutionPath {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ideal" => Ok(ExecutionPath::Ideal),
            "pulse" => Ok(ExecutionPath::Pulse),
            other => Err(Error::invalid("path", format!("expected ideal or pulse, got {other:?}"))),
        }
    }
}

/// Machine plus execution settings shared by all algorithm runs.
#[derive(Clone, Debug)]
pub struct Runner {
    pub config: SpinSystemConfig,
    pub path: ExecutionPath,
    /// T1/T2 relaxation during pulses and delays; pulse path only.
    pub relaxation: bool,
    pub pulse_amp_hz: f64,
    pub pulse_model: PulseModel,
}

impl Runner {
    pub fn new(config: SpinSystemConfig, path: ExecutionPath) -> Self {
        Runner {
            config,
            path,
            relaxation: false,
            pulse_amp_hz: DEFAULT_PULSE_AMP_HZ,
            pulse_model: PulseModel::Hard,
        }
    }

    pub fn ideal(config: SpinSystemConfig) -> Self {
        Runner::new(config, ExecutionPath::Ideal)
    }

    pub fn pulse(config: SpinSystemConfig) -> Self {
        Runner::new(config, ExecutionPath::Pulse)
    }

    pub fn with_relaxation(mut self, on: bool) -> Self {
        self.relaxation = on;
        self
    }

    pub fn n_qubits(&self) -> usize {
        self.config.n_qubits()
    }

    fn check_n(&self, n: usize) -> Result<()> {
        if n != self.n_qubits() {
            return Err(Error::Dimension {
                expected: self.n_qubits(),
                got: n,
            });
        }
        Ok(())
    }

    /// Apply `circuit` to `rho` on this runner's path.
    pub fn run(&self, circuit: &Circuit, rho: &DensityMatrix) -> Result<DensityMatrix> {
        self.check_n(circuit.n)?;
        match self.path {
            ExecutionPath::Ideal => rho.evolve(&circuit_unitary(circuit, Some(&self.config))?),
            ExecutionPath::Pulse => {
                let program = compile_circuit(circuit, &self.config, self.pulse_amp_hz)?;
                let options = EvolveOptions {
                    relaxation: self.relaxation,
                    pulse_model: self.pulse_model,
                };
                evolve_program(rho, &program, &self.config, options)
            }
        }
    }

    /// Run `circuit` on `|0…0⟩`.
    pub fn run_from_ground(&self, circuit: &Circuit) -> Result<DensityMatrix> {
        self.run(circuit, &DensityMatrix::basis(circuit.n, 0))
    }
}

/// Outcome of one algorithm run.
#[derive(Clone, Debug)]
pub struct AlgorithmReport {
    pub algorithm: String,
    pub path: ExecutionPath,
    pub circuit: Circuit,
    pub final_state: DensityMatrix,
    /// Basis label (qubit 0 leftmost) to probability.
    pub probabilities: BTreeMap<String, f64>,
    pub derived: Map<String, Value>,
    /// Fidelity against the ideal output state, where one is defined.
    pub fidelity: Option<f64>,
}

impl AlgorithmReport {
    fn new(algorithm: &str, path: ExecutionPath, circuit: Circuit, final_state: DensityMatrix) -> Self {
        let probabilities = probabilities_of(&final_state);
        AlgorithmReport {
            algorithm: algorithm.to_string(),
            path,
            circuit,
            final_state,
            probabilities,
            derived: Map::new(),
            fidelity: None,
        }
    }

    fn with(mut self, key: &str, value: Value) -> Self {
        self.derived.insert(key.to_string(), value);
        self
    }

    /// Probability of basis state `label`; zero for unknown labels.
    pub fn probability(&self, label: &str) -> f64 {
        self.probabilities.get(label).copied().unwrap_or(0.0)
    }

    /// Most probable basis label and its probability (first label on ties).
    pub fn dominant(&self) -> (String, f64) {
        dominant(&self.probabilities)
    }

    /// `{"algorithm", "path", "probabilities", "derived", "fidelity"}`.
    pub fn to_json(&self) -> Value {
        json!({
            "algorithm": self.algorithm,
            "path": self.path.name(),
            "probabilities": self.probabilities,
            "derived": self.derived,
            "fidelity": self.fidelity,
        })
    }
}

/// `|b_0 b_1 …⟩` label of basis index `index`, qubit 0 leftmost.
pub fn basis_label(index: usize, n: usize) -> String {
    format!("{index:0n$b}")
}

fn parse_bits(bits: &str, field: &str) -> Result<usize> {
    if bits.is_empty() || !bits.chars().all(|c| c == '0' || c == '1') {
        return Err(Error::invalid(field, format!("expected a bit string, got {bits:?}")));
    }
    Ok(usize::from_str_radix(bits, 2).expect("checked bits"))
}

fn probabilities_of(rho: &DensityMatrix) -> BTreeMap<String, f64> {
    let n = rho.n_qubits();
    rho.probabilities()
        .into_iter()
        .enumerate()
        .map(|(i, p)| (basis_label(i, n), p.max(0.0)))
        .collect()
}

fn dominant(p: &BTreeMap<String, f64>) -> (String, f64) {
    p.iter()
        .fold((String::new(), f64::NEG_INFINITY), |best, (k, &v)| if v > best.1 { (k.clone(), v) } else { best })
}

fn ket_fidelity(ket: &Ket, rho: &DensityMatrix) -> Result<f64> {
    state_fidelity(&QuantumState::Pure(ket.clone()), &QuantumState::Mixed(rho.clone()))
}

/// Run an arbitrary circuit from `|0…0⟩`; the fidelity is against the ideal output.
pub fn run_circuit(circuit: &Circuit, runner: &Runner) -> Result<AlgorithmReport> {
    let rho = runner.run_from_ground(circuit)?;
    let ideal = Ket::basis(circuit.n, 0).apply(&circuit_unitary(circuit, Some(&runner.config))?)?;
    let fidelity = ket_fidelity(&ideal, &rho)?;
    let mut report = AlgorithmReport::new("circuit", runner.path, circuit.clone(), rho);
    report.fidelity = Some(fidelity);
    let (label, p) = report.dominant();
    Ok(report.with("dominant", json!(label)).with("dominant_probability", json!(p)))
}

/// Draw `shots` single-shot outcomes from `probabilities` with a seeded generator.
pub fn sample_shots(probabilities: &BTreeMap<String, f64>, shots: usize, seed: u64) -> Result<BTreeMap<String, usize>> {
    let labels: Vec<&String> = probabilities.keys().collect();
    let dist = WeightedIndex::new(probabilities.values().copied())
        .map_err(|e| Error::invalid("probabilities", e.to_string()))?;
    let mut rng = random::seeded(seed);
    let mut counts: BTreeMap<String, usize> = labels.iter().map(|l| ((*l).clone(), 0)).collect();
    for _ in 0..shots {
        *counts.get_mut(labels[dist.sample(&mut rng)]).expect("label exists") += 1;
    }
    Ok(counts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_put_qubit_zero_first() {
        assert_eq!(basis_label(2, 2), "10");
        assert_eq!(basis_label(1, 3), "001");
        assert_eq!(parse_bits("101", "a").unwrap(), 5);
        assert!(parse_bits("12", "a").is_err());
        assert!(parse_bits("", "a").is_err());
    }

    #[test]
    fn shots_follow_weights() {
        let p: BTreeMap<String, f64> = [("0".to_string(), 0.25), ("1".to_string(), 0.75)].into();
        let a = sample_shots(&p, 4000, 7).unwrap();
        assert_eq!(a, sample_shots(&p, 4000, 7).unwrap());
        assert_eq!(a.values().sum::<usize>(), 4000);
        assert!((a["1"] as f64 / 4000.0 - 0.75).abs() < 0.03);
        let zero: BTreeMap<String, f64> = [("0".to_string(), 0.0)].into();
        assert!(sample_shots(&zero, 1, 0).is_err());
    }
}
