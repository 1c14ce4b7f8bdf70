// Copyright 2026 The nmrqc Authors
// SPDX-License-Identifier: Apache-2.0

//! Circuit to pulse-program compilation with square x/y pulses and J delays.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use crate::dynamics::{PulseEvent, PulseProgram};
use crate::error::{Error, Result};
use crate::spin::{Channel, CouplingModel, SpinSystemConfig};

use super::gates::{decompose_single_qubit, Circuit, Gate, GateKind};

/// Default RF amplitude for compiled square pulses (a 20 µs π/2 pulse).
pub const DEFAULT_PULSE_AMP_HZ: f64 = 12.5e3;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Axis {
    X,
    Y,
}

impl Axis {
    fn phase(self) -> f64 {
        match self {
            Axis::X => 0.0,
            Axis::Y => FRAC_PI_2,
        }
    }
}

struct Compiler<'a> {
    config: &'a SpinSystemConfig,
    channels: Vec<Channel>,
    amp_hz: f64,
    events: Vec<PulseEvent>,
}

impl<'a> Compiler<'a> {
    /// Square pulse rotating every spin of `channel` by `theta` about `axis`.
    fn channel_rotation(&mut self, channel: usize, axis: Axis, theta: f64) {
        if theta == 0.0 {
            return;
        }
        let nc = self.channels.len();
        let mut amp = vec![0.0; nc];
        let mut phase = vec![0.0; nc];
        amp[channel] = self.amp_hz;
        // Negative angles flip the axis.
        let p = if theta < 0.0 { axis.phase() + PI } else { axis.phase() };
        phase[channel] = p.rem_euclid(TAU);
        let dur = theta.abs() / (TAU * self.amp_hz);
        self.events.push(PulseEvent::rf(amp, phase, dur));
    }

    fn selective_channel(&self, q: usize) -> Result<usize> {
        let idx = self.config.channel_index_of_qubit(q);
        let ch = &self.channels[idx];
        if ch.qubits.len() > 1 {
            return Err(Error::invalid(
                "circuit",
                format!(
                    "qubit {q} shares RF channel '{}' with qubits {:?}; square pulses cannot address it selectively",
                    ch.label, ch.qubits
                ),
            ));
        }
        Ok(idx)
    }

    fn rot(&mut self, q: usize, axis: Axis, theta: f64) -> Result<()> {
        let ch = self.selective_channel(q)?;
        self.channel_rotation(ch, axis, theta);
        Ok(())
    }

    /// `Rz(θ)` as the time-ordered triple `Ry(π/2), Rx(θ), Ry(-π/2)`.
    fn rz(&mut self, q: usize, theta: f64) -> Result<()> {
        if theta == 0.0 {
            return Ok(());
        }
        self.rot(q, Axis::Y, FRAC_PI_2)?;
        self.rot(q, Axis::X, theta)?;
        self.rot(q, Axis::Y, -FRAC_PI_2)
    }

    fn single(&mut self, kind: &GateKind, q: usize) -> Result<()> {
        match kind {
            GateKind::I => Ok(()),
            GateKind::X => {
                self.rot(q, Axis::X, FRAC_PI_2)?;
                self.rot(q, Axis::X, FRAC_PI_2)
            }
            GateKind::Y => {
                self.rot(q, Axis::Y, FRAC_PI_2)?;
                self.rot(q, Axis::Y, FRAC_PI_2)
            }
            GateKind::Z => self.rz(q, PI),
            GateKind::H => {
                self.rot(q, Axis::Y, FRAC_PI_2)?;
                self.rot(q, Axis::X, PI)
            }
            GateKind::P(phi) => self.rz(q, *phi),
            GateKind::X90 => self.rot(q, Axis::X, FRAC_PI_2),
            GateKind::Y90 => self.rot(q, Axis::Y, FRAC_PI_2),
            GateKind::Rx(t) => self.rot(q, Axis::X, *t),
            GateKind::Ry(t) => self.rot(q, Axis::Y, *t),
            GateKind::Rz(t) => self.rz(q, *t),
            GateKind::Custom(m) => {
                let d = decompose_single_qubit(m)?;
                self.rot(q, Axis::X, d.delta)?;
                self.rot(q, Axis::Y, d.gamma)?;
                self.rot(q, Axis::X, d.beta)
            }
            other => unreachable!("{} is not a single-qubit gate", other.name()),
        }
    }

    /// Free evolution of `tau` keeping only the `c`–`t` coupling; spectators are echoed.
    fn coupling_delay(&mut self, c: usize, t: usize, tau: f64) -> Result<()> {
        let n = self.config.n_qubits();
        let spectators: Vec<usize> = (0..n)
            .filter(|&s| s != c && s != t)
            .filter(|&s| {
                self.config.j(s, c) != 0.0
                    || self.config.j(s, t) != 0.0
                    || self.config.nuclei[s].offset_hz != 0.0
            })
            .collect();
        if spectators.is_empty() {
            self.events.push(PulseEvent::delay(tau));
            return Ok(());
        }
        for (i, &a) in spectators.iter().enumerate() {
            for &b in &spectators[i + 1..] {
                if self.config.j(a, b) != 0.0 {
                    return Err(Error::invalid(
                        "circuit",
                        format!("spectator qubits {a} and {b} are coupled; their interaction cannot be refocused"),
                    ));
                }
            }
        }
        let mut spectator_channels: Vec<usize> = spectators
            .iter()
            .map(|&s| self.config.channel_index_of_qubit(s))
            .collect();
        spectator_channels.sort_unstable();
        spectator_channels.dedup();
        for &ch in &spectator_channels {
            if self.channels[ch].qubits.iter().any(|q| !spectators.contains(q)) {
                return Err(Error::invalid(
                    "circuit",
                    format!("channel '{}' mixes spectators with active qubits", self.channels[ch].label),
                ));
            }
        }
        self.events.push(PulseEvent::delay(tau / 2.0));
        for &ch in &spectator_channels {
            self.channel_rotation(ch, Axis::X, PI);
        }
        self.events.push(PulseEvent::delay(tau / 2.0));
        for &ch in &spectator_channels {
            self.channel_rotation(ch, Axis::X, -PI);
        }
        Ok(())
    }

    fn cnot(&mut self, c: usize, t: usize) -> Result<()> {
        let j = self.config.j(c, t);
        if j == 0.0 {
            return Err(Error::UncoupledPair(c, t));
        }
        self.selective_channel(c)?;
        self.selective_channel(t)?;
        let s = j.signum();
        let tau = 1.0 / (2.0 * j.abs());
        self.rot(t, Axis::Y, s * FRAC_PI_2)?;
        self.coupling_delay(c, t, tau)?;
        // Undo offset precession accumulated by the active pair during the delay.
        for q in [c, t] {
            let nu = self.config.nuclei[q].offset_hz;
            if nu != 0.0 {
                self.rz(q, -TAU * nu * tau)?;
            }
        }
        self.rot(t, Axis::Y, -s * FRAC_PI_2)?;
        self.rot(t, Axis::X, FRAC_PI_2)?;
        self.rot(c, Axis::X, -FRAC_PI_2)?;
        self.rot(c, Axis::Y, FRAC_PI_2)?;
        self.rot(c, Axis::X, FRAC_PI_2)
    }

    fn gate(&mut self, g: &Gate) -> Result<()> {
        let tq = &g.targets;
        match &g.kind {
            GateKind::Delay(t) => {
                self.events.push(PulseEvent::delay(*t));
                Ok(())
            }
            GateKind::Cnot => self.cnot(tq[0], tq[1]),
            GateKind::Cz => {
                self.single(&GateKind::H, tq[1])?;
                self.cnot(tq[0], tq[1])?;
                self.single(&GateKind::H, tq[1])
            }
            GateKind::Cy => {
                self.single(&GateKind::P(-FRAC_PI_2), tq[1])?;
                self.cnot(tq[0], tq[1])?;
                self.single(&GateKind::P(FRAC_PI_2), tq[1])?;
                self.single(&GateKind::P(-FRAC_PI_2), tq[0])
            }
            GateKind::Swap => {
                self.cnot(tq[0], tq[1])?;
                self.cnot(tq[1], tq[0])?;
                self.cnot(tq[0], tq[1])
            }
            GateKind::Custom(m) if m.nrows() > 2 => Err(Error::invalid(
                "circuit",
                "multi-qubit custom unitaries have no square-pulse recipe; optimize them with GRAPE",
            )),
            kind => self.single(kind, tq[0]),
        }
    }
}

/// Compile `circuit` into square x/y pulses of amplitude `pulse_amp_hz` and J-coupling delays.
///
/// The program reproduces the circuit unitary up to a global phase.
pub fn compile_circuit(
    circuit: &Circuit,
    config: &SpinSystemConfig,
    pulse_amp_hz: f64,
) -> Result<PulseProgram> {
    circuit.validate()?;
    if circuit.n != config.n_qubits() {
        return Err(Error::Dimension {
            expected: config.n_qubits(),
            got: circuit.n,
        });
    }
    if config.coupling_model != CouplingModel::Weak {
        return Err(Error::invalid(
            "coupling_model",
            "square-pulse compilation requires the weak-coupling model",
        ));
    }
    if !(pulse_amp_hz.is_finite() && pulse_amp_hz > 0.0) {
        return Err(Error::invalid("pulse_amp_hz", format!("must be > 0, got {pulse_amp_hz}")));
    }
    let mut comp = Compiler {
        config,
        channels: config.channels(),
        amp_hz: pulse_amp_hz,
        events: Vec::new(),
    };
    for g in &circuit.gates {
        comp.gate(g)?;
    }
    Ok(PulseProgram::new(comp.events))
}
