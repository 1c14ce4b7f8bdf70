// Copyright 2026 The nmrqc Authors
// SPDX-License-Identifier: Apache-2.0

//! Pulse-level emulator of a few-qubit liquid-state NMR quantum computer.
//!
//! The crate is layered bottom-up:
//!
//! * [`linalg`], [`state`], [`pauli`]: dense linear algebra, kets, density
//!   matrices, product-operator expansions and fidelities.
//! * [`spin`]: the machine model (offsets, J couplings, relaxation times)
//!   and the internal, RF and thermal operators derived from it.
//! * [`dynamics`]: pulse programs and their execution on density matrices.
//! * [`control`]: gates, circuits, compilation to pulses and GRAPE.
//! * [`measurement`]: FID synthesis, spectra, peak readout and tomography.
//! * [`experiments`]: pseudo-pure preparation, Rabi and relaxation scans.
//! * [`algorithms`]: end-to-end algorithm runs with reports.
//! * [`report`]: JSON/CSV serialization shared with the command-line tool.

pub mod algorithms;
pub mod control;
pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod measurement;
pub mod pauli;
pub mod random;
pub mod report;
pub mod spin;
pub mod state;

pub use error::{Error, Result};
