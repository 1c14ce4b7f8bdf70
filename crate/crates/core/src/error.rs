// Copyright 2026 The nmrqc Authors
// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

/// Error type shared by every module of the emulator.
#[derive(Debug, Error)]
pub enum Error {
    /// A value violated a documented precondition or invariant.
    #[error("invalid {field}: {message}")]
    Invalid { field: String, message: String },

    /// Operand shapes do not agree.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    /// Two-qubit gate requested on a pair with no scalar coupling.
    #[error("uncoupled pair ({0}, {1}): J = 0, the gate cannot be built from free evolution")]
    UncoupledPair(usize, usize),

    /// Spectral lines too close to be separated by readout.
    #[error("unresolved spectrum on channel {channel}: {message}")]
    Unresolved { channel: String, message: String },

    /// Least-squares fit did not produce an acceptable model.
    #[error("fit failed: {0}")]
    Fit(String),

    /// A numerical routine failed (singular system, non-convergence).
    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("parse error in {source_name}: {message}")]
    Parse { source_name: String, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Invalid {
            field: field.into(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
