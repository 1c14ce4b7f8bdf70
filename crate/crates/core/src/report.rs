// Copyright 2026 The nmrqc Authors
// SPDX-License-Identifier: Apache-2.0

//! Serialization of results: JSON with stable key order and 12 significant digits, CSV tables.
//!
//! Objects are `serde_json` maps, which keep keys sorted, so equal results
//! always print to identical bytes.

use std::io::Write as _;
use std::path::Path;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::linalg::{c, CMatrix};
use crate::state::DensityMatrix;

/// Round to 12 significant digits.
pub fn round_sig(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { 0.0 } else { x };
    }
    format!("{x:.11e}").parse().expect("formatted float parses")
}

/// Shortest decimal text of `x` rounded to 12 significant digits.
pub fn fmt_float(x: f64) -> String {
    format!("{}", round_sig(x))
}

/// Round every float in `v` to 12 significant digits; integers are left alone.
pub fn round_json(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => n.as_f64().map(|x| json!(round_sig(x))).unwrap_or(Value::Null),
        Value::Array(a) => Value::Array(a.into_iter().map(round_json).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, round_json(v))).collect()),
        other => other,
    }
}

/// Pretty JSON text of `v` after rounding, with a trailing newline.
pub fn to_json_string(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(&round_json(v.clone())).expect("values serialize");
    s.push('\n');
    s
}

/// `{"n": int, "re": [[...]], "im": [[...]]}`, row-major.
pub fn density_to_json(rho: &DensityMatrix) -> Value {
    let m = rho.matrix();
    let rows = |f: fn(&num_complex::Complex64) -> f64| -> Vec<Vec<f64>> {
        (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| f(&m[(i, j)])).collect()).collect()
    };
    json!({ "n": rho.n_qubits(), "re": rows(|z| z.re), "im": rows(|z| z.im) })
}

#[derive(serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct DensityJson {
    n: usize,
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

/// Parse and validate a density matrix in the [`density_to_json`] layout.
pub fn density_from_json(text: &str, source_name: &str) -> Result<DensityMatrix> {
    let raw: DensityJson = serde_json::from_str(text).map_err(|e| Error::Parse {
        source_name: source_name.to_string(),
        message: e.to_string(),
    })?;
    if raw.n == 0 || raw.n > crate::state::MAX_QUBITS {
        return Err(Error::invalid("n", format!("qubit count {} out of range", raw.n)));
    }
    let d = 1usize << raw.n;
    let square = |rows: &[Vec<f64>]| rows.len() == d && rows.iter().all(|r| r.len() == d);
    if !square(&raw.re) || !square(&raw.im) {
        return Err(Error::invalid("re/im", format!("need {d} rows of {d} entries for n = {}", raw.n)));
    }
    DensityMatrix::new(CMatrix::from_fn(d, d, |i, j| c(raw.re[i][j], raw.im[i][j])))
}

/// Write `contents` to `path` through a temporary file in the same directory and a rename,
/// so readers never see a partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let io_err = |source| Error::Io {
        path: path.display().to_string(),
        source,
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err)?;
    tmp.write_all(contents).map_err(io_err)?;
    tmp.as_file().sync_all().map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}

pub fn write_json(path: &Path, v: &Value) -> Result<()> {
    write_atomic(path, to_json_string(v).as_bytes())
}
