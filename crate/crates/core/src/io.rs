//! JSON matrix files.
//!
//! ```json
//! {"rows": 2, "cols": 2,
//!  "alpha": [[[0.5, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.5, 0.0]]],
//!  "beta":  [[[0.0, 0.0], [-0.5, 0.0]], [[0.5, 0.0], [0.0, 0.0]]]}
//! ```
//!
//! Entries are `[re, im]` pairs, rows outermost. A missing `"beta"` means
//! zero, and the writer omits `"beta"` when it is identically zero. Floats are
//! written in shortest round-trip form, so parse/serialize is lossless.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::linalg::CMatrix;
use crate::qmatrix::QMatrix;
use crate::{Error, Result};

type Rows = Vec<Vec<[f64; 2]>>;

/// Serializable form of a quaternionic matrix, fields in canonical order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixFile {
    pub rows: usize,
    pub cols: usize,
    pub alpha: Rows,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub beta: Option<Rows>,
}

fn to_rows(m: &CMatrix) -> Rows {
    (0..m.nrows())
        .map(|r| (0..m.ncols()).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect())
        .collect()
}

impl From<&QMatrix> for MatrixFile {
    fn from(m: &QMatrix) -> Self {
        let beta_zero = m.beta().iter().all(|z| z.re == 0.0 && z.im == 0.0);
        Self {
            rows: m.rows(),
            cols: m.cols(),
            alpha: to_rows(m.alpha()),
            beta: (!beta_zero).then(|| to_rows(m.beta())),
        }
    }
}

impl From<&CMatrix> for MatrixFile {
    fn from(m: &CMatrix) -> Self {
        Self {
            rows: m.nrows(),
            cols: m.ncols(),
            alpha: to_rows(m),
            beta: None,
        }
    }
}

fn schema(pointer: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Schema {
        pointer: pointer.into(),
        message: message.into(),
    }
}

pub fn parse_matrix(text: &str) -> Result<QMatrix> {
    let value: Value = serde_json::from_str(text).map_err(|e| schema("", format!("invalid JSON: {e}")))?;
    parse_matrix_value(&value)
}

pub fn parse_matrix_value(value: &Value) -> Result<QMatrix> {
    let obj = value
        .as_object()
        .ok_or_else(|| schema("", "expected an object"))?;
    let dim = |key: &str| -> Result<usize> {
        let ptr = format!("/{key}");
        let v = obj.get(key).ok_or_else(|| schema(&ptr, "missing field"))?;
        v.as_u64()
            .map(|x| x as usize)
            .ok_or_else(|| schema(&ptr, "expected a non-negative integer"))
    };
    let rows = dim("rows")?;
    let cols = dim("cols")?;
    let alpha = match obj.get("alpha") {
        Some(v) => parse_block(v, "/alpha", rows, cols)?,
        None => return Err(schema("/alpha", "missing field")),
    };
    let beta = match obj.get("beta") {
        Some(Value::Null) | None => CMatrix::zeros(rows, cols),
        Some(v) => parse_block(v, "/beta", rows, cols)?,
    };
    QMatrix::new(alpha, beta)
}

fn parse_block(value: &Value, ptr: &str, rows: usize, cols: usize) -> Result<CMatrix> {
    let outer = value
        .as_array()
        .ok_or_else(|| schema(ptr, "expected an array of rows"))?;
    if outer.len() != rows {
        return Err(schema(ptr, format!("expected {rows} rows, found {}", outer.len())));
    }
    let mut m = CMatrix::zeros(rows, cols);
    for (r, row) in outer.iter().enumerate() {
        let row_ptr = format!("{ptr}/{r}");
        let row = row
            .as_array()
            .ok_or_else(|| schema(&row_ptr, "expected an array of entries"))?;
        if row.len() != cols {
            return Err(schema(&row_ptr, format!("expected {cols} entries, found {}", row.len())));
        }
        for (c, entry) in row.iter().enumerate() {
            let entry_ptr = format!("{row_ptr}/{c}");
            let pair = entry
                .as_array()
                .filter(|p| p.len() == 2)
                .ok_or_else(|| schema(&entry_ptr, "expected [re, im]"))?;
            let mut parts = [0.0; 2];
            for (k, x) in pair.iter().enumerate() {
                let v = x
                    .as_f64()
                    .ok_or_else(|| schema(format!("{entry_ptr}/{k}"), "expected a number"))?;
                if !v.is_finite() {
                    return Err(schema(format!("{entry_ptr}/{k}"), "non-finite entry"));
                }
                parts[k] = v;
            }
            m[(r, c)] = Complex64::new(parts[0], parts[1]);
        }
    }
    Ok(m)
}

/// Canonical single-line JSON for a quaternionic matrix.
pub fn serialize_matrix(m: &QMatrix) -> String {
    serde_json::to_string(&MatrixFile::from(m)).expect("matrix serialization is infallible")
}

pub fn serialize_complex(m: &CMatrix) -> String {
    serde_json::to_string(&MatrixFile::from(m)).expect("matrix serialization is infallible")
}
