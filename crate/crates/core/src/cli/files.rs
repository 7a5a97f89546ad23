//! Density-matrix JSON files.
//!
//! ```json
//! {
//!   "basis_labels": ["00", "01", "10", "11"],
//!   "real": [[...], [...], [...], [...]],
//!   "imag": [[...], [...], [...], [...]],
//!   "metadata": {"source_op": "...", "config_hash": "...", "tool_version": "..."}
//! }
//! ```
//!
//! Numbers are written with 17 significant digits so every f64 survives
//! a write/read cycle and a second write reproduces the same bytes.

use std::fmt::Write as _;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::linalg::{DensityMatrix, Matrix, C64};
use crate::tomography::BASIS_LABELS;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug, PartialEq, Eq, Deserialize)]
pub struct Metadata {
    pub source_op: String,
    pub config_hash: String,
    pub tool_version: String,
}

impl Metadata {
    pub fn new(source_op: impl Into<String>, config_hash: impl Into<String>) -> Self {
        Self { source_op: source_op.into(), config_hash: config_hash.into(), tool_version: TOOL_VERSION.into() }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensityMatrixFile {
    pub basis_labels: Vec<String>,
    pub real: Vec<Vec<f64>>,
    pub imag: Vec<Vec<f64>>,
    pub metadata: Metadata,
}

fn number(x: f64) -> String {
    format!("{x:.16e}")
}

fn json_string(s: &str) -> String {
    serde_json::to_string(s).expect("strings always serialize")
}

impl DensityMatrixFile {
    pub fn from_matrix(m: &Matrix, metadata: Metadata) -> Self {
        Self {
            basis_labels: BASIS_LABELS.iter().map(|s| s.to_string()).collect(),
            real: (0..4).map(|i| (0..4).map(|j| m[(i, j)].re).collect()).collect(),
            imag: (0..4).map(|i| (0..4).map(|j| m[(i, j)].im).collect()).collect(),
            metadata,
        }
    }

    pub fn from_density(rho: &DensityMatrix, metadata: Metadata) -> Self {
        Self::from_matrix(rho.matrix(), metadata)
    }

    pub fn to_json(&self) -> String {
        let labels: Vec<String> = self.basis_labels.iter().map(|s| json_string(s)).collect();
        let mut out = String::from("{\n");
        let _ = writeln!(out, "  \"basis_labels\": [{}],", labels.join(", "));
        for (name, rows) in [("real", &self.real), ("imag", &self.imag)] {
            let _ = writeln!(out, "  \"{name}\": [");
            for (i, row) in rows.iter().enumerate() {
                let cells: Vec<String> = row.iter().map(|&x| number(x)).collect();
                let sep = if i + 1 == rows.len() { "" } else { "," };
                let _ = writeln!(out, "    [{}]{sep}", cells.join(", "));
            }
            let _ = writeln!(out, "  ],");
        }
        let m = &self.metadata;
        let _ = writeln!(
            out,
            "  \"metadata\": {{\"source_op\": {}, \"config_hash\": {}, \"tool_version\": {}}}",
            json_string(&m.source_op),
            json_string(&m.config_hash),
            json_string(&m.tool_version)
        );
        out.push_str("}\n");
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let f: Self = serde_json::from_str(text)?;
        if f.basis_labels != BASIS_LABELS {
            return Err(Error::InvalidArgument(format!("basis labels must be {BASIS_LABELS:?}")));
        }
        for (name, rows) in [("real", &f.real), ("imag", &f.imag)] {
            if rows.len() != 4 || rows.iter().any(|r| r.len() != 4) {
                return Err(Error::DimensionMismatch {
                    expected: "4x4 array".into(),
                    found: format!("'{name}' array"),
                });
            }
        }
        Ok(f)
    }

    pub fn matrix(&self) -> Matrix {
        Matrix::from_fn(4, 4, |i, j| C64::new(self.real[i][j], self.imag[i][j]))
    }

    /// Validates the contents as a physical density matrix.
    pub fn density(&self) -> Result<DensityMatrix> {
        DensityMatrix::physical(self.matrix())
    }
}
