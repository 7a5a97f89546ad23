//! Simulation and verification of CHC quantum state privacy amplification.
//!
//! Two layers share one numeric core:
//!
//! * a circuit layer ([`protocol`], [`adversary`]) that works with exact
//!   two-qubit state vectors: the CNOT · (H ⊗ I) · CNOT operation, the
//!   measure-and-condense step, the BB84 truth tables, recursive rounds and
//!   adversary guessing statistics;
//! * a pulse layer ([`nmr`], [`tomography`]) that simulates a two-spin NMR
//!   system: pseudopure preparation by spatial averaging, pulse sequences,
//!   gate/pulse equivalence checks and linear-inversion state tomography.
//!
//! [`linalg`] holds the small dense complex linear algebra both layers use,
//! and [`cli`] is the front end behind the `qspa` binary.

pub mod adversary;
pub mod cli;
pub mod error;
pub mod linalg;
pub mod nmr;
pub mod protocol;
pub mod tomography;

pub use error::{Error, Result};
pub use linalg::{DensityMatrix, Outcome, StateVector, C64};

/// Numerical tolerances used throughout the crate.
pub mod tol {
    /// Unitarity and Hermiticity checks.
    pub const STRUCTURE: f64 = 1e-10;
    /// Exact-algebra assertions.
    pub const EXACT: f64 = 1e-12;
    /// Normalization of state vectors and traces.
    pub const NORM: f64 = 1e-10;
    /// Smallest eigenvalue accepted for a physical density matrix.
    pub const POSITIVITY: f64 = -1e-9;
    /// Branches with less probability than this cannot be forced.
    pub const ZERO_PROBABILITY: f64 = 1e-12;
    /// Matching a condensed state against the BB84 labels.
    pub const LABEL_MATCH: f64 = 1e-8;
    /// Residual below which two unitaries are declared equivalent.
    pub const EQUIVALENCE: f64 = 1e-8;
}
