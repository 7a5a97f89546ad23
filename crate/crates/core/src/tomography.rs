//! Two-spin state tomography by linear inversion.
//!
//! Each readout experiment applies an optional π/2 pulse about x or y to
//! each spin and records the quadrature amplitudes of the four doublet
//! lines: for spin k with partner j, ⟨2I_x^k(½ ± I_z^j)⟩ and ⟨2I_y^k(½ ± I_z^j)⟩.
//! The nine experiments {none, x90, y90}² give 72 linear equations for the
//! 15 deviation coefficients in the product-operator basis.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{DensityMatrix, Matrix, C64};
use crate::nmr::{rotation_propagator, spin_operator, Axis, Component, ProductOperator, Spins};

pub const OBSERVABLES: usize = 8;
const UNKNOWNS: usize = 15;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ReadoutPulse {
    None,
    X90,
    Y90,
}

impl ReadoutPulse {
    pub const ALL: [ReadoutPulse; 3] = [Self::None, Self::X90, Self::Y90];

    fn token(self) -> &'static str {
        match self {
            Self::None => "none",
            Self::X90 => "x90",
            Self::Y90 => "y90",
        }
    }

    fn unitary(self, spins: Spins) -> Matrix {
        match self {
            Self::None => Matrix::identity(4, 4),
            Self::X90 => rotation_propagator(spins, Axis::X, FRAC_PI_2),
            Self::Y90 => rotation_propagator(spins, Axis::Y, FRAC_PI_2),
        }
    }
}

impl fmt::Display for ReadoutPulse {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ReadoutExperiment {
    pub pulse1: ReadoutPulse,
    pub pulse2: ReadoutPulse,
    pub id: String,
}

impl ReadoutExperiment {
    pub fn new(pulse1: ReadoutPulse, pulse2: ReadoutPulse) -> Self {
        Self { pulse1, pulse2, id: format!("{pulse1}_{pulse2}") }
    }

    pub fn unitary(&self) -> Matrix {
        self.pulse2.unitary(Spins::Two) * self.pulse1.unitary(Spins::One)
    }
}

impl FromStr for ReadoutExperiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        readout_set()
            .into_iter()
            .find(|e| e.id == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown readout experiment '{s}'")))
    }
}

/// (none, none), (none, x90), ..., (y90, y90).
pub fn readout_set() -> Vec<ReadoutExperiment> {
    ReadoutPulse::ALL
        .iter()
        .flat_map(|&p1| ReadoutPulse::ALL.iter().map(move |&p2| ReadoutExperiment::new(p1, p2)))
        .collect()
}

pub const OBSERVABLE_LABELS: [&str; OBSERVABLES] = [
    "2Ix1(1/2+Iz2)",
    "2Iy1(1/2+Iz2)",
    "2Ix1(1/2-Iz2)",
    "2Iy1(1/2-Iz2)",
    "2Ix2(1/2+Iz1)",
    "2Iy2(1/2+Iz1)",
    "2Ix2(1/2-Iz1)",
    "2Iy2(1/2-Iz1)",
];

fn observables() -> Vec<Matrix> {
    let half = Matrix::identity(4, 4) * C64::new(0.5, 0.0);
    let mut out = Vec::with_capacity(OBSERVABLES);
    for (k, j) in [(1, 2), (2, 1)] {
        let zj = spin_operator(j, Component::Z);
        for sign in [1.0, -1.0] {
            let line = &half + &zj * C64::new(sign, 0.0);
            for c in [Component::X, Component::Y] {
                out.push(spin_operator(k, c) * &line * C64::new(2.0, 0.0));
            }
        }
    }
    out
}

fn expectation(o: &Matrix, rho: &Matrix) -> f64 {
    // Tr(Oρ) for Hermitian O and ρ is real.
    o.transpose().component_mul(rho).sum().re
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ObservableRecord {
    pub experiment_id: String,
    pub values: [f64; OBSERVABLES],
}

pub fn simulate_readout(rho: &DensityMatrix, e: &ReadoutExperiment) -> Result<ObservableRecord> {
    if rho.dim() != 4 {
        return Err(Error::DimensionMismatch {
            expected: "4x4 density matrix".into(),
            found: format!("{0}x{0}", rho.dim()),
        });
    }
    let u = e.unitary();
    let rotated = &u * rho.matrix() * u.adjoint();
    let obs = observables();
    let values = std::array::from_fn(|k| expectation(&obs[k], &rotated));
    Ok(ObservableRecord { experiment_id: e.id.clone(), values })
}

/// Records for every experiment of [`readout_set`].
pub fn simulate_all(rho: &DensityMatrix) -> Result<Vec<ObservableRecord>> {
    readout_set().par_iter().map(|e| simulate_readout(rho, e)).collect()
}

/// Adds i.i.d. N(0, σ²) noise to every value, reproducibly for a seed.
pub fn add_noise(records: &[ObservableRecord], sigma: f64, seed: u64) -> Result<Vec<ObservableRecord>> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidArgument(format!("noise sigma must be finite and nonnegative, got {sigma}")));
    }
    let normal = Normal::new(0.0, sigma).map_err(|e| Error::InvalidArgument(format!("noise sigma {sigma}: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(records
        .iter()
        .map(|r| ObservableRecord {
            experiment_id: r.experiment_id.clone(),
            values: r.values.map(|v| v + normal.sample(&mut rng)),
        })
        .collect())
}

fn deviation_basis() -> Vec<ProductOperator> {
    ProductOperator::basis()[1..].to_vec()
}

/// Rows Tr(O·U·B·U†), one per (record, observable), columns over the 15
/// traceless basis operators.
fn design_matrix(experiments: &[ReadoutExperiment]) -> DMatrix<f64> {
    let obs = observables();
    let basis: Vec<Matrix> = deviation_basis().iter().map(|b| b.matrix()).collect();
    let mut a = DMatrix::zeros(experiments.len() * OBSERVABLES, UNKNOWNS);
    for (r, e) in experiments.iter().enumerate() {
        let u = e.unitary();
        for (c, b) in basis.iter().enumerate() {
            let rotated = &u * b * u.adjoint();
            for (k, o) in obs.iter().enumerate() {
                a[(r * OBSERVABLES + k, c)] = expectation(o, &rotated);
            }
        }
    }
    a
}

#[derive(Clone, Debug)]
pub struct ReconstructionResult {
    pub rho: DensityMatrix,
    /// Max-norm of the least-squares fit residual.
    pub residual: f64,
    pub condition_number: f64,
}

pub fn reconstruct(records: &[ObservableRecord]) -> Result<ReconstructionResult> {
    if records.is_empty() {
        return Err(Error::InvalidArgument("no readout records".into()));
    }
    let experiments =
        records.iter().map(|r| r.experiment_id.parse::<ReadoutExperiment>()).collect::<Result<Vec<_>>>()?;
    if records.iter().any(|r| r.values.iter().any(|v| !v.is_finite())) {
        return Err(Error::NonFinite("readout record"));
    }
    let a = design_matrix(&experiments);
    let b = DVector::from_iterator(a.nrows(), records.iter().flat_map(|r| r.values));

    let svd = a.clone().svd(true, true);
    let sv = &svd.singular_values;
    let max_sv = sv.max();
    let cutoff = 1e-10 * max_sv.max(1.0);
    let rank = sv.iter().filter(|&&s| s > cutoff).count();
    if rank < UNKNOWNS {
        return Err(Error::RankDeficient { rank, required: UNKNOWNS });
    }
    let condition_number = max_sv / sv.min();
    let c = svd.solve(&b, cutoff).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let residual = (&a * &c - &b).amax();

    let mut m = Matrix::identity(4, 4) * C64::new(0.25, 0.0);
    for (coef, op) in c.iter().zip(deviation_basis()) {
        m += op.matrix() * C64::new(*coef, 0.0);
    }
    let m = (&m + m.adjoint()) * C64::new(0.5, 0.0);
    let tr = m.trace();
    let m = m / tr;
    Ok(ReconstructionResult { rho: DensityMatrix::unit_trace(m)?, residual, condition_number })
}

/// Header `experiment_id,obs_1,...,obs_8`; values use the shortest
/// representation that parses back to the same f64.
pub fn write_records_csv(records: &[ObservableRecord]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["experiment_id".to_string()];
    header.extend((1..=OBSERVABLES).map(|k| format!("obs_{k}")));
    w.write_record(&header).map_err(csv_error)?;
    for r in records {
        let mut row = vec![r.experiment_id.clone()];
        row.extend(r.values.iter().map(|v| v.to_string()));
        w.write_record(&row).map_err(csv_error)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::InvalidArgument(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::InvalidArgument(e.to_string()))
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    Error::Parse { line, message: e.to_string() }
}

pub fn parse_records_csv(text: &str) -> Result<Vec<ObservableRecord>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let header = reader.headers().map_err(csv_error)?.clone();
    let want: Vec<String> =
        std::iter::once("experiment_id".to_string()).chain((1..=OBSERVABLES).map(|k| format!("obs_{k}"))).collect();
    if header.iter().ne(want.iter().map(String::as_str)) {
        return Err(Error::Parse { line: 1, message: format!("expected header '{}'", want.join(",")) });
    }
    let mut out = Vec::new();
    for row in reader.records() {
        let row = row.map_err(csv_error)?;
        let line = row.position().map_or(0, |p| p.line() as usize);
        let parse = |k: usize| -> Result<f64> {
            let field = &row[k];
            let v: f64 =
                field.parse().map_err(|_| Error::Parse { line, message: format!("invalid number '{field}'") })?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::Parse { line, message: format!("non-finite value '{field}'") })
            }
        };
        let mut values = [0.0; OBSERVABLES];
        for (k, v) in values.iter_mut().enumerate() {
            *v = parse(k + 1)?;
        }
        out.push(ObservableRecord { experiment_id: row[0].to_string(), values });
    }
    Ok(out)
}

pub const BASIS_LABELS: [&str; 4] = ["00", "01", "10", "11"];

/// Bar-chart data of a 4×4 matrix, row-major.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FigureData {
    pub basis_labels: Vec<String>,
    pub real: Vec<f64>,
    pub imag: Vec<f64>,
}

pub fn figure_data(rho: &DensityMatrix) -> Result<FigureData> {
    if rho.dim() != 4 {
        return Err(Error::DimensionMismatch {
            expected: "4x4 density matrix".into(),
            found: format!("{0}x{0}", rho.dim()),
        });
    }
    let entries: Vec<C64> = (0..4).flat_map(|i| (0..4).map(move |j| rho.entry(i, j))).collect();
    Ok(FigureData {
        basis_labels: BASIS_LABELS.iter().map(|s| s.to_string()).collect(),
        real: entries.iter().map(|z| z.re).collect(),
        imag: entries.iter().map(|z| z.im).collect(),
    })
}

impl FigureData {
    /// Element (row, col) as (re, im).
    pub fn at(&self, row: usize, col: usize) -> (f64, f64) {
        (self.real[4 * row + col], self.imag[4 * row + col])
    }

    /// One line per element: `row,col,real,imag`.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["row", "col", "real", "imag"]).map_err(csv_error)?;
        for i in 0..4 {
            for j in 0..4 {
                let (re, im) = self.at(i, j);
                w.write_record([
                    self.basis_labels[i].clone(),
                    self.basis_labels[j].clone(),
                    re.to_string(),
                    im.to_string(),
                ])
                .map_err(csv_error)?;
            }
        }
        let bytes = w.into_inner().map_err(|e| Error::InvalidArgument(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::InvalidArgument(e.to_string()))
    }
}
