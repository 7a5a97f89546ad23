//! Dense complex linear algebra for one- and two-qubit systems.
//!
//! Basis order is |0⟩,|1⟩ for one qubit and |00⟩,|01⟩,|10⟩,|11⟩ for two,
//! with qubit 1 the most significant bit.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tol;

pub use num_complex::Complex64 as C64;

/// Square complex matrix of dimension 2 or 4.
pub type Matrix = DMatrix<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// A σ_z measurement outcome.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Outcome {
    Zero,
    One,
}

impl Outcome {
    pub const BOTH: [Outcome; 2] = [Outcome::Zero, Outcome::One];

    pub fn bit(self) -> u8 {
        match self {
            Self::Zero => 0,
            Self::One => 1,
        }
    }

    pub fn index(self) -> usize {
        self.bit() as usize
    }

    pub fn from_bit(bit: u8) -> Result<Self> {
        match bit {
            0 => Ok(Self::Zero),
            1 => Ok(Self::One),
            other => Err(Error::InvalidArgument(format!("outcome must be 0 or 1, got {other}"))),
        }
    }
}

impl std::fmt::Display for Outcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.bit())
    }
}

fn check_dim(dim: usize, what: &str) -> Result<()> {
    if dim == 2 || dim == 4 {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            expected: "dimension 2 or 4".into(),
            found: format!("{what} of dimension {dim}"),
        })
    }
}

fn all_finite<'a>(values: impl IntoIterator<Item = &'a C64>) -> bool {
    values.into_iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Largest entry modulus.
pub fn max_abs(m: &Matrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Largest entry modulus of `a - b`. Panics if shapes differ.
pub fn max_abs_diff(a: &Matrix, b: &Matrix) -> f64 {
    assert_eq!(a.shape(), b.shape(), "shape mismatch");
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Max-norm of U†U − I.
pub fn unitarity_deviation(u: &Matrix) -> f64 {
    let n = u.nrows();
    max_abs_diff(&(u.adjoint() * u), &Matrix::identity(n, n))
}

/// Max-norm of A − A†.
pub fn hermiticity_deviation(a: &Matrix) -> f64 {
    max_abs_diff(a, &a.adjoint())
}

/// Normalized one- or two-qubit state vector (or an unnormalized branch,
/// where the docs say so).
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amps: DVector<C64>,
}

impl StateVector {
    /// Wraps raw amplitudes. Does not require normalization; see
    /// [`StateVector::ensure_normalized`].
    pub fn new(amps: Vec<C64>) -> Result<Self> {
        check_dim(amps.len(), "state vector")?;
        if !all_finite(&amps) {
            return Err(Error::NonFinite("state vector"));
        }
        Ok(Self { amps: DVector::from_vec(amps) })
    }

    pub fn from_real(amps: &[f64]) -> Result<Self> {
        Self::new(amps.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    /// Computational basis state `index` of a `dim`-dimensional space.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        check_dim(dim, "state vector")?;
        if index >= dim {
            return Err(Error::InvalidArgument(format!("basis index {index} out of range for dim {dim}")));
        }
        let mut amps = vec![ZERO; dim];
        amps[index] = ONE;
        Self::new(amps)
    }

    pub(crate) fn from_dvector(amps: DVector<C64>) -> Self {
        Self { amps }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        self.amps.as_slice()
    }

    pub fn amp(&self, i: usize) -> C64 {
        self.amps[i]
    }

    pub fn as_dvector(&self) -> &DVector<C64> {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn ensure_normalized(&self) -> Result<()> {
        let deviation = (self.norm_sqr() - 1.0).abs();
        if deviation > tol::NORM {
            Err(Error::NotNormalized { deviation })
        } else {
            Ok(())
        }
    }

    /// Returns the state scaled to unit norm.
    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm_sqr().sqrt();
        if n < tol::ZERO_PROBABILITY {
            return Err(Error::InvalidArgument("cannot normalize a zero vector".into()));
        }
        Ok(Self { amps: &self.amps / C64::new(n, 0.0) })
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &Self) -> C64 {
        self.amps.dotc(&other.amps)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        self.amps.iter().zip(other.amps.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// Max amplitude deviation after removing the best global phase
    /// (the phase of ⟨other|self⟩).
    pub fn phase_aligned_diff(&self, other: &Self) -> f64 {
        let overlap = other.inner(self);
        let phase = if overlap.norm() > 0.0 { overlap / overlap.norm() } else { ONE };
        let aligned = Self { amps: &self.amps / phase };
        aligned.max_abs_diff(other)
    }

    /// |ψ⟩⟨ψ| as a physical density matrix.
    pub fn to_density(&self) -> Result<DensityMatrix> {
        self.ensure_normalized()?;
        let m = &self.amps * self.amps.adjoint();
        Ok(DensityMatrix { m, deviation: false })
    }
}

/// Hermitian matrix of dimension 2 or 4.
///
/// Physical matrices have unit trace and are positive semidefinite.
/// Deviation matrices (the traceless part NMR works with) only have to be
/// Hermitian.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    m: Matrix,
    deviation: bool,
}

impl DensityMatrix {
    fn check_shape(m: &Matrix) -> Result<()> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch {
                expected: "square matrix".into(),
                found: format!("{}x{}", m.nrows(), m.ncols()),
            });
        }
        check_dim(m.nrows(), "density matrix")?;
        if !all_finite(m.iter()) {
            return Err(Error::NonFinite("density matrix"));
        }
        let h = hermiticity_deviation(m);
        if h > tol::STRUCTURE {
            return Err(Error::NotPhysical(format!("not Hermitian (deviation {h:e})")));
        }
        Ok(())
    }

    /// Validates Hermiticity, unit trace and positivity.
    pub fn physical(m: Matrix) -> Result<Self> {
        Self::check_shape(&m)?;
        let rho = Self { m, deviation: false };
        let tr = rho.trace();
        if (tr.re - 1.0).abs() > tol::NORM || tr.im.abs() > tol::NORM {
            return Err(Error::NotPhysical(format!("trace is {tr}")));
        }
        let min = rho.min_eigenvalue();
        if min < tol::POSITIVITY {
            return Err(Error::NotPhysical(format!("negative eigenvalue {min:e}")));
        }
        Ok(rho)
    }

    /// Hermitian, unit trace, positivity not checked. Used for
    /// reconstructions from noisy data.
    pub fn unit_trace(m: Matrix) -> Result<Self> {
        Self::check_shape(&m)?;
        let rho = Self { m, deviation: false };
        let tr = rho.trace();
        if (tr.re - 1.0).abs() > tol::NORM || tr.im.abs() > tol::NORM {
            return Err(Error::NotPhysical(format!("trace is {tr}")));
        }
        Ok(rho)
    }

    /// Validates Hermiticity only and marks the matrix as a deviation.
    pub fn deviation(m: Matrix) -> Result<Self> {
        Self::check_shape(&m)?;
        Ok(Self { m, deviation: true })
    }

    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        check_dim(dim, "density matrix")?;
        let m = Matrix::identity(dim, dim) / C64::new(dim as f64, 0.0);
        Ok(Self { m, deviation: false })
    }

    pub(crate) fn from_parts(m: Matrix, deviation: bool) -> Self {
        Self { m, deviation }
    }

    pub fn matrix(&self) -> &Matrix {
        &self.m
    }

    pub fn into_matrix(self) -> Matrix {
        self.m
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn is_deviation(&self) -> bool {
        self.deviation
    }

    pub fn entry(&self, i: usize, j: usize) -> C64 {
        self.m[(i, j)]
    }

    pub fn trace(&self) -> C64 {
        self.m.trace()
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self.m.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    pub fn purity(&self) -> f64 {
        (&self.m * &self.m).trace().re
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        max_abs_diff(&self.m, &other.m)
    }
}

/// Kronecker product of two 2×2 matrices, qubit 1 = `a`.
pub fn kron(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    for (name, m) in [("left", a), ("right", b)] {
        if m.shape() != (2, 2) {
            return Err(Error::DimensionMismatch {
                expected: "2x2 operand".into(),
                found: format!("{name} operand {}x{}", m.nrows(), m.ncols()),
            });
        }
    }
    Ok(a.kronecker(b))
}

/// |a⟩ ⊗ |b⟩ for single-qubit states.
pub fn kron_states(a: &StateVector, b: &StateVector) -> Result<StateVector> {
    if a.dim() != 2 || b.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: "two single-qubit states".into(),
            found: format!("dims {} and {}", a.dim(), b.dim()),
        });
    }
    Ok(StateVector::from_dvector(a.amps.kronecker(&b.amps)))
}

/// Objects a unitary can act on.
pub trait Evolve: Sized {
    fn dim(&self) -> usize;
    fn evolve_unchecked(&self, u: &Matrix) -> Self;
}

impl Evolve for StateVector {
    fn dim(&self) -> usize {
        self.amps.len()
    }

    fn evolve_unchecked(&self, u: &Matrix) -> Self {
        Self { amps: u * &self.amps }
    }
}

impl Evolve for DensityMatrix {
    fn dim(&self) -> usize {
        self.m.nrows()
    }

    fn evolve_unchecked(&self, u: &Matrix) -> Self {
        Self { m: u * &self.m * u.adjoint(), deviation: self.deviation }
    }
}

/// U·ψ for vectors, U·ρ·U† for density matrices.
pub fn apply_unitary<S: Evolve>(u: &Matrix, s: &S) -> Result<S> {
    if u.nrows() != u.ncols() || u.nrows() != s.dim() {
        return Err(Error::DimensionMismatch {
            expected: format!("{0}x{0} operator", s.dim()),
            found: format!("{}x{}", u.nrows(), u.ncols()),
        });
    }
    let max_deviation = unitarity_deviation(u);
    if max_deviation > tol::STRUCTURE {
        return Err(Error::NotUnitary { max_deviation });
    }
    Ok(s.evolve_unchecked(u))
}

fn check_qubit(qubit: usize) -> Result<()> {
    if qubit == 1 || qubit == 2 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("qubit index must be 1 or 2, got {qubit}")))
    }
}

/// Bit of `qubit` (1 = most significant) in basis index `index` of a
/// two-qubit space.
pub fn bit_of(index: usize, qubit: usize) -> usize {
    if qubit == 1 {
        (index >> 1) & 1
    } else {
        index & 1
    }
}

/// Reduces a two-qubit density matrix to the marginal of `keep`.
pub fn partial_trace(rho: &DensityMatrix, keep: usize) -> Result<DensityMatrix> {
    check_qubit(keep)?;
    if rho.dim() != 4 {
        return Err(Error::DimensionMismatch {
            expected: "4x4 density matrix".into(),
            found: format!("{0}x{0}", rho.dim()),
        });
    }
    let traced = if keep == 1 { 2 } else { 1 };
    let mut out = Matrix::zeros(2, 2);
    for i in 0..4 {
        for j in 0..4 {
            if bit_of(i, traced) == bit_of(j, traced) {
                out[(bit_of(i, keep), bit_of(j, keep))] += rho.m[(i, j)];
            }
        }
    }
    Ok(DensityMatrix { m: out, deviation: rho.deviation })
}

/// How to pick a measurement outcome.
pub enum Branch<'a> {
    Forced(Outcome),
    Sample(&'a mut dyn RngCore),
}

/// Result of a projective σ_z measurement on one qubit of a two-qubit state.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementRecord {
    pub qubit_index: usize,
    pub outcome: Outcome,
    pub probability: f64,
    /// Renormalized post-measurement joint state.
    pub collapsed: StateVector,
}

/// Probabilities of outcomes 0 and 1 when measuring `qubit` in σ_z.
pub fn branch_probabilities(s: &StateVector, qubit: usize) -> Result<[f64; 2]> {
    check_qubit(qubit)?;
    if s.dim() != 4 {
        return Err(Error::DimensionMismatch { expected: "two-qubit state".into(), found: format!("dim {}", s.dim()) });
    }
    let mut p = [0.0; 2];
    for (i, a) in s.amps.iter().enumerate() {
        p[bit_of(i, qubit)] += a.norm_sqr();
    }
    Ok(p)
}

pub fn project_measure(s: &StateVector, qubit: usize, branch: Branch<'_>) -> Result<MeasurementRecord> {
    s.ensure_normalized()?;
    let p = branch_probabilities(s, qubit)?;
    let outcome = match branch {
        Branch::Forced(o) => o,
        Branch::Sample(rng) => {
            let u: f64 = rng.random();
            if u < p[0] {
                Outcome::Zero
            } else {
                Outcome::One
            }
        }
    };
    let probability = p[outcome.index()];
    if probability < tol::ZERO_PROBABILITY {
        return Err(Error::ZeroProbabilityBranch { qubit, outcome: outcome.bit(), probability });
    }
    let scale = C64::new(probability.sqrt(), 0.0);
    let amps = DVector::from_iterator(
        4,
        s.amps.iter().enumerate().map(|(i, a)| if bit_of(i, qubit) == outcome.index() { a / scale } else { ZERO }),
    );
    Ok(MeasurementRecord { qubit_index: qubit, outcome, probability, collapsed: StateVector::from_dvector(amps) })
}

fn hermitian_sqrt(m: &Matrix) -> Matrix {
    let eig = m.clone().symmetric_eigen();
    let v = &eig.eigenvectors;
    let d = Matrix::from_diagonal(&DVector::from_iterator(
        m.nrows(),
        eig.eigenvalues.iter().map(|&l| C64::new(l.max(0.0).sqrt(), 0.0)),
    ));
    v * d * v.adjoint()
}

fn ensure_physical(rho: &DensityMatrix, name: &str) -> Result<()> {
    if rho.deviation {
        return Err(Error::NotPhysical(format!("{name} is a deviation matrix")));
    }
    DensityMatrix::physical(rho.m.clone()).map(|_| ())
}

/// Uhlmann fidelity (Tr√(√ρ σ √ρ))².
///
/// When either argument is pure the overlap form ⟨ψ|ρ|ψ⟩ is used instead of
/// the matrix square roots.
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    ensure_physical(rho, "first argument")?;
    ensure_physical(sigma, "second argument")?;
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            expected: format!("dim {}", rho.dim()),
            found: format!("dim {}", sigma.dim()),
        });
    }
    let pure_vector = |d: &DensityMatrix| -> Option<StateVector> {
        if (d.purity() - 1.0).abs() > tol::STRUCTURE {
            return None;
        }
        let eig = d.m.clone().symmetric_eigen();
        let (k, _) = eig.eigenvalues.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1))?;
        Some(StateVector::from_dvector(eig.eigenvectors.column(k).into_owned()))
    };
    let f = if let Some(psi) = pure_vector(sigma) {
        expectation(&rho.m, &psi)
    } else if let Some(psi) = pure_vector(rho) {
        expectation(&sigma.m, &psi)
    } else {
        let s = hermitian_sqrt(&rho.m);
        let inner = &s * &sigma.m * &s;
        let inner = (&inner + inner.adjoint()) * C64::new(0.5, 0.0);
        let t: f64 = inner.symmetric_eigen().eigenvalues.iter().map(|&l| l.max(0.0).sqrt()).sum();
        t * t
    };
    Ok(f.clamp(0.0, 1.0))
}

fn expectation(m: &Matrix, psi: &StateVector) -> f64 {
    psi.amps.dotc(&(m * &psi.amps)).re
}

/// ⟨ψ|ρ|ψ⟩ for a Hermitian unit-trace ρ that need not be positive, as
/// produced by least-squares reconstruction of noisy data.
pub fn pure_state_fidelity(rho: &DensityMatrix, psi: &StateVector) -> Result<f64> {
    psi.ensure_normalized()?;
    if rho.dim() != psi.dim() {
        return Err(Error::DimensionMismatch {
            expected: format!("dim {}", rho.dim()),
            found: format!("dim {}", psi.dim()),
        });
    }
    Ok(expectation(&rho.m, psi))
}

/// Fixed gates, qubit 1 most significant.
pub mod gates {
    use super::{Matrix, C64, I, ONE, ZERO};

    fn m2(entries: [C64; 4]) -> Matrix {
        Matrix::from_row_slice(2, 2, &entries)
    }

    pub fn identity2() -> Matrix {
        Matrix::identity(2, 2)
    }

    pub fn pauli_x() -> Matrix {
        m2([ZERO, ONE, ONE, ZERO])
    }

    pub fn pauli_y() -> Matrix {
        m2([ZERO, -I, I, ZERO])
    }

    pub fn pauli_z() -> Matrix {
        m2([ONE, ZERO, ZERO, -ONE])
    }

    pub fn hadamard() -> Matrix {
        let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        m2([h, h, h, -h])
    }

    /// CNOT with qubit 1 as control.
    pub fn cnot() -> Matrix {
        let mut m = Matrix::zeros(4, 4);
        m[(0, 0)] = ONE;
        m[(1, 1)] = ONE;
        m[(2, 3)] = ONE;
        m[(3, 2)] = ONE;
        m
    }
}
