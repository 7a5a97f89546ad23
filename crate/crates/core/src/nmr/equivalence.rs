//! Unitary comparison modulo phase freedoms.
//!
//! Fitted phases describe how to map `v` onto `u`: with global-only,
//! e^{iφ}·V ≈ U; with global-plus-z, e^{iφ}·D(α₂,β₂)·V·D(α₁,β₁) ≈ U, where
//! D(α,β) = diag(e^{iαz₁/2}) ⊗ diag(e^{iβz₂/2}) and z = ±1.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{max_abs, unitarity_deviation, Matrix, C64};
use crate::tol;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhaseFreedom {
    GlobalOnly,
    GlobalPlusZ,
}

impl fmt::Display for PhaseFreedom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::GlobalOnly => "global-only",
            Self::GlobalPlusZ => "global-plus-z",
        })
    }
}

impl FromStr for PhaseFreedom {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "global-only" => Ok(Self::GlobalOnly),
            "global-plus-z" => Ok(Self::GlobalPlusZ),
            other => Err(Error::InvalidArgument(format!(
                "unknown phase freedom '{other}' (expected global-only or global-plus-z)"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EquivalenceReport {
    pub verdict: bool,
    /// [φ] or [φ, α₁, β₁, α₂, β₂].
    pub fitted_phases: Vec<f64>,
    pub max_deviation: f64,
}

fn z_sign(index: usize, spin: usize) -> f64 {
    let bit = if spin == 1 { (index >> 1) & 1 } else { index & 1 };
    1.0 - 2.0 * bit as f64
}

fn diagonal_phase(index: usize, alpha: f64, beta: f64) -> f64 {
    0.5 * (alpha * z_sign(index, 1) + beta * z_sign(index, 2))
}

/// e^{iφ}·D(α₂,β₂)·V·D(α₁,β₁).
fn model(v: &Matrix, p: &[f64; 5]) -> Matrix {
    Matrix::from_fn(4, 4, |i, j| {
        let phase = p[0] + diagonal_phase(i, p[3], p[4]) + diagonal_phase(j, p[1], p[2]);
        v[(i, j)] * C64::from_polar(1.0, phase)
    })
}

/// Reduces to (−period/2, period/2].
fn wrap(x: f64, period: f64) -> f64 {
    let half = 0.5 * period;
    let y = (x + half).rem_euclid(period) - half;
    if y <= -half {
        y + period
    } else {
        y
    }
}

/// D(α,β) has period 4π in each angle, the global phase 2π.
fn wrap_phases(p: [f64; 5]) -> [f64; 5] {
    std::array::from_fn(|k| wrap(p[k], if k == 0 { 2.0 * PI } else { 4.0 * PI }))
}

fn best_global(u: &Matrix, w: &Matrix) -> f64 {
    (w.adjoint() * u).trace().arg()
}

fn residual(u: &Matrix, v: &Matrix, p: &[f64; 5]) -> f64 {
    max_abs(&(model(v, p) - u))
}

fn levenberg_marquardt(u: &Matrix, v: &Matrix, start: [f64; 5]) -> [f64; 5] {
    let cost = |p: &[f64; 5]| (model(v, p) - u).iter().map(|z| z.norm_sqr()).sum::<f64>();
    let mut p = start;
    let mut c = cost(&p);
    let mut lambda = 1e-3;
    for _ in 0..200 {
        if c < 1e-30 {
            break;
        }
        let w = model(v, &p);
        let mut jac = DMatrix::<f64>::zeros(32, 5);
        let mut r = DVector::<f64>::zeros(32);
        for i in 0..4 {
            for j in 0..4 {
                let k = 4 * i + j;
                let diff = w[(i, j)] - u[(i, j)];
                r[2 * k] = diff.re;
                r[2 * k + 1] = diff.im;
                // ∂W/∂θ = i·(∂phase/∂θ)·W
                let iw = C64::new(0.0, 1.0) * w[(i, j)];
                let derivs = [1.0, 0.5 * z_sign(j, 1), 0.5 * z_sign(j, 2), 0.5 * z_sign(i, 1), 0.5 * z_sign(i, 2)];
                for (m, d) in derivs.iter().enumerate() {
                    jac[(2 * k, m)] = iw.re * d;
                    jac[(2 * k + 1, m)] = iw.im * d;
                }
            }
        }
        let jtj = jac.transpose() * &jac;
        let g = jac.transpose() * &r;
        let mut improved = false;
        for _ in 0..20 {
            let mut a = jtj.clone();
            for m in 0..5 {
                a[(m, m)] += lambda * (1.0 + jtj[(m, m)]);
            }
            let Some(step) = a.lu().solve(&(-&g)) else {
                lambda *= 10.0;
                continue;
            };
            let trial: [f64; 5] = std::array::from_fn(|m| p[m] + step[m]);
            let tc = cost(&trial);
            if tc < c {
                p = trial;
                c = tc;
                lambda = (lambda * 0.3).max(1e-12);
                improved = true;
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            break;
        }
    }
    p
}

/// Decides whether `u` and `v` agree up to the given freedom.
pub fn equivalent_up_to_phase(u: &Matrix, v: &Matrix, freedom: PhaseFreedom) -> Result<EquivalenceReport> {
    for (name, m) in [("U", u), ("V", v)] {
        if m.nrows() != 4 || m.ncols() != 4 {
            return Err(Error::DimensionMismatch {
                expected: "4x4 unitary".into(),
                found: format!("{name} is {}x{}", m.nrows(), m.ncols()),
            });
        }
        let dev = unitarity_deviation(m);
        if dev > tol::STRUCTURE {
            return Err(Error::NotUnitary { max_deviation: dev });
        }
    }
    let (phases, max_deviation) = match freedom {
        PhaseFreedom::GlobalOnly => {
            let phi = best_global(u, v);
            let p = [phi, 0.0, 0.0, 0.0, 0.0];
            (vec![phi], residual(u, v, &p))
        }
        PhaseFreedom::GlobalPlusZ => {
            const GRID: usize = 8;
            const STARTS: usize = 16;
            let step = 2.0 * PI / GRID as f64;
            let mut candidates = Vec::with_capacity(GRID.pow(4));
            for k in 0..GRID.pow(4) {
                let idx = [k % GRID, (k / GRID) % GRID, (k / GRID.pow(2)) % GRID, k / GRID.pow(3)];
                let mut p =
                    [0.0, idx[0] as f64 * step, idx[1] as f64 * step, idx[2] as f64 * step, idx[3] as f64 * step];
                let overlap = (model(v, &p).adjoint() * u).trace();
                p[0] = overlap.arg();
                candidates.push((overlap.norm(), p));
            }
            // Stable sort keeps grid order among ties, so the fit is deterministic.
            candidates.sort_by(|a, b| b.0.total_cmp(&a.0));
            let mut best = ([0.0; 5], f64::INFINITY);
            for (_, start) in candidates.iter().take(STARTS) {
                let p = wrap_phases(levenberg_marquardt(u, v, *start));
                let r = residual(u, v, &p);
                if r < best.1 {
                    best = (p, r);
                }
                if r < tol::EXACT {
                    break;
                }
            }
            let p = best.0;
            (p.to_vec(), residual(u, v, &p))
        }
    };
    Ok(EquivalenceReport { verdict: max_deviation < tol::EQUIVALENCE, fitted_phases: phases, max_deviation })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{gates, kron};
    use crate::protocol::chc_unitary;
    use proptest::prelude::*;

    fn z_rot(t: f64) -> Matrix {
        Matrix::from_diagonal(&DVector::from_vec(vec![C64::from_polar(1.0, t / 2.0), C64::from_polar(1.0, -t / 2.0)]))
    }

    #[test]
    fn global_phase_is_recovered() {
        let u = chc_unitary();
        let v = &u * C64::from_polar(1.0, PI / 7.0);
        let r = equivalent_up_to_phase(&u, &v, PhaseFreedom::GlobalOnly).unwrap();
        assert!(r.verdict);
        assert!((r.fitted_phases[0] + PI / 7.0).abs() < 1e-12);
        assert!(r.max_deviation < 1e-12);
    }

    #[test]
    fn distinct_gates_are_rejected() {
        let cnot = gates::cnot();
        let x1 = kron(&gates::pauli_x(), &gates::identity2()).unwrap() * &cnot;
        for f in [PhaseFreedom::GlobalOnly, PhaseFreedom::GlobalPlusZ] {
            let r = equivalent_up_to_phase(&cnot, &x1, f).unwrap();
            assert!(!r.verdict, "{f}");
            assert!(r.max_deviation > 0.1);
        }
    }

    #[test]
    fn rejects_non_unitary_input() {
        let bad = Matrix::identity(4, 4) * C64::new(2.0, 0.0);
        assert!(equivalent_up_to_phase(&bad, &Matrix::identity(4, 4), PhaseFreedom::GlobalOnly).is_err());
        assert!(equivalent_up_to_phase(&gates::hadamard(), &gates::hadamard(), PhaseFreedom::GlobalOnly).is_err());
    }

    #[test]
    fn parses_freedoms() {
        assert_eq!("global-plus-z".parse::<PhaseFreedom>().unwrap(), PhaseFreedom::GlobalPlusZ);
        assert!("local".parse::<PhaseFreedom>().is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn z_dressed_chc_is_recognized(
            phi in -3.0..3.0f64,
            a in prop::array::uniform4(-6.0..6.0f64),
        ) {
            let u = chc_unitary();
            let left = kron(&z_rot(a[0]), &z_rot(a[1])).unwrap();
            let right = kron(&z_rot(a[2]), &z_rot(a[3])).unwrap();
            let v = left * &u * right * C64::from_polar(1.0, phi);
            let r = equivalent_up_to_phase(&u, &v, PhaseFreedom::GlobalPlusZ).unwrap();
            prop_assert!(r.verdict, "residual {}", r.max_deviation);
            prop_assert!(r.max_deviation < 1e-10);
        }
    }
}
