//! Spatial-averaging pseudopure preparation and input-state pulses.

use std::f64::consts::FRAC_PI_4;

use serde::Serialize;

use super::{
    product_operator_expand, refocused_j_block, run_sequence, thermal_state, Axis, ProductOperatorExpansion,
    PulseEvent, PulseSequence, SpinSystem, Spins,
};
use crate::error::{Error, Result};
use crate::linalg::{DensityMatrix, Matrix, C64};
use crate::protocol::PureQubitState;
use crate::tol;

#[derive(Copy, Clone, Debug, PartialEq, Serialize)]
pub struct PrepConfig {
    pub theta: f64,
}

/// θ with cos θ = 2γ_C/γ_H.
pub fn prep_angle(sys: &SpinSystem) -> Result<PrepConfig> {
    let ratio = 2.0 * sys.gamma_c / sys.gamma_h;
    if !ratio.is_finite() || ratio >= 1.0 || ratio <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "2*gamma_c/gamma_h = {ratio} has no preparation angle in (0, pi/2)"
        )));
    }
    Ok(PrepConfig { theta: ratio.acos() })
}

/// The six labelled steps of the preparation, in execution order.
pub fn prep_steps(config: &PrepConfig) -> Vec<PulseSequence> {
    let mut delay = refocused_j_block();
    delay.label = "[1/(2J)]".into();
    vec![
        PulseSequence::with_events("[theta]_x^2", vec![PulseEvent::rot(Spins::Two, Axis::X, config.theta)]),
        PulseSequence::with_events("[grad]_z", vec![PulseEvent::GradientZ]),
        PulseSequence::with_events("[pi/4]_-x^2", vec![PulseEvent::rot(Spins::Two, Axis::NegX, FRAC_PI_4)]),
        delay,
        PulseSequence::with_events("[pi/4]_y^2", vec![PulseEvent::rot(Spins::Two, Axis::Y, FRAC_PI_4)]),
        PulseSequence::with_events("[grad]_z", vec![PulseEvent::GradientZ]),
    ]
}

/// All preparation steps flattened into one sequence.
pub fn pseudopure_prep_sequence(sys: &SpinSystem) -> Result<PulseSequence> {
    let config = prep_angle(sys)?;
    let mut seq = PulseSequence::new("pseudopure-prep");
    for step in prep_steps(&config) {
        seq.append(&step);
    }
    Ok(seq)
}

#[derive(Clone, Debug, Serialize)]
pub struct PrepStep {
    pub label: String,
    pub expansion: ProductOperatorExpansion,
}

#[derive(Clone, Debug)]
pub struct PrepRun {
    pub config: PrepConfig,
    pub thermal: ProductOperatorExpansion,
    pub final_state: DensityMatrix,
    /// Expansion after every step, in order.
    pub intermediates: Vec<PrepStep>,
}

impl PrepRun {
    /// One line per state in units of γ_C, starting from the thermal state.
    pub fn replay_log(&self, gamma_c: f64) -> String {
        let mut out = format!("thermal => {}\n", self.thermal.scaled(1.0 / gamma_c));
        for step in &self.intermediates {
            out.push_str(&format!("{} => {}\n", step.label, step.expansion.scaled(1.0 / gamma_c)));
        }
        out
    }
}

pub fn pseudopure_prep(sys: &SpinSystem) -> Result<PrepRun> {
    sys.validate()?;
    let config = prep_angle(sys)?;
    let thermal = thermal_state(sys);
    let mut rho = thermal.clone();
    let mut intermediates = Vec::new();
    for step in prep_steps(&config) {
        rho = run_sequence(&step, &rho, sys)?;
        intermediates.push(PrepStep { label: step.label.clone(), expansion: product_operator_expand(&rho)? });
    }
    Ok(PrepRun { config, thermal: product_operator_expand(&thermal)?, final_state: rho, intermediates })
}

/// 2γ_C[(1/2 + Iz¹)(1/2 + Iz²) − 1/4] = γ_C(Iz¹ + Iz² + 2Iz¹Iz²).
pub fn pseudopure_target(sys: &SpinSystem) -> ProductOperatorExpansion {
    let g = sys.gamma_c;
    ProductOperatorExpansion::from_terms(&[("Iz1", g), ("Iz2", g), ("2Iz1Iz2", g)]).expect("valid labels")
}

/// The I_y² coefficient magnitude after the first pulse, both as exact
/// evolution gives it and in the dimensionless form that appears in print.
#[derive(Copy, Clone, Debug, PartialEq, Serialize)]
pub struct TransverseCoefficients {
    pub exact: f64,
    pub printed: f64,
}

pub fn transverse_coefficients(sys: &SpinSystem) -> TransverseCoefficients {
    let (c, h) = (sys.gamma_c, sys.gamma_h);
    TransverseCoefficients { exact: (h * h - 4.0 * c * c).sqrt(), printed: (1.0 - 4.0 * c * c / (h * h)).sqrt() }
}

/// Maps a traceless deviation δ to the unit-trace state I/4 + s·δ whose
/// purity is one when δ has the shape of a pseudopure deviation.
pub fn effective_state(deviation: &DensityMatrix) -> Result<DensityMatrix> {
    let n = deviation.dim();
    let mut d = deviation.matrix().clone();
    let shift = deviation.trace() / C64::new(n as f64, 0.0);
    for i in 0..n {
        d[(i, i)] -= shift;
    }
    let norm = d.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm < tol::EXACT {
        return Err(Error::NotPhysical("deviation has no traceless part".into()));
    }
    let scale = (1.0 - 1.0 / n as f64).sqrt() / norm;
    let m = Matrix::identity(n, n) * C64::new(1.0 / n as f64, 0.0) + d * C64::new(scale, 0.0);
    DensityMatrix::unit_trace(m)
}

fn input_angle(target: &PureQubitState, spin: usize) -> Result<f64> {
    let (a, b) = (target.a(), target.b());
    if a.im.abs() > tol::NORM || b.im.abs() > tol::NORM {
        return Err(Error::InvalidArgument(format!(
            "target for spin {spin} has complex amplitudes; only real states can be prepared with y-rotations"
        )));
    }
    Ok(2.0 * b.re.atan2(a.re))
}

/// y-rotations taking |00⟩ to |target1⟩|target2⟩; zero-angle rotations are
/// omitted.
pub fn prepare_input_state(target1: &PureQubitState, target2: &PureQubitState) -> Result<PulseSequence> {
    let mut seq = PulseSequence::new("input-prep");
    for (spin, spins, target) in [(1, Spins::One, target1), (2, Spins::Two, target2)] {
        let theta = input_angle(target, spin)?;
        if theta != 0.0 {
            seq.push(PulseEvent::rot(spins, Axis::Y, theta));
        }
    }
    Ok(seq)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{kron_states, max_abs_diff, StateVector};
    use crate::nmr::sequence_unitary;
    use std::f64::consts::PI;

    fn quarter() -> SpinSystem {
        SpinSystem { gamma_c: 1.0, gamma_h: 4.0, ..Default::default() }
    }

    fn terms(t: &[(&str, f64)]) -> ProductOperatorExpansion {
        ProductOperatorExpansion::from_terms(t).unwrap()
    }

    #[test]
    fn prep_angle_examples() {
        assert!((prep_angle(&quarter()).unwrap().theta - PI / 3.0).abs() < 1e-15);
        let theta = prep_angle(&SpinSystem::default()).unwrap().theta;
        assert!((theta - 1.0437).abs() < 1e-4);
        assert!((theta.cos() - 2.0 * crate::nmr::GAMMA_C / crate::nmr::GAMMA_H).abs() < 1e-12);
        assert!(prep_angle(&SpinSystem { gamma_c: 1.0, gamma_h: 2.0, ..Default::default() }).is_err());
    }

    #[test]
    fn replay_matches_hand_evolution() {
        for sys in [quarter(), SpinSystem::default(), SpinSystem { nu1: 730.0, nu2: -1210.0, ..Default::default() }] {
            let run = pseudopure_prep(&sys).unwrap();
            let g = sys.gamma_c;
            let s2 = 2f64.sqrt();
            let t = transverse_coefficients(&sys);
            let want = [
                terms(&[("Iz1", g), ("Iz2", 2.0 * g), ("Iy2", -t.exact)]),
                terms(&[("Iz1", g), ("Iz2", 2.0 * g)]),
                terms(&[("Iz1", g), ("Iz2", s2 * g), ("Iy2", s2 * g)]),
                terms(&[("Iz1", g), ("Iz2", s2 * g), ("2Iz1Ix2", -s2 * g)]),
                terms(&[("Iz1", g), ("Iz2", g), ("Ix2", g), ("2Iz1Ix2", -g), ("2Iz1Iz2", g)]),
                terms(&[("Iz1", g), ("Iz2", g), ("2Iz1Iz2", g)]),
            ];
            assert_eq!(run.intermediates.len(), 6);
            let scale = sys.gamma_h;
            for (step, w) in run.intermediates.iter().zip(&want) {
                assert!(step.expansion.max_abs_diff(w) < 1e-10 * scale, "{}: {}", step.label, step.expansion);
            }
            assert!(run.intermediates[5].expansion.max_abs_diff(&pseudopure_target(&sys)) < 1e-10 * scale);
            assert!(run.intermediates[5].expansion.coefficient("E").abs() < 1e-10 * scale);

            let seq = pseudopure_prep_sequence(&sys).unwrap();
            let direct = run_sequence(&seq, &thermal_state(&sys), &sys).unwrap();
            assert!(direct.max_abs_diff(&run.final_state) < 1e-10 * scale);
        }
    }

    #[test]
    fn printed_and_exact_transverse_scalars_differ() {
        let t = transverse_coefficients(&quarter());
        assert!((t.exact - 12f64.sqrt()).abs() < 1e-15);
        assert!((t.printed - 0.75f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn replay_log_is_in_units_of_gamma_c() {
        let run = pseudopure_prep(&quarter()).unwrap();
        let log = run.replay_log(1.0);
        assert!(log.starts_with("thermal => Iz1 + 4 Iz2\n"));
        assert!(log.contains("[grad]_z => Iz1 + 2 Iz2\n"));
        assert!(log.ends_with("[grad]_z => Iz1 + Iz2 + 2Iz1Iz2\n"));
    }

    #[test]
    fn effective_state_of_pseudopure_is_ground_projector() {
        let run = pseudopure_prep(&SpinSystem::default()).unwrap();
        let rho = effective_state(&run.final_state).unwrap();
        let ground = StateVector::basis(4, 0).unwrap().to_density().unwrap();
        assert!(rho.max_abs_diff(&ground) < 1e-10);
        assert!(effective_state(&DensityMatrix::deviation(Matrix::zeros(4, 4)).unwrap()).is_err());
    }

    #[test]
    fn input_state_examples() {
        let s = |a: f64, b: f64| PureQubitState::from_real(a, b).unwrap();
        let seq = prepare_input_state(&s(1.0, 0.0), &s(0.0, 1.0)).unwrap();
        assert_eq!(seq.events, vec![PulseEvent::rot(Spins::Two, Axis::Y, PI)]);

        let seq = prepare_input_state(&s(3f64.sqrt() / 2.0, 0.5), &s(1.0, 0.0)).unwrap();
        assert_eq!(seq.events.len(), 1);
        match seq.events[0] {
            PulseEvent::Rotation { angle, .. } => assert!((angle - PI / 3.0).abs() < 1e-15),
            _ => unreachable!(),
        }
        assert!(prepare_input_state(&s(1.0, 0.0), &s(1.0, 0.0)).unwrap().is_empty());

        let complex = PureQubitState::new(C64::new(0.0, 1.0), C64::new(0.0, 0.0)).unwrap();
        assert!(prepare_input_state(&complex, &s(1.0, 0.0)).is_err());
    }

    #[test]
    fn input_state_reaches_product_target() {
        let sys = SpinSystem::default();
        let grid = 24;
        for i in 0..grid {
            for j in 0..grid {
                let t = |k: usize| 2.0 * PI * k as f64 / grid as f64;
                let p1 = PureQubitState::from_real(t(i).cos(), t(i).sin()).unwrap();
                let p2 = PureQubitState::from_real(t(j).cos(), t(j).sin()).unwrap();
                let u = sequence_unitary(&prepare_input_state(&p1, &p2).unwrap(), &sys).unwrap();
                let out = &u * StateVector::basis(4, 0).unwrap().as_dvector();
                let out = StateVector::new(out.iter().copied().collect()).unwrap();
                let want = kron_states(&p1.to_vector(), &p2.to_vector()).unwrap();
                assert!(out.phase_aligned_diff(&want) < 1e-10);
                let rho = out.to_density().unwrap();
                assert!(max_abs_diff(rho.matrix(), want.to_density().unwrap().matrix()) < 1e-10);
            }
        }
    }
}
