use super::{hamiltonian, spin_operator, Component, PulseEvent, PulseSequence, SpinSystem, Spins};
use crate::error::{Error, Result};
use crate::linalg::{gates, kron, DensityMatrix, Evolve, Matrix, C64};

/// exp(−iθ Σ_{k∈spins} I_α^k), built from the closed form
/// cos(θ/2)·I − i·sin(θ/2)·σ_α per rotated spin.
pub fn rotation_propagator(spins: Spins, axis: super::Axis, angle: f64) -> Matrix {
    let half = 0.5 * angle * axis.sign();
    let rotated = gates::identity2() * C64::new(half.cos(), 0.0) - axis.component().pauli() * C64::new(0.0, half.sin());
    let factor = |spin| if spins.contains(spin) { rotated.clone() } else { gates::identity2() };
    kron(&factor(1), &factor(2)).expect("2x2 factors")
}

/// exp(−iHt) for the diagonal free Hamiltonian.
pub fn delay_propagator(t: f64, sys: &SpinSystem) -> Result<Matrix> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::InvalidArgument(format!("delay must be nonnegative, got {t}")));
    }
    let h = hamiltonian(sys);
    let mut u = Matrix::zeros(4, 4);
    for i in 0..4 {
        u[(i, i)] = C64::new(0.0, -h[(i, i)].re * t).exp();
    }
    Ok(u)
}

/// Total z-magnetization quantum number of a two-spin basis state, doubled
/// to stay integral.
fn magnetization(index: usize) -> i32 {
    let up = |bit: usize| if bit == 0 { 1 } else { -1 };
    up((index >> 1) & 1) + up(index & 1)
}

/// Ideal z-gradient: removes every element of nonzero coherence order.
pub fn gradient_crush(rho: &DensityMatrix) -> Result<DensityMatrix> {
    if rho.dim() != 4 {
        return Err(Error::DimensionMismatch {
            expected: "4x4 density matrix".into(),
            found: format!("{0}x{0}", rho.dim()),
        });
    }
    let mut m = rho.matrix().clone();
    for i in 0..4 {
        for j in 0..4 {
            if magnetization(i) != magnetization(j) {
                m[(i, j)] = C64::new(0.0, 0.0);
            }
        }
    }
    Ok(DensityMatrix::from_parts(m, rho.is_deviation()))
}

/// High-temperature deviation γ_C·I_z¹ + γ_H·I_z².
pub fn thermal_state(sys: &SpinSystem) -> DensityMatrix {
    let m = spin_operator(1, Component::Z) * C64::new(sys.gamma_c, 0.0)
        + spin_operator(2, Component::Z) * C64::new(sys.gamma_h, 0.0);
    DensityMatrix::from_parts(m, true)
}

/// Unitary of a single non-gradient event.
pub fn event_propagator(e: &PulseEvent, sys: &SpinSystem) -> Result<Matrix> {
    match *e {
        PulseEvent::Rotation { spins, axis, angle } => {
            if !angle.is_finite() {
                return Err(Error::NonFinite("rotation angle"));
            }
            Ok(rotation_propagator(spins, axis, angle))
        }
        PulseEvent::Delay(d) => delay_propagator(d.seconds(sys), sys),
        PulseEvent::GradientZ => {
            Err(Error::InvalidArgument("gradient pulses are not unitary; use run_sequence on a density matrix".into()))
        }
    }
}

/// Product of event propagators; the first event acts first.
pub fn sequence_unitary(seq: &PulseSequence, sys: &SpinSystem) -> Result<Matrix> {
    seq.events.iter().try_fold(Matrix::identity(4, 4), |acc, e| Ok(event_propagator(e, sys)? * acc))
}

/// Executes a sequence on a density matrix, gradients included.
pub fn run_sequence(seq: &PulseSequence, rho: &DensityMatrix, sys: &SpinSystem) -> Result<DensityMatrix> {
    if rho.dim() != 4 {
        return Err(Error::DimensionMismatch {
            expected: "4x4 density matrix".into(),
            found: format!("{0}x{0}", rho.dim()),
        });
    }
    seq.events.iter().try_fold(rho.clone(), |state, e| match e {
        PulseEvent::GradientZ => gradient_crush(&state),
        other => Ok(state.evolve_unchecked(&event_propagator(other, sys)?)),
    })
}

#[cfg(test)]
mod tests {
    use super::super::{Axis, ProductOperator, ProductOperatorExpansion};
    use super::*;
    use crate::linalg::{max_abs_diff, unitarity_deviation, StateVector};
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn on_resonance() -> SpinSystem {
        SpinSystem::default()
    }

    fn op(label: &str) -> Matrix {
        label.parse::<ProductOperator>().unwrap().matrix()
    }

    fn rotate(m: &Matrix, spins: Spins, axis: Axis, angle: f64) -> Matrix {
        let u = rotation_propagator(spins, axis, angle);
        &u * m * u.adjoint()
    }

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn pi_about_y_flips_spin_two() {
        let u = rotation_propagator(Spins::Two, Axis::Y, PI);
        let out = &u * StateVector::basis(4, 0).unwrap().as_dvector();
        let out = StateVector::new(out.iter().copied().collect()).unwrap();
        assert!(out.phase_aligned_diff(&StateVector::basis(4, 1).unwrap()) < 1e-15);
    }

    #[test]
    fn quarter_pi_about_minus_x_on_iz2() {
        let got = rotate(&op("Iz2"), Spins::Two, Axis::NegX, PI / 4.0);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let want = op("Iz2") * c(r) + op("Iy2") * c(r);
        assert!(max_abs_diff(&got, &want) < 1e-15);
    }

    #[test]
    fn full_turn_is_minus_identity_per_spin() {
        // Oracle: exponentiate the generator by eigendecomposition.
        for axis in [Axis::X, Axis::Y, Axis::Z, Axis::NegY] {
            for spins in [Spins::One, Spins::Two] {
                let spin = if spins == Spins::One { 1 } else { 2 };
                let g = spin_operator(spin, axis.component()) * c(2.0 * PI * axis.sign());
                let eig = g.clone().symmetric_eigen();
                let d = Matrix::from_diagonal(&nalgebra::DVector::from_iterator(
                    4,
                    eig.eigenvalues.iter().map(|&l| C64::new(0.0, -l).exp()),
                ));
                let oracle = &eig.eigenvectors * d * eig.eigenvectors.adjoint();
                let u = rotation_propagator(spins, axis, 2.0 * PI);
                assert!(max_abs_diff(&u, &oracle) < 1e-12);
                assert!(max_abs_diff(&u, &(-Matrix::identity(4, 4))) < 1e-12);
            }
            let both = rotation_propagator(Spins::Both, axis, 2.0 * PI);
            assert!(max_abs_diff(&both, &Matrix::identity(4, 4)) < 1e-12);
        }
    }

    #[test]
    fn delay_examples() {
        let sys = on_resonance();
        assert_eq!(delay_propagator(0.0, &sys).unwrap(), Matrix::identity(4, 4));
        let u = delay_propagator(1.0 / (2.0 * sys.j12), &sys).unwrap();
        let m = C64::new(0.0, -PI / 4.0).exp();
        let p = C64::new(0.0, PI / 4.0).exp();
        for (i, want) in [m, p, p, m].into_iter().enumerate() {
            assert!((u[(i, i)] - want).norm() < 1e-15);
        }
        let evolved = &u * op("Iy2") * u.adjoint();
        assert!(max_abs_diff(&evolved, &(-op("2Iz1Ix2"))) < 1e-12);
        assert!(delay_propagator(-1.0, &sys).is_err());
    }

    #[test]
    fn gradient_examples() {
        let dev = |m: Matrix| DensityMatrix::deviation(m).unwrap();
        let crushed = gradient_crush(&dev(op("Iy2"))).unwrap();
        assert_eq!(crushed.matrix(), &Matrix::zeros(4, 4));
        let diag = op("Iz1") + op("2Iz1Iz2");
        assert_eq!(gradient_crush(&dev(diag.clone())).unwrap().matrix(), &diag);

        let psi = StateVector::from_real(&[std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2, 0.0, 0.0])
            .unwrap();
        let crushed = gradient_crush(&psi.to_density().unwrap()).unwrap();
        // Element-wise classification: |00⟩ has m=1, |01⟩ has m=0.
        let mut oracle = Matrix::zeros(4, 4);
        oracle[(0, 0)] = c(0.5);
        oracle[(1, 1)] = c(0.5);
        assert!(max_abs_diff(crushed.matrix(), &oracle) < 1e-15);

        // the zero-quantum |01⟩⟨10| block survives
        let zq = StateVector::from_real(&[0.0, 0.6, 0.8, 0.0]).unwrap().to_density().unwrap();
        assert_eq!(gradient_crush(&zq).unwrap(), zq);
    }

    #[test]
    fn gradient_is_idempotent_and_trace_preserving() {
        let psi = StateVector::from_real(&[0.1, 0.5, -0.7, 0.5]).unwrap().normalized().unwrap();
        let rho = psi.to_density().unwrap();
        let once = gradient_crush(&rho).unwrap();
        assert_eq!(gradient_crush(&once).unwrap(), once);
        assert_eq!(once.trace(), rho.trace());
    }

    #[test]
    fn thermal_examples() {
        let sys = SpinSystem { gamma_c: 1.0, gamma_h: 4.0, ..Default::default() };
        let t = thermal_state(&sys);
        // Oracle: γ_C σz/2 ⊗ I + γ_H I ⊗ σz/2 on each basis state.
        for i in 0..4 {
            let z1 = if i & 2 == 0 { 0.5 } else { -0.5 };
            let z2 = if i & 1 == 0 { 0.5 } else { -0.5 };
            assert_eq!(t.entry(i, i), c(z1 + 4.0 * z2));
        }
        assert_eq!((0..4).map(|i| t.entry(i, i).re).collect::<Vec<_>>(), vec![2.5, -1.5, 1.5, -2.5]);
        assert!(t.is_deviation());
        assert_eq!(t.trace(), c(0.0));
        let zero = SpinSystem { gamma_c: 0.0, gamma_h: 0.0, ..Default::default() };
        assert_eq!(thermal_state(&zero).matrix(), &Matrix::zeros(4, 4));
    }

    #[test]
    fn sequence_unitary_examples() {
        let sys = on_resonance();
        assert_eq!(sequence_unitary(&PulseSequence::default(), &sys).unwrap(), Matrix::identity(4, 4));
        let seq = PulseSequence::with_events("flip", vec![PulseEvent::rot(Spins::Two, Axis::Y, PI)]);
        let u = sequence_unitary(&seq, &sys).unwrap();
        assert!((u[(1, 0)].norm() - 1.0).abs() < 1e-15);

        let with_grad = PulseSequence::with_events("g", vec![PulseEvent::GradientZ]);
        assert!(sequence_unitary(&with_grad, &sys).is_err());

        // order: first event acts first
        let seq = PulseSequence::with_events(
            "order",
            vec![PulseEvent::rot(Spins::One, Axis::X, 0.3), PulseEvent::rot(Spins::One, Axis::Y, 0.7)],
        );
        let want = rotation_propagator(Spins::One, Axis::Y, 0.7) * rotation_propagator(Spins::One, Axis::X, 0.3);
        assert!(max_abs_diff(&sequence_unitary(&seq, &sys).unwrap(), &want) < 1e-15);
    }

    #[test]
    fn run_sequence_empty_is_identity() {
        let rho = thermal_state(&on_resonance());
        assert_eq!(run_sequence(&PulseSequence::default(), &rho, &on_resonance()).unwrap(), rho);
    }

    fn expand_coeff(m: &Matrix, label: &str) -> f64 {
        ProductOperatorExpansion::from_matrix(m).get(label.parse().unwrap())
    }

    proptest! {
        #[test]
        fn rotation_convention_lock(theta in -7.0..7.0f64, spin in 1usize..=2) {
            let spins = if spin == 1 { Spins::One } else { Spins::Two };
            let name = |a: &str| format!("I{a}{spin}");
            let (s, cth) = (theta.sin(), theta.cos());
            let checks: [(Axis, &str, [(&str, f64); 2]); 5] = [
                (Axis::X, "z", [("z", cth), ("y", -s)]),
                (Axis::NegX, "z", [("z", cth), ("y", s)]),
                (Axis::Y, "z", [("z", cth), ("x", s)]),
                (Axis::Y, "x", [("x", cth), ("z", -s)]),
                (Axis::Z, "x", [("x", cth), ("y", s)]),
            ];
            for (axis, from, terms) in checks {
                let out = rotate(&op(&name(from)), spins, axis, theta);
                let want = terms.iter().fold(Matrix::zeros(4, 4), |acc, (a, w)| acc + op(&name(a)) * c(*w));
                prop_assert!(max_abs_diff(&out, &want) < 1e-12);
                for (a, w) in terms {
                    prop_assert!((expand_coeff(&out, &name(a)) - w).abs() < 1e-12);
                }
            }
        }

        #[test]
        fn random_sequences_are_unitary(
            angles in prop::collection::vec(-7.0..7.0f64, 1..12),
            delays in prop::collection::vec(0.0..0.01f64, 1..6),
            nu1 in -2000.0..2000.0f64,
        ) {
            let sys = SpinSystem { nu1, ..Default::default() };
            let axes = [Axis::X, Axis::Y, Axis::Z, Axis::NegX, Axis::NegY, Axis::NegZ];
            let spins = [Spins::One, Spins::Two, Spins::Both];
            let mut seq = PulseSequence::new("random");
            for (k, a) in angles.iter().enumerate() {
                seq.push(PulseEvent::rot(spins[k % 3], axes[k % 6], *a));
                if let Some(t) = delays.get(k) {
                    seq.push(PulseEvent::Delay(super::super::DelayDuration::Seconds(*t)));
                }
            }
            prop_assert!(unitarity_deviation(&sequence_unitary(&seq, &sys).unwrap()) < 1e-10);
        }
    }
}
