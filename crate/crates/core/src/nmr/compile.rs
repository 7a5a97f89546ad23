use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{Axis, PulseEvent, PulseSequence, Spins};
use crate::error::{Error, Result};

/// τ → [π]_x^{12} → τ → [π]_{−x}^{12} with τ = 1/(4J): pure coupling
/// evolution for 1/(2J) with chemical shifts refocused.
pub fn refocused_j_block() -> PulseSequence {
    PulseSequence::with_events(
        "refocused-1/(2J)",
        vec![
            PulseEvent::delay_j(4),
            PulseEvent::rot(Spins::Both, Axis::X, PI),
            PulseEvent::delay_j(4),
            PulseEvent::rot(Spins::Both, Axis::NegX, PI),
        ],
    )
}

/// CNOT with spin 1 as control, up to a global phase.
pub fn cnot_pulse_sequence() -> PulseSequence {
    let mut seq = PulseSequence::new("cnot");
    seq.push(PulseEvent::rot(Spins::Two, Axis::NegY, FRAC_PI_2));
    seq.append(&refocused_j_block());
    seq.push(PulseEvent::rot(Spins::Both, Axis::NegZ, FRAC_PI_2));
    seq.push(PulseEvent::rot(Spins::Two, Axis::Y, FRAC_PI_2));
    seq
}

/// [π/2]_y¹ → [π]_{−x}¹, which is i·H on spin 1.
pub fn hadamard_block() -> PulseSequence {
    PulseSequence::with_events(
        "hadamard-1",
        vec![PulseEvent::rot(Spins::One, Axis::Y, FRAC_PI_2), PulseEvent::rot(Spins::One, Axis::NegX, PI)],
    )
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QspaMode {
    /// The published pulse list, transcribed as printed.
    PaperLiteral,
    /// CNOT, Hadamard on spin 1, CNOT.
    VerifiedDefault,
}

impl fmt::Display for QspaMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::PaperLiteral => "paper-literal",
            Self::VerifiedDefault => "verified-default",
        })
    }
}

impl FromStr for QspaMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper-literal" => Ok(Self::PaperLiteral),
            "verified-default" => Ok(Self::VerifiedDefault),
            other => Err(Error::InvalidArgument(format!(
                "unknown mode '{other}' (expected paper-literal or verified-default)"
            ))),
        }
    }
}

fn literal_half() -> PulseSequence {
    let mut seq = PulseSequence::new("");
    seq.push(PulseEvent::rot(Spins::Two, Axis::Y, FRAC_PI_2));
    seq.append(&refocused_j_block());
    seq.push(PulseEvent::rot(Spins::Two, Axis::NegY, PI));
    seq.push(PulseEvent::rot(Spins::Two, Axis::X, FRAC_PI_2));
    seq.push(PulseEvent::rot(Spins::Both, Axis::Z, FRAC_PI_2));
    seq
}

pub fn qspa_pulse_sequence(mode: QspaMode) -> PulseSequence {
    let mut seq = PulseSequence::new(format!("qspa-{mode}"));
    match mode {
        QspaMode::PaperLiteral => {
            seq.append(&literal_half());
            seq.push(PulseEvent::rot(Spins::One, Axis::Y, FRAC_PI_2));
            seq.push(PulseEvent::rot(Spins::One, Axis::NegX, PI));
            seq.append(&literal_half());
        }
        QspaMode::VerifiedDefault => {
            seq.append(&cnot_pulse_sequence());
            seq.append(&hadamard_block());
            seq.append(&cnot_pulse_sequence());
        }
    }
    seq
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{gates, kron, max_abs_diff, unitarity_deviation, Matrix, C64};
    use crate::nmr::{delay_propagator, equivalent_up_to_phase, sequence_unitary, PhaseFreedom, SpinSystem};
    use crate::protocol::chc_unitary;
    use proptest::prelude::*;

    fn aligned_diff(u: &Matrix, v: &Matrix) -> f64 {
        equivalent_up_to_phase(u, v, PhaseFreedom::GlobalOnly).unwrap().max_deviation
    }

    #[test]
    fn refocused_block_is_pure_coupling() {
        let sys = SpinSystem::default();
        let u = sequence_unitary(&refocused_j_block(), &sys).unwrap();
        let want = delay_propagator(1.0 / (2.0 * sys.j12), &sys).unwrap();
        assert!(aligned_diff(&u, &want) < 1e-10);

        let shifted = SpinSystem { nu1: 1000.0, nu2: -500.0, ..sys };
        let u = sequence_unitary(&refocused_j_block(), &shifted).unwrap();
        assert!(aligned_diff(&u, &want) < 1e-10);
    }

    #[test]
    fn cnot_sequence_matches_gate() {
        let sys = SpinSystem::default();
        let u = sequence_unitary(&cnot_pulse_sequence(), &sys).unwrap();
        assert!(aligned_diff(&u, &gates::cnot()) < 1e-10);
        assert!((u[(3, 2)].norm() - 1.0).abs() < 1e-12);
        assert!((u[(0, 0)].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hadamard_block_is_i_times_h() {
        let u = sequence_unitary(&hadamard_block(), &SpinSystem::default()).unwrap();
        let want = kron(&gates::hadamard(), &gates::identity2()).unwrap() * C64::new(0.0, 1.0);
        assert!(max_abs_diff(&u, &want) < 1e-15);
    }

    #[test]
    fn verified_default_is_chc() {
        let u = sequence_unitary(&qspa_pulse_sequence(QspaMode::VerifiedDefault), &SpinSystem::default()).unwrap();
        assert!(aligned_diff(&u, &chc_unitary()) < 1e-10);
        let report = equivalent_up_to_phase(&u, &chc_unitary(), PhaseFreedom::GlobalPlusZ).unwrap();
        assert!(report.verdict);
    }

    #[test]
    fn literal_sequence_is_unitary() {
        let seq = qspa_pulse_sequence(QspaMode::PaperLiteral);
        assert_eq!(seq.len(), 2 * (4 + 4) + 2);
        let u = sequence_unitary(&seq, &SpinSystem::default()).unwrap();
        assert!(unitarity_deviation(&u) < 1e-10);
    }

    #[test]
    fn mode_parsing() {
        assert_eq!("paper-literal".parse::<QspaMode>().unwrap(), QspaMode::PaperLiteral);
        assert_eq!(QspaMode::VerifiedDefault.to_string(), "verified-default");
        assert!("fast".parse::<QspaMode>().is_err());
    }

    proptest! {
        #[test]
        fn refocusing_is_offset_independent(nu1 in -2000.0..2000.0f64, nu2 in -2000.0..2000.0f64) {
            let base = SpinSystem::default();
            let sys = SpinSystem { nu1, nu2, ..base };
            let u = sequence_unitary(&refocused_j_block(), &sys).unwrap();
            let want = delay_propagator(1.0 / (2.0 * base.j12), &base).unwrap();
            prop_assert!(aligned_diff(&u, &want) < 1e-10);
        }
    }
}
