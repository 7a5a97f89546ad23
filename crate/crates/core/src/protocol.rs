//! The CHC privacy-amplification step: CNOT · (H ⊗ I) · CNOT on a control
//! and a target qubit, a σ_z measurement of the target, and the condensed
//! control state that carries the information of both inputs.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, gates, Branch, Matrix, Outcome, StateVector, C64};
use crate::tol;

/// Single-qubit pure state a|0⟩ + b|1⟩ with |a|² + |b|² = 1.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PureQubitState {
    a: C64,
    b: C64,
}

impl PureQubitState {
    pub fn new(a: C64, b: C64) -> Result<Self> {
        if ![a.re, a.im, b.re, b.im].iter().all(|x| x.is_finite()) {
            return Err(Error::NonFinite("qubit amplitudes"));
        }
        let deviation = (a.norm_sqr() + b.norm_sqr() - 1.0).abs();
        if deviation > tol::NORM {
            return Err(Error::NotNormalized { deviation });
        }
        Ok(Self { a, b })
    }

    pub fn from_real(a: f64, b: f64) -> Result<Self> {
        Self::new(C64::new(a, 0.0), C64::new(b, 0.0))
    }

    /// Renormalizes arbitrary nonzero amplitudes.
    pub fn normalized(a: C64, b: C64) -> Result<Self> {
        let n = (a.norm_sqr() + b.norm_sqr()).sqrt();
        if !(n.is_finite() && n > tol::ZERO_PROBABILITY) {
            return Err(Error::InvalidArgument("cannot normalize a zero amplitude pair".into()));
        }
        Self::new(a / n, b / n)
    }

    pub fn zero() -> Self {
        Self { a: linalg::ONE, b: linalg::ZERO }
    }

    pub fn one() -> Self {
        Self { a: linalg::ZERO, b: linalg::ONE }
    }

    pub fn a(&self) -> C64 {
        self.a
    }

    pub fn b(&self) -> C64 {
        self.b
    }

    pub fn to_vector(&self) -> StateVector {
        StateVector::new(vec![self.a, self.b]).expect("two finite amplitudes")
    }

    /// |⟨self|other⟩|.
    pub fn overlap(&self, other: &Self) -> f64 {
        (self.a.conj() * other.a + self.b.conj() * other.b).norm()
    }

    /// Max amplitude deviation after removing the best global phase.
    pub fn phase_distance(&self, other: &Self) -> f64 {
        self.to_vector().phase_aligned_diff(&other.to_vector())
    }
}

/// The four BB84 states.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Bb84Label {
    #[serde(rename = "+z")]
    PlusZ,
    #[serde(rename = "-z")]
    MinusZ,
    #[serde(rename = "+x")]
    PlusX,
    #[serde(rename = "-x")]
    MinusX,
}

impl Bb84Label {
    /// Fixed order, also used for tie-breaking.
    pub const ALL: [Bb84Label; 4] = [Self::PlusZ, Self::MinusZ, Self::PlusX, Self::MinusX];

    pub fn index(self) -> usize {
        match self {
            Self::PlusZ => 0,
            Self::MinusZ => 1,
            Self::PlusX => 2,
            Self::MinusX => 3,
        }
    }

    pub fn from_index(i: usize) -> Self {
        Self::ALL[i]
    }

    pub fn state(self) -> PureQubitState {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        match self {
            Self::PlusZ => PureQubitState::zero(),
            Self::MinusZ => PureQubitState::one(),
            Self::PlusX => PureQubitState { a: C64::new(r, 0.0), b: C64::new(r, 0.0) },
            Self::MinusX => PureQubitState { a: C64::new(r, 0.0), b: C64::new(-r, 0.0) },
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Self::PlusZ => "+z",
            Self::MinusZ => "-z",
            Self::PlusX => "+x",
            Self::MinusX => "-x",
        }
    }

    /// The label whose state equals `s` up to global phase, if any.
    pub fn nearest(s: &PureQubitState) -> Option<Self> {
        Self::ALL
            .into_iter()
            .map(|l| (l, l.state().phase_distance(s)))
            .min_by(|x, y| x.1.total_cmp(&y.1))
            .filter(|&(_, d)| d < tol::LABEL_MATCH)
            .map(|(l, _)| l)
    }
}

impl fmt::Display for Bb84Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

impl FromStr for Bb84Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "+z" | "z" | "0" => Ok(Self::PlusZ),
            "-z" | "1" => Ok(Self::MinusZ),
            "+x" | "x" | "+" => Ok(Self::PlusX),
            "-x" | "-" => Ok(Self::MinusX),
            other => Err(Error::InvalidArgument(format!("unknown BB84 label '{other}'"))),
        }
    }
}

/// CNOT₁₂ · (H ⊗ I) · CNOT₁₂, qubit 1 the control.
pub fn chc_unitary() -> Matrix {
    let h1 = linalg::kron(&gates::hadamard(), &gates::identity2()).expect("2x2 factors");
    gates::cnot() * h1 * gates::cnot()
}

/// Joint output state of the CHC operation on |φ₁⟩ ⊗ |φ₂⟩.
pub fn apply_chc(phi1: &PureQubitState, phi2: &PureQubitState) -> Result<StateVector> {
    let input = linalg::kron_states(&phi1.to_vector(), &phi2.to_vector())?;
    linalg::apply_unitary(&chc_unitary(), &input)
}

/// Measurement outcome on the target and the resulting control state.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CondensationResult {
    pub outcome: Outcome,
    pub probability: f64,
    pub condensed: PureQubitState,
    pub condensed_label: Option<Bb84Label>,
}

/// Measures qubit 2 in σ_z and returns the renormalized state of qubit 1.
pub fn condense(joint: &StateVector, branch: Branch<'_>) -> Result<CondensationResult> {
    let record = linalg::project_measure(joint, 2, branch)?;
    let o = record.outcome.index();
    let c = &record.collapsed;
    // After the projection only |0o⟩ and |1o⟩ survive.
    let condensed = PureQubitState::normalized(c.amp(o), c.amp(2 + o))?;
    Ok(CondensationResult {
        outcome: record.outcome,
        probability: record.probability,
        condensed,
        condensed_label: Bb84Label::nearest(&condensed),
    })
}

use Bb84Label::{MinusX as MX, MinusZ as MZ, PlusX as PX, PlusZ as PZ};

/// `TABLES[outcome][φ₂][φ₁]`, indices in [`Bb84Label::ALL`] order.
const TABLES: [[[Bb84Label; 4]; 4]; 2] = [
    [[PZ, MZ, MX, PX], [MZ, PZ, PX, MX], [PX, MX, PZ, MZ], [MX, PX, MZ, PZ]],
    [[MZ, PZ, PX, MX], [PZ, MZ, MX, PX], [PX, MX, PZ, MZ], [MX, PX, MZ, PZ]],
];

/// Condensed control label for BB84 inputs and a target outcome.
pub fn truth_table(phi1: Bb84Label, phi2: Bb84Label, outcome: Outcome) -> Bb84Label {
    TABLES[outcome.index()][phi2.index()][phi1.index()]
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TruthTableMismatch {
    pub phi1: Bb84Label,
    pub phi2: Bb84Label,
    pub outcome: Outcome,
    pub table: Bb84Label,
    pub computed: Option<Bb84Label>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TruthTableReport {
    pub cases: usize,
    pub mismatches: Vec<TruthTableMismatch>,
    /// Largest phase-aligned amplitude deviation between the condensed
    /// state and the tabulated label's state.
    pub max_deviation: f64,
}

/// Recomputes every table entry through [`apply_chc`] and [`condense`].
pub fn verify_truth_tables() -> TruthTableReport {
    let mut report = TruthTableReport { cases: 0, mismatches: Vec::new(), max_deviation: 0.0 };
    for phi2 in Bb84Label::ALL {
        for phi1 in Bb84Label::ALL {
            let joint = apply_chc(&phi1.state(), &phi2.state()).expect("BB84 inputs are normalized");
            for outcome in Outcome::BOTH {
                report.cases += 1;
                let table = truth_table(phi1, phi2, outcome);
                let computed = condense(&joint, Branch::Forced(outcome)).ok();
                let deviation = computed.as_ref().map_or(f64::INFINITY, |c| c.condensed.phase_distance(&table.state()));
                report.max_deviation = report.max_deviation.max(deviation);
                let label = computed.and_then(|c| c.condensed_label);
                if label != Some(table) {
                    report.mismatches.push(TruthTableMismatch { phi1, phi2, outcome, table, computed: label });
                }
            }
        }
    }
    report
}

/// Outcome selection for a run of recursive rounds.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OutcomePolicy {
    /// One outcome per round.
    Forced(Vec<Outcome>),
    /// Outcomes sampled from a ChaCha8 stream with this seed.
    Seeded(u64),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RoundRecord {
    pub target_input: PureQubitState,
    pub outcome: Outcome,
    pub probability: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QspaTranscript {
    pub rounds: Vec<RoundRecord>,
    #[serde(rename = "final")]
    pub final_state: PureQubitState,
}

impl QspaTranscript {
    /// Probability of the recorded outcome string.
    pub fn path_probability(&self) -> f64 {
        self.rounds.iter().map(|r| r.probability).product()
    }
}

/// Folds the CHC step left to right: the retained control of one round is
/// the control of the next, and the next list element is the target.
pub fn recursive_qspa(states: &[PureQubitState], policy: &OutcomePolicy) -> Result<QspaTranscript> {
    let Some((first, targets)) = states.split_first().filter(|(_, rest)| !rest.is_empty()) else {
        return Err(Error::InvalidArgument(format!("recursive QSPA needs at least 2 states, got {}", states.len())));
    };
    let mut rng = match policy {
        OutcomePolicy::Forced(bits) => {
            if bits.len() != targets.len() {
                return Err(Error::InvalidArgument(format!(
                    "expected {} forced outcomes, got {}",
                    targets.len(),
                    bits.len()
                )));
            }
            None
        }
        OutcomePolicy::Seeded(seed) => Some(ChaCha8Rng::seed_from_u64(*seed)),
    };
    let mut control = *first;
    let mut rounds = Vec::with_capacity(targets.len());
    for (k, target) in targets.iter().enumerate() {
        let joint = apply_chc(&control, target)?;
        let branch = match (&mut rng, policy) {
            (Some(rng), _) => Branch::Sample(rng),
            (None, OutcomePolicy::Forced(bits)) => Branch::Forced(bits[k]),
            (None, OutcomePolicy::Seeded(_)) => unreachable!("seeded policy always has an rng"),
        };
        let step = condense(&joint, branch)?;
        rounds.push(RoundRecord { target_input: *target, outcome: step.outcome, probability: step.probability });
        control = step.condensed;
    }
    Ok(QspaTranscript { rounds, final_state: control })
}
