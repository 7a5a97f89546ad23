//! Adversary guessing statistics over the BB84 ensemble.
//!
//! Inputs are i.i.d. uniform over the four BB84 labels. For `r` rounds the
//! sequence holds `r + 1` labels (the initial control and `r` targets) and
//! the protocol produces `r` target outcomes. The adversary sees the parts
//! named by a [`KnowledgeModel`] and guesses the final condensed label by
//! maximum a posteriori; the guess probability is the exact ensemble average
//! of that strategy's success, obtained by enumerating every case.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{Branch, Outcome};
use crate::protocol::{apply_chc, condense, truth_table, Bb84Label};

/// Largest round count accepted by the enumeration.
pub const MAX_ROUNDS: usize = 8;

/// Which input labels the adversary knows.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum InputKnowledge {
    None,
    /// The initial control qubit.
    ControlOnly,
    /// Every target qubit.
    TargetOnly,
    All,
}

impl std::str::FromStr for InputKnowledge {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Self::None),
            "control" | "control-only" => Ok(Self::ControlOnly),
            "target" | "target-only" => Ok(Self::TargetOnly),
            "all" => Ok(Self::All),
            other => Err(Error::InvalidArgument(format!("unknown knowledge model '{other}'"))),
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct KnowledgeModel {
    pub knows_inputs: InputKnowledge,
    pub knows_outcomes: bool,
}

impl KnowledgeModel {
    pub fn new(knows_inputs: InputKnowledge, knows_outcomes: bool) -> Self {
        Self { knows_inputs, knows_outcomes }
    }

    fn knows_label(&self, position: usize) -> bool {
        match self.knows_inputs {
            InputKnowledge::None => false,
            InputKnowledge::ControlOnly => position == 0,
            InputKnowledge::TargetOnly => position > 0,
            InputKnowledge::All => true,
        }
    }
}

/// How a single enumeration case is evaluated.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnumerationPath {
    /// Fold the truth tables; every outcome has probability 1/2.
    TruthTable,
    /// Run the state-vector protocol and use the actual branch
    /// probabilities.
    Algebraic,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LeakageReport {
    pub rounds: usize,
    pub guess_probability: f64,
    /// Marginal distribution of the final condensed label.
    pub distribution: BTreeMap<Bb84Label, f64>,
    pub method: &'static str,
}

/// Exact (outcome, condensed label) distribution for one BB84 input pair.
pub fn outcome_distribution(phi1: Bb84Label, phi2: Bb84Label) -> BTreeMap<(Outcome, Bb84Label), f64> {
    let joint = apply_chc(&phi1.state(), &phi2.state()).expect("BB84 states are normalized");
    let mut out = BTreeMap::new();
    for outcome in Outcome::BOTH {
        let c = condense(&joint, Branch::Forced(outcome)).expect("BB84 outcomes are equiprobable");
        let label = c.condensed_label.expect("BB84 inputs condense to a BB84 state");
        *out.entry((outcome, label)).or_insert(0.0) += c.probability;
    }
    out
}

/// Guess probability using the truth-table path.
pub fn guess_probability(model: KnowledgeModel, rounds: usize) -> Result<LeakageReport> {
    guess_probability_via(model, rounds, EnumerationPath::TruthTable)
}

pub fn guess_probability_via(model: KnowledgeModel, rounds: usize, path: EnumerationPath) -> Result<LeakageReport> {
    if rounds == 0 || rounds > MAX_ROUNDS {
        return Err(Error::InvalidArgument(format!("rounds must be in 1..={MAX_ROUNDS}, got {rounds}")));
    }
    let layout = Layout::new(model, rounds);
    let (guess, dist) = match path {
        EnumerationPath::TruthTable => layout.enumerate(|labels, outcomes| {
            let final_label = outcomes
                .iter()
                .zip(&labels[1..])
                .fold(labels[0], |control, (&o, &target)| truth_table(control, target, o));
            (0.5f64.powi(outcomes.len() as i32), final_label)
        }),
        EnumerationPath::Algebraic => layout.enumerate(|labels, outcomes| {
            let mut control = labels[0].state();
            let mut weight = 1.0;
            for (&o, target) in outcomes.iter().zip(&labels[1..]) {
                let joint = apply_chc(&control, &target.state()).expect("normalized inputs");
                let c = condense(&joint, Branch::Forced(o)).expect("BB84 outcomes have probability 1/2");
                weight *= c.probability;
                control = c.condensed;
            }
            (weight, Bb84Label::nearest(&control).expect("BB84 closure"))
        }),
    };
    Ok(LeakageReport {
        rounds,
        guess_probability: guess,
        distribution: Bb84Label::ALL.into_iter().zip(dist).collect(),
        method: "exhaustive-enumeration",
    })
}

/// Guess probability for 1..=max_rounds rounds.
pub fn leakage_curve(model: KnowledgeModel, max_rounds: usize) -> Result<Vec<LeakageReport>> {
    if max_rounds == 0 || max_rounds > MAX_ROUNDS {
        return Err(Error::InvalidArgument(format!("max rounds must be in 1..={MAX_ROUNDS}, got {max_rounds}")));
    }
    (1..=max_rounds).map(|r| guess_probability(model, r)).collect()
}

/// Splits the case space into what the adversary sees (the view) and what
/// stays hidden.
struct Layout {
    rounds: usize,
    known_labels: Vec<usize>,
    hidden_labels: Vec<usize>,
    outcomes_known: bool,
}

const VIEWS_PER_CHUNK: usize = 1024;

impl Layout {
    fn new(model: KnowledgeModel, rounds: usize) -> Self {
        let (known_labels, hidden_labels) = (0..=rounds).partition(|&p| model.knows_label(p));
        Self { rounds, known_labels, hidden_labels, outcomes_known: model.knows_outcomes }
    }

    fn outcome_count(&self) -> usize {
        1 << self.rounds
    }

    fn views(&self) -> usize {
        let o = if self.outcomes_known { self.outcome_count() } else { 1 };
        o * 4usize.pow(self.known_labels.len() as u32)
    }

    fn hidden(&self) -> usize {
        let o = if self.outcomes_known { 1 } else { self.outcome_count() };
        o * 4usize.pow(self.hidden_labels.len() as u32)
    }

    fn decode(&self, view: usize, hidden: usize, labels: &mut [Bb84Label], outcomes: &mut [Outcome]) {
        let (mut v, mut h) = (view, hidden);
        let (outcome_bits, rest_v, rest_h) = if self.outcomes_known {
            (v % self.outcome_count(), v / self.outcome_count(), h)
        } else {
            (h % self.outcome_count(), v, h / self.outcome_count())
        };
        for (k, o) in outcomes.iter_mut().enumerate() {
            *o = if (outcome_bits >> k) & 1 == 1 { Outcome::One } else { Outcome::Zero };
        }
        v = rest_v;
        h = rest_h;
        for &p in &self.known_labels {
            labels[p] = Bb84Label::from_index(v % 4);
            v /= 4;
        }
        for &p in &self.hidden_labels {
            labels[p] = Bb84Label::from_index(h % 4);
            h /= 4;
        }
    }

    /// Sum over views of the best label's joint probability, plus the
    /// marginal label distribution. `case` returns the outcome-string
    /// probability given the labels and the final label.
    ///
    /// Views are processed in fixed-size chunks whose partial sums are added
    /// in chunk order, so the result does not depend on thread scheduling.
    fn enumerate<F>(&self, case: F) -> (f64, [f64; 4])
    where
        F: Fn(&[Bb84Label], &[Outcome]) -> (f64, Bb84Label) + Sync,
    {
        let views = self.views();
        let hidden = self.hidden();
        let label_weight = 0.25f64.powi(self.rounds as i32 + 1);
        let chunks: Vec<(f64, [f64; 4])> = (0..views.div_ceil(VIEWS_PER_CHUNK))
            .into_par_iter()
            .map(|chunk| {
                let mut labels = vec![Bb84Label::PlusZ; self.rounds + 1];
                let mut outcomes = vec![Outcome::Zero; self.rounds];
                let mut guess = 0.0;
                let mut marginal = [0.0; 4];
                let end = ((chunk + 1) * VIEWS_PER_CHUNK).min(views);
                for view in chunk * VIEWS_PER_CHUNK..end {
                    let mut posterior = [0.0; 4];
                    for h in 0..hidden {
                        self.decode(view, h, &mut labels, &mut outcomes);
                        let (w, label) = case(&labels, &outcomes);
                        posterior[label.index()] += w * label_weight;
                    }
                    // MAP guess; on ties the first label in fixed order wins,
                    // which does not change the value.
                    guess += posterior.iter().copied().fold(0.0, f64::max);
                    for (m, p) in marginal.iter_mut().zip(posterior) {
                        *m += p;
                    }
                }
                (guess, marginal)
            })
            .collect();
        chunks.into_iter().fold((0.0, [0.0; 4]), |(g, mut m), (cg, cm)| {
            for (a, b) in m.iter_mut().zip(cm) {
                *a += b;
            }
            (g + cg, m)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use InputKnowledge::*;

    const MODELS: [InputKnowledge; 4] = [None, ControlOnly, TargetOnly, All];

    /// Independent brute force: real-amplitude condensation algebra, explicit
    /// nested loops over one round, no crate protocol code.
    fn one_round_oracle(model: KnowledgeModel) -> f64 {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let states = [(1.0, 0.0), (0.0, 1.0), (r, r), (r, -r)];
        let label_of = |a: f64, b: f64| -> usize {
            let n = (a * a + b * b).sqrt();
            states.iter().position(|&(x, y)| ((x * a + y * b) / n).abs() > 1.0 - 1e-9).unwrap()
        };
        // joint[l1][l2][o] = (p, label)
        let mut views: BTreeMap<(Option<usize>, Option<usize>, Option<usize>), [f64; 4]> = BTreeMap::new();
        for (l1, &(a1, b1)) in states.iter().enumerate() {
            for (l2, &(a2, b2)) in states.iter().enumerate() {
                let branches = [(a1 * a2 + b1 * b2, a1 * b2 - b1 * a2), (a1 * b2 + b1 * a2, a1 * a2 - b1 * b2)];
                for (o, (c0, c1)) in branches.into_iter().enumerate() {
                    let p = (c0 * c0 + c1 * c1) / 2.0;
                    let key = (
                        model.knows_label(0).then_some(l1),
                        model.knows_label(1).then_some(l2),
                        model.knows_outcomes.then_some(o),
                    );
                    views.entry(key).or_insert([0.0; 4])[label_of(c0, c1)] += p / 16.0;
                }
            }
        }
        views.values().map(|d| d.iter().copied().fold(0.0, f64::max)).sum()
    }

    #[test]
    fn outcome_distribution_examples() {
        use Bb84Label::*;
        let d = outcome_distribution(PlusZ, MinusZ);
        assert_eq!(d.len(), 2);
        assert!((d[&(Outcome::Zero, MinusZ)] - 0.5).abs() < 1e-12);
        assert!((d[&(Outcome::One, PlusZ)] - 0.5).abs() < 1e-12);
        let d = outcome_distribution(PlusX, PlusX);
        // Tables 1 and 2 agree on the ±x rows: both outcomes give +z.
        assert!((d[&(Outcome::Zero, PlusZ)] - 0.5).abs() < 1e-12);
        assert!((d[&(Outcome::One, PlusZ)] - 0.5).abs() < 1e-12);
        for a in Bb84Label::ALL {
            for b in Bb84Label::ALL {
                assert!((outcome_distribution(a, b).values().sum::<f64>() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn one_round_matches_brute_force_oracle() {
        // Frozen from the oracle. Full input knowledge wins outright when the
        // target is ±x (both tables agree there) and half the time when it
        // is ±z.
        let frozen = [(None, false, 0.25), (ControlOnly, false, 0.25), (TargetOnly, false, 0.25), (All, false, 0.75)];
        for (k, o, want) in frozen {
            assert!((one_round_oracle(KnowledgeModel::new(k, o)) - want).abs() < 1e-12);
        }
        for k in MODELS {
            for o in [false, true] {
                let m = KnowledgeModel::new(k, o);
                let oracle = one_round_oracle(m);
                let table = guess_probability(m, 1).unwrap().guess_probability;
                assert!((oracle - table).abs() < 1e-12, "{m:?}: {oracle} vs {table}");
            }
        }
    }

    #[test]
    fn endpoints() {
        let all = KnowledgeModel::new(All, false);
        assert_eq!(guess_probability(all, 1).unwrap().guess_probability, 0.75);
        for r in 1..=4 {
            let report = guess_probability(KnowledgeModel::new(All, true), r).unwrap();
            assert_eq!(report.guess_probability, 1.0);
        }
    }

    #[test]
    fn frozen_small_curves() {
        for k in MODELS {
            for o in [false, true] {
                let m = KnowledgeModel::new(k, o);
                let curve = leakage_curve(m, 4).unwrap();
                for (r, rep) in (1..).zip(&curve) {
                    let want = match (k, o) {
                        (All, true) => 1.0,
                        (All, false) => 0.5 + 0.5f64.powi(r + 1),
                        _ => 0.25,
                    };
                    assert!((rep.guess_probability - want).abs() < 1e-12, "{m:?} r={r}");
                }
            }
        }
    }

    #[test]
    fn dual_paths_agree_up_to_three_rounds() {
        for k in MODELS {
            for o in [false, true] {
                let m = KnowledgeModel::new(k, o);
                for r in 1..=3 {
                    let a = guess_probability_via(m, r, EnumerationPath::TruthTable).unwrap();
                    let b = guess_probability_via(m, r, EnumerationPath::Algebraic).unwrap();
                    assert!((a.guess_probability - b.guess_probability).abs() < 1e-12);
                    for l in Bb84Label::ALL {
                        assert!((a.distribution[&l] - b.distribution[&l]).abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn curves_stay_in_bounds_and_normalize() {
        for k in MODELS {
            for o in [false, true] {
                let curve = leakage_curve(KnowledgeModel::new(k, o), 4).unwrap();
                assert_eq!(curve.len(), 4);
                for rep in curve {
                    assert!((0.25..=1.0).contains(&rep.guess_probability));
                    assert!((rep.distribution.values().sum::<f64>() - 1.0).abs() < 1e-12);
                    assert_eq!(rep.method, "exhaustive-enumeration");
                }
            }
        }
    }

    #[test]
    fn bounds_are_enforced() {
        let m = KnowledgeModel::new(None, false);
        assert!(guess_probability(m, 0).is_err());
        assert!(guess_probability(m, MAX_ROUNDS + 1).is_err());
        assert!(leakage_curve(m, 9).is_err());
        assert!(leakage_curve(m, 0).is_err());
    }

    #[test]
    fn chunked_enumeration_is_order_independent() {
        let m = KnowledgeModel::new(ControlOnly, true);
        let a = guess_probability_via(m, 3, EnumerationPath::Algebraic).unwrap();
        let b = guess_probability_via(m, 3, EnumerationPath::Algebraic).unwrap();
        assert_eq!(a, b);
    }
}
