// Runs several CHC rounds in sequence, feeding each condensed control
// into the next round with a fresh target.

use qspa::linalg::Outcome;
use qspa::protocol::{recursive_qspa, Bb84Label, OutcomePolicy};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let labels = [Bb84Label::PlusZ, Bb84Label::MinusX, Bb84Label::PlusX, Bb84Label::MinusZ, Bb84Label::PlusZ];
    let states: Vec<_> = labels.iter().map(|l| l.state()).collect();

    let sampled = recursive_qspa(&states, &OutcomePolicy::Seeded(7))?;
    for (k, r) in sampled.rounds.iter().enumerate() {
        println!("round {}: outcome {} with probability {:.3}", k + 1, r.outcome, r.probability);
    }
    let label = Bb84Label::nearest(&sampled.final_state).map_or("-".to_string(), |l| l.to_string());
    println!("final control {label}, path probability {:.4}", sampled.path_probability());

    let forced = recursive_qspa(&states, &OutcomePolicy::Forced(vec![Outcome::Zero; 4]))?;
    let label = Bb84Label::nearest(&forced.final_state).map_or("-".to_string(), |l| l.to_string());
    println!("all-zero outcomes: final control {label}");
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
