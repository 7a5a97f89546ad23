// Exhaustive guess probabilities for an adversary who knows some of the
// BB84 inputs, with and without the announced outcomes.

use qspa::adversary::{guess_probability_via, leakage_curve, EnumerationPath, InputKnowledge, KnowledgeModel};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let inputs = [InputKnowledge::None, InputKnowledge::ControlOnly, InputKnowledge::TargetOnly, InputKnowledge::All];
    for knows_outcomes in [false, true] {
        println!("outcomes known: {knows_outcomes}");
        for knows in inputs {
            let model = KnowledgeModel::new(knows, knows_outcomes);
            let curve: Vec<String> =
                leakage_curve(model, 4)?.iter().map(|r| format!("{:.4}", r.guess_probability)).collect();
            println!("  {knows:?}: {}", curve.join(" "));
        }
    }

    let model = KnowledgeModel::new(InputKnowledge::All, false);
    let table = guess_probability_via(model, 2, EnumerationPath::TruthTable)?;
    let algebra = guess_probability_via(model, 2, EnumerationPath::Algebraic)?;
    println!(
        "two rounds via tables {:.12}, via state vectors {:.12}",
        table.guess_probability, algebra.guess_probability
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
