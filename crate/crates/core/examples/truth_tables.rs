// Prints the BB84 condensation tables and rechecks every entry against
// the state-vector algebra.

use qspa::linalg::Outcome;
use qspa::protocol::{truth_table, verify_truth_tables, Bb84Label};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    for outcome in Outcome::BOTH {
        println!("outcome {outcome}   phi1: +z -z +x -x");
        for phi2 in Bb84Label::ALL {
            let row: Vec<String> =
                Bb84Label::ALL.iter().map(|&phi1| format!("{:>2}", truth_table(phi1, phi2, outcome))).collect();
            println!("  phi2 = {phi2:>2}          {}", row.join(" "));
        }
    }
    let report = verify_truth_tables();
    println!(
        "{} cases, {} mismatches, max deviation {:e}",
        report.cases,
        report.mismatches.len(),
        report.max_deviation
    );
    if !report.mismatches.is_empty() {
        return Err("truth table mismatch".into());
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
