// Applies CNOT · (H ⊗ I) · CNOT to two qubits and condenses the result
// onto the control by measuring the target.

use qspa::linalg::{Branch, Outcome};
use qspa::protocol::{apply_chc, condense, PureQubitState};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let t = 15f64.to_radians();
    let pairs = [
        ("|0>, |1>", PureQubitState::zero(), PureQubitState::one()),
        ("general", PureQubitState::from_real(3f64.sqrt() / 2.0, 0.5)?, PureQubitState::from_real(t.cos(), t.sin())?),
    ];
    for (name, phi1, phi2) in pairs {
        let joint = apply_chc(&phi1, &phi2)?;
        let amps: Vec<String> = joint.amplitudes().iter().map(|z| format!("{:+.4}", z.re)).collect();
        println!("{name}: joint amplitudes [{}]", amps.join(", "));
        for outcome in Outcome::BOTH {
            let c = condense(&joint, Branch::Forced(outcome))?;
            let (a, b) = (c.condensed.a(), c.condensed.b());
            let label = c.condensed_label.map_or("-".to_string(), |l| l.to_string());
            println!(
                "  outcome {outcome} (p = {:.4}): control = ({:.4}, {:.4}) label {label}",
                c.probability, a.re, b.re
            );
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
