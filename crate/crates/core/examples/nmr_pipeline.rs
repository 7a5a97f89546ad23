// The full pulse-level experiment: pseudopure preparation, input-state
// rotations, the QSPA pulse sequence and comparison with the circuit.

use qspa::linalg::pure_state_fidelity;
use qspa::nmr::{
    effective_state, prepare_input_state, pseudopure_prep, qspa_pulse_sequence, run_sequence, QspaMode, SpinSystem,
};
use qspa::protocol::{apply_chc, PureQubitState};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let sys = SpinSystem::default();
    let prep = pseudopure_prep(&sys)?;
    let t = 15f64.to_radians();
    let inputs = [
        (PureQubitState::zero(), PureQubitState::one()),
        (PureQubitState::from_real(3f64.sqrt() / 2.0, 0.5)?, PureQubitState::from_real(t.cos(), t.sin())?),
    ];
    for (phi1, phi2) in inputs {
        let rho_in = run_sequence(&prepare_input_state(&phi1, &phi2)?, &prep.final_state, &sys)?;
        let rho_out = run_sequence(&qspa_pulse_sequence(QspaMode::VerifiedDefault), &rho_in, &sys)?;
        let rho = effective_state(&rho_out)?;
        let pops: Vec<String> = (0..4).map(|i| format!("{:.6}", rho.entry(i, i).re)).collect();
        let f = pure_state_fidelity(&rho, &apply_chc(&phi1, &phi2)?)?;
        println!("populations [{}], fidelity {f:.9}", pops.join(", "));
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
