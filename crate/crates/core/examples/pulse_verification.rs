// Checks that the compiled pulse sequences implement their gates, up to
// the phases an NMR experiment cannot see.

use qspa::linalg::gates;
use qspa::nmr::{
    cnot_pulse_sequence, equivalent_up_to_phase, qspa_pulse_sequence, sequence_unitary, PhaseFreedom, QspaMode,
    SpinSystem,
};
use qspa::protocol::chc_unitary;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let sys = SpinSystem::default();

    let u = sequence_unitary(&cnot_pulse_sequence(), &sys)?;
    let report = equivalent_up_to_phase(&gates::cnot(), &u, PhaseFreedom::GlobalOnly)?;
    println!("cnot: verdict {} residual {:e} phases {:?}", report.verdict, report.max_deviation, report.fitted_phases);

    for mode in [QspaMode::VerifiedDefault, QspaMode::PaperLiteral] {
        let seq = qspa_pulse_sequence(mode);
        let u = sequence_unitary(&seq, &sys)?;
        let report = equivalent_up_to_phase(&chc_unitary(), &u, PhaseFreedom::GlobalPlusZ)?;
        println!("qspa {mode} ({} events): verdict {} residual {:e}", seq.len(), report.verdict, report.max_deviation);
    }

    let offsets = SpinSystem { nu1: 1234.5, nu2: -310.0, ..sys };
    let u = sequence_unitary(&qspa_pulse_sequence(QspaMode::VerifiedDefault), &offsets)?;
    let report = equivalent_up_to_phase(&chc_unitary(), &u, PhaseFreedom::GlobalPlusZ)?;
    println!("with chemical-shift offsets: verdict {} residual {:e}", report.verdict, report.max_deviation);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
