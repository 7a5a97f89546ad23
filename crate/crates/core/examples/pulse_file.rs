// Writes a pulse sequence in the text format, reads it back and checks
// that both copies evolve the spins identically.

use qspa::linalg::max_abs_diff;
use qspa::nmr::{cnot_pulse_sequence, sequence_unitary, PulseEvent, PulseSequence, SpinSystem};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let seq = cnot_pulse_sequence();
    let text = seq.to_text();
    print!("{text}");

    let parsed: PulseSequence = text.parse()?;
    let sys = SpinSystem::default();
    let diff = max_abs_diff(&sequence_unitary(&seq, &sys)?, &sequence_unitary(&parsed, &sys)?);
    println!("events {}, identical {}, unitary difference {diff:e}", parsed.len(), parsed == seq);

    let custom: PulseSequence = "# label: custom\nrot spins=1 axis=x angle=pi/2\ndelay t=1/(2J)\n".parse()?;
    for e in &custom.events {
        if let PulseEvent::Delay(d) = e {
            println!("{}: {e} lasts {:.6e} s", custom.label, d.seconds(&sys));
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
