// Prepares the |00> pseudopure state from thermal equilibrium by spatial
// averaging and prints the product-operator state after every step.

use qspa::nmr::{pseudopure_prep, pseudopure_target, transverse_coefficients, SpinSystem};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let sys = SpinSystem::default();
    let run = pseudopure_prep(&sys)?;
    println!("first pulse angle: {:.6} rad", run.config.theta);
    print!("{}", run.replay_log(sys.gamma_c));

    let t = transverse_coefficients(&sys);
    println!(
        "transverse term before the first gradient: exact {:.6}, dimensionless {:.6}",
        t.exact / sys.gamma_c,
        t.printed
    );

    let last = &run.intermediates.last().ok_or("empty preparation")?.expansion;
    println!(
        "distance from target in units of gamma_c: {:e}",
        last.max_abs_diff(&pseudopure_target(&sys)) / sys.gamma_c
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
