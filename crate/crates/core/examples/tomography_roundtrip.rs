// Simulates the nine readout experiments on a known state, reconstructs
// it by linear inversion and stores the result as a density-matrix file.

use qspa::cli::{DensityMatrixFile, Metadata};
use qspa::linalg::{max_abs_diff, pure_state_fidelity};
use qspa::protocol::{apply_chc, PureQubitState};
use qspa::tomography::{add_noise, figure_data, reconstruct, simulate_all, BASIS_LABELS};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let t = 15f64.to_radians();
    let psi =
        apply_chc(&PureQubitState::from_real(3f64.sqrt() / 2.0, 0.5)?, &PureQubitState::from_real(t.cos(), t.sin())?)?;
    let truth = psi.to_density()?;

    let clean = simulate_all(&truth)?;
    let exact = reconstruct(&clean)?;
    println!(
        "{} experiments, condition number {:.6}, max error {:e}",
        clean.len(),
        exact.condition_number,
        max_abs_diff(exact.rho.matrix(), truth.matrix())
    );

    let noisy = reconstruct(&add_noise(&clean, 0.01, 5)?)?;
    println!("sigma 0.01: fidelity {:.6}, residual {:.3e}", pure_state_fidelity(&noisy.rho, &psi)?, noisy.residual);

    let fig = figure_data(&noisy.rho)?;
    for (r, label) in BASIS_LABELS.iter().enumerate() {
        let row: Vec<String> = (0..4).map(|c| format!("{:+.3}", fig.at(r, c).0)).collect();
        println!("  {label}: {}", row.join(" "));
    }

    let text = DensityMatrixFile::from_density(&noisy.rho, Metadata::new("tomography example", "none")).to_json();
    let back = DensityMatrixFile::parse(&text)?;
    println!("file round trip exact: {}", back.matrix() == *noisy.rho.matrix());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
