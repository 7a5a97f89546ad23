//! Front end behind the `qspa` binary.
//!
//! Exit codes: 0 on success, 1 for invalid input, 2 when a verification
//! fails.

mod config;
mod files;

pub use config::{Format, Overrides, RunConfig};
pub use files::{DensityMatrixFile, Metadata, TOOL_VERSION};

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use crate::adversary::{leakage_curve, InputKnowledge, KnowledgeModel, MAX_ROUNDS};
use crate::error::{Error, Result};
use crate::linalg::{fidelity, gates, max_abs_diff, pure_state_fidelity, Branch, Matrix, Outcome, StateVector, C64};
use crate::nmr::{
    cnot_pulse_sequence, effective_state, equivalent_up_to_phase, prepare_input_state, pseudopure_prep,
    qspa_pulse_sequence, run_sequence, sequence_unitary, PhaseFreedom, PulseSequence, QspaMode,
};
use crate::protocol::{apply_chc, chc_unitary, condense, truth_table, verify_truth_tables, Bb84Label, PureQubitState};
use crate::tomography::{self, add_noise, figure_data, reconstruct, simulate_all, write_records_csv, FigureData};

const NORM_TOLERANCE: f64 = 1e-6;

#[derive(Parser, Debug)]
#[command(name = "qspa", version, about = "CHC quantum state privacy amplification simulator")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct GlobalArgs {
    /// Seed for every sampling path.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Flat `key = value` configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Format of figure data files.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Pulse sequence file used instead of the built-in sequence.
    #[arg(long, global = true)]
    sequence: Option<PathBuf>,
    /// Chemical-shift offset of spin 1 in Hz.
    #[arg(long, global = true, allow_hyphen_values = true)]
    nu1: Option<f64>,
    /// Chemical-shift offset of spin 2 in Hz.
    #[arg(long, global = true, allow_hyphen_values = true)]
    nu2: Option<f64>,
    /// Scalar coupling in Hz.
    #[arg(long, global = true)]
    j12: Option<f64>,
    /// Gyromagnetic ratio of spin 1.
    #[arg(long, global = true)]
    gamma_c: Option<f64>,
    /// Gyromagnetic ratio of spin 2.
    #[arg(long, global = true)]
    gamma_h: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Apply the CHC operation to two inputs and condense.
    Chc {
        /// BB84 label (+z, -z, +x, -x) or real amplitudes "a,b".
        #[arg(long, allow_hyphen_values = true)]
        in1: String,
        #[arg(long, allow_hyphen_values = true)]
        in2: String,
        /// Target outcome 0 or 1; sampled from the seed when absent.
        #[arg(long)]
        outcome: Option<u8>,
    },
    /// Write both truth tables as CSV.
    TruthTable,
    /// Pulse-level run: pseudopure preparation, input preparation, QSPA.
    NmrRun {
        #[arg(long, allow_hyphen_values = true, default_value = "1,0")]
        in1: String,
        #[arg(long, allow_hyphen_values = true, default_value = "0,1")]
        in2: String,
        #[arg(long, default_value = "verified-default")]
        mode: String,
    },
    /// Check a pulse sequence against its target gate.
    Verify {
        /// cnot or qspa.
        target: String,
        #[arg(long, default_value = "verified-default")]
        mode: String,
        /// global-only or global-plus-z; defaults to global-only for cnot
        /// and global-plus-z for qspa.
        #[arg(long)]
        freedoms: Option<String>,
    },
    /// Adversary guess probability against the number of rounds.
    Leakage {
        /// none, control, target or all.
        #[arg(long, default_value = "all")]
        model: String,
        #[arg(long)]
        knows_outcomes: bool,
        #[arg(long, default_value_t = 4)]
        max_rounds: usize,
    },
    /// Simulated tomography and linear-inversion reconstruction.
    Tomo {
        /// fig3, fig4, fig5, fig6 or a density-matrix JSON file.
        #[arg(long, default_value = "fig4")]
        source: String,
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
    },
}

enum Failure {
    Invalid(Error),
    Verification(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Self::Invalid(e)
    }
}

type CmdResult = std::result::Result<(), Failure>;

struct Context<'a> {
    cfg: RunConfig,
    sequence: Option<PulseSequence>,
    out: &'a mut dyn Write,
}

impl Context<'_> {
    fn path(&self, name: &str) -> PathBuf {
        self.cfg.output_dir.join(name)
    }

    fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        let path = self.path(name);
        fs::write(&path, contents)?;
        let _ = writeln!(self.out, "wrote {}", path.display());
        Ok(())
    }

    fn say(&mut self, line: impl AsRef<str>) {
        let _ = writeln!(self.out, "{}", line.as_ref());
    }

    fn write_json(&mut self, name: &str, value: &impl Serialize) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(name, &text)
    }

    fn write_density(&mut self, name: &str, m: &Matrix, op: &str) -> Result<()> {
        let meta = Metadata::new(op, self.cfg.hash(op));
        self.write(name, &DensityMatrixFile::from_matrix(m, meta).to_json())
    }

    fn write_figure(&mut self, stem: &str, fig: &FigureData) -> Result<()> {
        let text = match self.cfg.format {
            Format::Json => serde_json::to_string_pretty(fig)? + "\n",
            Format::Csv => fig.to_csv()?,
        };
        self.write(&format!("{stem}.{}", self.cfg.format.extension()), &text)
    }
}

/// Parses arguments and runs one command, printing to stdout and stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with(args, &mut std::io::stdout(), &mut std::io::stderr())
}

pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                1
            } else {
                let _ = write!(out, "{text}");
                0
            };
        }
    };
    match execute(cli, out) {
        Ok(()) => 0,
        Err(Failure::Invalid(e)) => {
            let _ = writeln!(err, "error: {e}");
            1
        }
        Err(Failure::Verification(msg)) => {
            let _ = writeln!(err, "verification failed: {msg}");
            2
        }
    }
}

fn execute(cli: Cli, out: &mut dyn Write) -> CmdResult {
    let g = cli.global;
    let file = match &g.config {
        Some(p) => Overrides::parse(&read(p)?)?,
        None => Overrides::default(),
    };
    let flags = Overrides {
        seed: g.seed,
        output_dir: g.out,
        format: g.format,
        nu1: g.nu1,
        nu2: g.nu2,
        j12: g.j12,
        gamma_c: g.gamma_c,
        gamma_h: g.gamma_h,
    };
    let cfg = flags.or(file).resolve()?;
    fs::create_dir_all(&cfg.output_dir).map_err(Error::from)?;
    let sequence = g.sequence.as_deref().map(|p| PulseSequence::parse(&read(p)?)).transpose()?;
    let mut ctx = Context { cfg, sequence, out };
    match cli.command {
        Command::Chc { in1, in2, outcome } => cmd_chc(&mut ctx, &in1, &in2, outcome),
        Command::TruthTable => cmd_truth_table(&mut ctx),
        Command::NmrRun { in1, in2, mode } => cmd_nmr_run(&mut ctx, &in1, &in2, &mode),
        Command::Verify { target, mode, freedoms } => cmd_verify(&mut ctx, &target, &mode, freedoms.as_deref()),
        Command::Leakage { model, knows_outcomes, max_rounds } => {
            cmd_leakage(&mut ctx, &model, knows_outcomes, max_rounds)
        }
        Command::Tomo { source, noise } => cmd_tomo(&mut ctx, &source, noise),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::InvalidArgument(format!("cannot read {}: {e}", path.display())))
}

/// A BB84 label or "a,b" with real amplitudes normalized to within 1e-6.
pub fn parse_qubit(s: &str) -> Result<PureQubitState> {
    if let Ok(label) = s.parse::<Bb84Label>() {
        if !s.contains(',') {
            return Ok(label.state());
        }
    }
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let [a, b] = parts.as_slice() else {
        return Err(Error::InvalidArgument(format!("expected a BB84 label or 'a,b', got '{s}'")));
    };
    let num = |v: &str| {
        v.parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .ok_or_else(|| Error::InvalidArgument(format!("invalid amplitude '{v}' in '{s}'")))
    };
    let (a, b) = (num(a)?, num(b)?);
    let deviation = (a * a + b * b - 1.0).abs();
    if deviation > NORM_TOLERANCE {
        return Err(Error::NotNormalized { deviation });
    }
    PureQubitState::normalized(C64::new(a, 0.0), C64::new(b, 0.0))
}

fn amplitudes_json(s: &StateVector) -> serde_json::Value {
    s.amplitudes().iter().map(|z| json!([z.re, z.im])).collect()
}

fn cmd_chc(ctx: &mut Context, in1: &str, in2: &str, outcome: Option<u8>) -> CmdResult {
    let phi1 = parse_qubit(in1)?;
    let phi2 = parse_qubit(in2)?;
    let joint = apply_chc(&phi1, &phi2)?;
    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(ctx.cfg.seed);
    let branch = match outcome {
        Some(bit) => Branch::Forced(Outcome::from_bit(bit)?),
        None => Branch::Sample(&mut rng),
    };
    let result = condense(&joint, branch)?;

    ctx.write_json(
        "chc_joint.json",
        &json!({
            "basis_labels": tomography::BASIS_LABELS,
            "amplitudes": amplitudes_json(&joint),
            "config_hash": ctx.cfg.hash("chc"),
        }),
    )?;
    let (a, b) = (result.condensed.a(), result.condensed.b());
    ctx.write_json(
        "chc_condensation.json",
        &json!({
            "outcome": result.outcome.bit(),
            "probability": result.probability,
            "condensed": {"a": [a.re, a.im], "b": [b.re, b.im]},
            "condensed_label": result.condensed_label.map(|l| l.symbol()),
        }),
    )?;
    let rho = joint.to_density()?;
    ctx.write_density("chc_joint_density.json", rho.matrix(), "chc")?;
    ctx.write_figure("figure_chc", &figure_data(&rho)?)?;

    ctx.say(format!("outcome: {} (probability {:.6})", result.outcome.bit(), result.probability));
    match result.condensed_label {
        Some(label) => ctx.say(format!("condensed: {label}")),
        None => ctx.say(format!("condensed: ({a}, {b})")),
    }
    Ok(())
}

fn truth_table_csv(outcome: Outcome) -> String {
    let mut out = String::from("phi2\\phi1,+z,-z,+x,-x\n");
    for phi2 in Bb84Label::ALL {
        let cells: Vec<&str> = Bb84Label::ALL.iter().map(|&phi1| truth_table(phi1, phi2, outcome).symbol()).collect();
        out.push_str(&format!("{},{}\n", phi2, cells.join(",")));
    }
    out
}

fn cmd_truth_table(ctx: &mut Context) -> CmdResult {
    for o in Outcome::BOTH {
        ctx.write(&format!("truth_table_outcome{}.csv", o.bit()), &truth_table_csv(o))?;
    }
    let report = verify_truth_tables();
    ctx.say(format!("{} cases checked, {} mismatches", report.cases, report.mismatches.len()));
    if report.mismatches.is_empty() {
        Ok(())
    } else {
        Err(Failure::Verification(format!("{} truth-table mismatches", report.mismatches.len())))
    }
}

fn cmd_nmr_run(ctx: &mut Context, in1: &str, in2: &str, mode: &str) -> CmdResult {
    let mode: QspaMode = mode.parse()?;
    let phi1 = parse_qubit(in1)?;
    let phi2 = parse_qubit(in2)?;
    let sys = ctx.cfg.spin_system;
    let prep = pseudopure_prep(&sys)?;
    let input_seq = prepare_input_state(&phi1, &phi2)?;
    let deviation_in = run_sequence(&input_seq, &prep.final_state, &sys)?;
    let qspa = match &ctx.sequence {
        Some(seq) => seq.clone(),
        None => qspa_pulse_sequence(mode),
    };
    let deviation_out = run_sequence(&qspa, &deviation_in, &sys)?;
    let rho_in = effective_state(&deviation_in)?;
    let rho_out = effective_state(&deviation_out)?;

    ctx.write("nmr_prep_replay.txt", &prep.replay_log(sys.gamma_c))?;
    ctx.write("nmr_sequence.txt", &qspa.to_text())?;
    ctx.write_density("nmr_input.json", rho_in.matrix(), "nmr-run/input")?;
    ctx.write_density("nmr_output.json", rho_out.matrix(), "nmr-run/output")?;
    ctx.write_figure("figure_nmr_input", &figure_data(&rho_in)?)?;
    ctx.write_figure("figure_nmr_output", &figure_data(&rho_out)?)?;

    let ideal = apply_chc(&phi1, &phi2)?;
    let f = pure_state_fidelity(&rho_out, &ideal)?;
    let pops: Vec<String> = (0..4).map(|i| format!("{:.6}", rho_out.entry(i, i).re)).collect();
    ctx.say(format!("mode: {}", if ctx.sequence.is_some() { "sequence-file".to_string() } else { mode.to_string() }));
    ctx.say(format!("output populations: {}", pops.join(" ")));
    ctx.say(format!("fidelity to circuit output: {f:.12}"));
    Ok(())
}

fn cmd_verify(ctx: &mut Context, target: &str, mode: &str, freedoms: Option<&str>) -> CmdResult {
    let mode: QspaMode = mode.parse()?;
    let (reference, default_freedom, builtin) = match target {
        "cnot" => (gates::cnot(), PhaseFreedom::GlobalOnly, cnot_pulse_sequence()),
        "qspa" => (chc_unitary(), PhaseFreedom::GlobalPlusZ, qspa_pulse_sequence(mode)),
        other => return Err(Error::InvalidArgument(format!("unknown target '{other}' (expected cnot or qspa)")).into()),
    };
    let freedom = freedoms.map(str::parse::<PhaseFreedom>).transpose()?.unwrap_or(default_freedom);
    let from_file = ctx.sequence.is_some();
    let seq = ctx.sequence.clone().unwrap_or(builtin);
    let u = sequence_unitary(&seq, &ctx.cfg.spin_system)?;
    let report = equivalent_up_to_phase(&reference, &u, freedom)?;
    let diagnostic = target == "qspa" && mode == QspaMode::PaperLiteral && !from_file;

    ctx.say(format!("target: {target}"));
    ctx.say(format!("sequence: {}", seq.label));
    ctx.say(format!("freedoms: {freedom}"));
    ctx.say(format!("verdict: {}", report.verdict));
    ctx.say(format!("residual: {:e}", report.max_deviation));
    let phases: Vec<String> = report.fitted_phases.iter().map(|p| format!("{p:.12}")).collect();
    ctx.say(format!("fitted phases: [{}]", phases.join(", ")));
    ctx.write_json(
        &format!("verify_{target}.json"),
        &json!({
            "target": target,
            "sequence": seq.label,
            "freedoms": freedom,
            "diagnostic_only": diagnostic,
            "report": report,
        }),
    )?;
    if diagnostic {
        ctx.say("paper-literal sequence: diagnostic only");
        return Ok(());
    }
    if report.verdict {
        Ok(())
    } else {
        Err(Failure::Verification(format!(
            "{target} sequence differs from the gate (residual {:e})",
            report.max_deviation
        )))
    }
}

fn cmd_leakage(ctx: &mut Context, model: &str, knows_outcomes: bool, max_rounds: usize) -> CmdResult {
    if max_rounds == 0 || max_rounds > MAX_ROUNDS {
        return Err(Error::InvalidArgument(format!("--max-rounds must be in 1..={MAX_ROUNDS}")).into());
    }
    let inputs: InputKnowledge = model.parse()?;
    let curve = leakage_curve(KnowledgeModel::new(inputs, knows_outcomes), max_rounds)?;
    let mut csv = String::from("rounds,guess_probability,p_plus_z,p_minus_z,p_plus_x,p_minus_x\n");
    for r in &curve {
        let d: Vec<String> = Bb84Label::ALL.iter().map(|l| r.distribution[l].to_string()).collect();
        csv.push_str(&format!("{},{},{}\n", r.rounds, r.guess_probability, d.join(",")));
        ctx.say(format!("rounds {}: guess probability {}", r.rounds, r.guess_probability));
    }
    ctx.write("leakage_curve.csv", &csv)?;
    Ok(())
}

fn named_source(name: &str) -> Result<Option<StateVector>> {
    let general = || -> Result<(PureQubitState, PureQubitState)> {
        let t = 15f64.to_radians();
        Ok((PureQubitState::from_real(3f64.sqrt() / 2.0, 0.5)?, PureQubitState::from_real(t.cos(), t.sin())?))
    };
    let product = |a: PureQubitState, b: PureQubitState| crate::linalg::kron_states(&a.to_vector(), &b.to_vector());
    Ok(Some(match name {
        "fig3" => product(PureQubitState::zero(), PureQubitState::one())?,
        "fig4" => apply_chc(&PureQubitState::zero(), &PureQubitState::one())?,
        "fig5" => {
            let (a, b) = general()?;
            product(a, b)?
        }
        "fig6" => {
            let (a, b) = general()?;
            apply_chc(&a, &b)?
        }
        _ => return Ok(None),
    }))
}

fn cmd_tomo(ctx: &mut Context, source: &str, noise: f64) -> CmdResult {
    let (truth, pure) = match named_source(source)? {
        Some(psi) => (psi.to_density()?, Some(psi)),
        None => (DensityMatrixFile::parse(&read(Path::new(source))?)?.density()?, None),
    };
    let clean = simulate_all(&truth)?;
    let records = if noise > 0.0 { add_noise(&clean, noise, ctx.cfg.seed)? } else { clean };
    let result = reconstruct(&records)?;
    let error = max_abs_diff(result.rho.matrix(), truth.matrix());
    let fid = match &pure {
        Some(psi) => pure_state_fidelity(&result.rho, psi)?,
        None => fidelity(&truth, &result.rho).or_else(|_| pure_state_fidelity(&result.rho, &dominant(&truth)))?,
    };

    ctx.write("tomo_records.csv", &write_records_csv(&records)?)?;
    ctx.write_density("tomo_reconstruction.json", result.rho.matrix(), "tomo")?;
    ctx.write_json(
        "tomo_report.json",
        &json!({
            "source": source,
            "noise_sigma": noise,
            "seed": ctx.cfg.seed,
            "residual": result.residual,
            "condition_number": result.condition_number,
            "max_element_error": error,
            "fidelity": fid,
            "min_eigenvalue": result.rho.min_eigenvalue(),
        }),
    )?;
    ctx.write_figure("figure_tomo", &figure_data(&result.rho)?)?;
    ctx.say(format!("residual: {:e}", result.residual));
    ctx.say(format!("condition number: {:.6}", result.condition_number));
    ctx.say(format!("max element error: {error:e}"));
    ctx.say(format!("fidelity: {fid:.9}"));
    Ok(())
}

/// Eigenvector of the largest eigenvalue.
fn dominant(rho: &crate::linalg::DensityMatrix) -> StateVector {
    let eig = rho.matrix().clone().symmetric_eigen();
    let k = eig.eigenvalues.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).map_or(0, |(k, _)| k);
    StateVector::new(eig.eigenvectors.column(k).iter().copied().collect()).expect("unit eigenvector")
}
