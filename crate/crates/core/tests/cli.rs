use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::Command;

use qspa::cli::{run_with, DensityMatrixFile};

fn run_in(dir: &Path, args: &[&str]) -> (i32, String, String) {
    let mut full = vec!["qspa", "--out", dir.to_str().unwrap()];
    full.extend_from_slice(args);
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run_with(full, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect()
}

const COMMANDS: &[&[&str]] = &[
    &["--seed", "11", "chc", "--in1", "0.8,0.6", "--in2", "+x"],
    &["--format", "csv", "chc", "--in1", "+z", "--in2", "-z", "--outcome", "1"],
    &["truth-table"],
    &["nmr-run"],
    &["nmr-run", "--in1", "0.8660254037844386,0.5", "--in2", "0.9659258262890683,0.25881904510252074"],
    &["verify", "cnot"],
    &["verify", "qspa"],
    &["verify", "qspa", "--mode", "paper-literal"],
    &["leakage", "--max-rounds", "3"],
    &["leakage", "--model", "all", "--knows-outcomes"],
    &["--seed", "5", "tomo", "--source", "fig6", "--noise", "0.01"],
    &["--format", "csv", "tomo", "--source", "fig3"],
];

#[test]
fn every_command_is_byte_reproducible() {
    for args in COMMANDS {
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        let first = run_in(a.path(), args);
        let second = run_in(b.path(), args);
        assert_eq!(first.0, 0, "{args:?}: {}", first.2);
        assert_eq!(first.0, second.0, "{args:?}");
        let a_dir = a.path().to_str().unwrap();
        let b_dir = b.path().to_str().unwrap();
        assert_eq!(first.1.replace(a_dir, "OUT"), second.1.replace(b_dir, "OUT"), "{args:?}");
        let files = snapshot(a.path());
        assert!(!files.is_empty(), "{args:?} wrote nothing");
        assert_eq!(files, snapshot(b.path()), "{args:?}");
    }
}

#[test]
fn seeds_change_sampled_outcomes() {
    let outcomes: Vec<String> = (0..16)
        .map(|seed| {
            let dir = tempfile::tempdir().unwrap();
            let seed = seed.to_string();
            let (code, out, _) = run_in(dir.path(), &["--seed", &seed, "chc", "--in1", "+z", "--in2", "+x"]);
            assert_eq!(code, 0);
            out.lines().find(|l| l.starts_with("outcome:")).unwrap().to_string()
        })
        .collect();
    assert!(outcomes.iter().any(|l| l.starts_with("outcome: 0")));
    assert!(outcomes.iter().any(|l| l.starts_with("outcome: 1")));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run_in(dir.path(), &["chc", "--in1", "0.9,0.9", "--in2", "+z"]).0, 1);
    assert_eq!(run_in(dir.path(), &["no-such-command"]).0, 1);
    assert_eq!(run_in(dir.path(), &["leakage", "--max-rounds", "9"]).0, 1);
    assert_eq!(run_in(dir.path(), &["--gamma-h", "1e7", "nmr-run"]).0, 1);
    assert_eq!(run_in(dir.path(), &["tomo", "--source", "missing.json"]).0, 1);

    let seq = dir.path().join("broken.txt");
    fs::write(&seq, "rot spins=2 axis=y angle=pi/2\n").unwrap();
    assert_eq!(run_in(dir.path(), &["--sequence", seq.to_str().unwrap(), "verify", "cnot"]).0, 2);
}

#[test]
fn sequence_file_overrides_the_builtin() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, _) = run_in(dir.path(), &["verify", "cnot"]);
    assert_eq!(code, 0);
    let seq = dir.path().join("cnot.txt");
    fs::write(&seq, qspa::nmr::cnot_pulse_sequence().to_text()).unwrap();
    let (code, out, _) = run_in(dir.path(), &["--sequence", seq.to_str().unwrap(), "verify", "cnot"]);
    assert_eq!(code, 0);
    assert!(out.contains("verdict: true"));
}

#[test]
fn config_file_and_flags_merge() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "seed = 3\nformat = csv\n").unwrap();
    let (code, _, err) = run_in(dir.path(), &["--config", cfg.to_str().unwrap(), "tomo", "--source", "fig4"]);
    assert_eq!(code, 0, "{err}");
    assert!(dir.path().join("figure_tomo.csv").exists());
}

#[test]
fn tomography_reads_its_own_density_files() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run_in(dir.path(), &["nmr-run"]).0, 0);
    let path = dir.path().join("nmr_output.json");
    let text = fs::read_to_string(&path).unwrap();
    let file = DensityMatrixFile::parse(&text).unwrap();
    assert_eq!(file.to_json(), text);
    assert_eq!(file.metadata.source_op, "nmr-run/output");

    let out = tempfile::tempdir().unwrap();
    let (code, stdout, err) = run_in(out.path(), &["tomo", "--source", path.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    assert!(stdout.contains("fidelity: 1.000000000"), "{stdout}");
}

#[test]
fn binary_entry_point() {
    let dir = tempfile::tempdir().unwrap();
    let run = |args: &[&str]| {
        Command::new(env!("CARGO_BIN_EXE_qspa")).arg("--out").arg(dir.path()).args(args).output().unwrap()
    };
    let ok = run(&["truth-table"]);
    assert_eq!(ok.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&ok.stdout).contains("32 cases checked, 0 mismatches"));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["verify", "swap"]).status.code(), Some(1));
}
