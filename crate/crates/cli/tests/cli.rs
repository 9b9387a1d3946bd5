use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Duration;

use bddcit::HandlerKind;
use bddcit_cli::{
    cmd_bench, cmd_generate, cmd_verify, read_model, read_suite_csv, BenchConfig, BenchStatus, GenerateArgs,
};

fn models_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../models")
}

fn printer() -> PathBuf {
    models_dir().join("printer.model")
}

fn generate_to(model: &Path, t: usize, handler: HandlerKind, out: &Path) -> usize {
    cmd_generate(&GenerateArgs {
        model: model.to_path_buf(),
        strength: t,
        handler,
        fill: false,
        output: Some(out.to_path_buf()),
        indices: false,
    })
    .unwrap()
    .len()
}

/// The reference ten-row suite, first two columns read by value.
const REFERENCE_SUITE: &str = "\
Paper size,Feed tray,Paper type
B4,Bypass,Thin
A4,Bypass,Normal
A4,Tray 1,Thick
A4,Tray 2,Thin
B5,Bypass,Normal
B5,Tray 1,Thin
B5,Tray 2,Thick
B4,-,Normal
-,Tray 1,Normal
-,Tray 2,Normal
";

/// The reference suite for the model with its constraints ignored.
const UNCONSTRAINED_SUITE: &str = "\
Paper size,Feed tray,Paper type
B4,Bypass,Thick
B4,Tray 1,Thin
B4,Tray 2,Normal
A4,Bypass,Normal
A4,Tray 1,Thick
A4,Tray 2,Thin
B5,Bypass,Thin
B5,Tray 1,Normal
B5,Tray 2,Thick
";

#[test]
fn printer_pairwise_csv_has_header_and_verifies() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.csv");
    generate_to(&printer(), 2, HandlerKind::BddPartialUp, &out);
    let text = fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().next(), Some("Paper size,Feed tray,Paper type"));
    assert!(cmd_verify(&printer(), &out, 2, HandlerKind::Oracle).unwrap().accepted());
}

#[test]
fn one_parameter_strength_one_gives_two_rows() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("one.model");
    fs::write(&model, "[PARAMETERS]\nSwitch: on, off\n").unwrap();
    let out = dir.path().join("s.csv");
    assert_eq!(generate_to(&model, 1, HandlerKind::BddAnd, &out), 2);
    assert_eq!(fs::read_to_string(&out).unwrap(), "Switch\non\noff\n");
}

#[test]
fn printer_strength_three_is_the_valid_full_cases() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.csv");
    assert_eq!(generate_to(&printer(), 3, HandlerKind::BddPartialDown, &out), 18);
    assert!(cmd_verify(&printer(), &out, 3, HandlerKind::Oracle).unwrap().accepted());
}

#[test]
fn reference_suite_is_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("suite.csv");
    fs::write(&csv, REFERENCE_SUITE).unwrap();
    let report = cmd_verify(&printer(), &csv, 2, HandlerKind::BddAnd).unwrap();
    assert!(report.accepted(), "{report:?}");
    assert_eq!(report.suite_size, 10);
}

#[test]
fn unconstrained_suite_is_rejected_on_constrained_model() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("suite.csv");
    fs::write(&csv, UNCONSTRAINED_SUITE).unwrap();
    let report = cmd_verify(&printer(), &csv, 2, HandlerKind::Oracle).unwrap();
    assert!(!report.accepted());
    // B4/Tray 1 and B4/Tray 2 break the size rule; Bypass/Thick breaks the tray rule
    assert_eq!(report.invalid_rows, vec![0, 1, 2]);
}

#[test]
fn empty_suite_lists_every_valid_pair() {
    let dir = tempfile::tempdir().unwrap();
    for content in ["", "Paper size,Feed tray,Paper type\n"] {
        let csv = dir.path().join("empty.csv");
        fs::write(&csv, content).unwrap();
        let report = cmd_verify(&printer(), &csv, 2, HandlerKind::BddPartialUp).unwrap();
        assert!(!report.accepted());
        assert_eq!(report.uncovered.len(), 23);
    }
}

#[test]
fn suite_csv_errors() {
    let model = read_model(&printer()).unwrap();
    let wrong_columns = "Paper size,Paper type,Feed tray\n";
    assert!(read_suite_csv(&model, wrong_columns.as_bytes()).is_err());
    let unknown = "Paper size,Feed tray,Paper type\nA3,Bypass,Thin\n";
    let err = read_suite_csv(&model, unknown.as_bytes()).unwrap_err().to_string();
    assert!(err.contains("A3"), "{err}");
    let indices = "Paper size,Feed tray,Paper type\n1,0,-\n";
    let rows = read_suite_csv(&model, indices.as_bytes()).unwrap();
    assert_eq!(rows[0].values(), &[Some(1), Some(0), None]);
}

#[test]
fn generation_output_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let model = models_dir().join("network.model");
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    generate_to(&model, 2, HandlerKind::BddPartialUp, &a);
    generate_to(&model, 2, HandlerKind::BddPartialUp, &b);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn bench_partial_handlers_agree_on_printer() {
    let dir = tempfile::tempdir().unwrap();
    fs::copy(printer(), dir.path().join("printer.model")).unwrap();
    let records = cmd_bench(&BenchConfig {
        model_dir: dir.path().to_path_buf(),
        strength: 2,
        handlers: vec![HandlerKind::BddPartialUp, HandlerKind::BddPartialDown],
        repeats: 12,
        trim: 1,
        timeout: Duration::from_secs(60),
        jobs: 2,
    })
    .unwrap();
    assert_eq!(records.len(), 2);
    assert!(records.iter().all(|r| r.status == BenchStatus::Ok && r.seconds.is_some()));
    assert_eq!(records[0].suite_size, records[1].suite_size);
    assert_eq!(records[0].handler, HandlerKind::BddPartialUp);
}

#[test]
fn bench_timeout_is_reported_as_na() {
    let dir = tempfile::tempdir().unwrap();
    fs::copy(models_dir().join("synth-20-hard.model"), dir.path().join("hard.model")).unwrap();
    let records = cmd_bench(&BenchConfig {
        model_dir: dir.path().to_path_buf(),
        strength: 3,
        handlers: vec![HandlerKind::BddAnd],
        repeats: 1,
        trim: 0,
        timeout: Duration::from_millis(1),
        jobs: 1,
    })
    .unwrap();
    assert_eq!(records[0].status, BenchStatus::Na);
    assert_eq!((records[0].seconds, records[0].suite_size), (None, None));
}

#[test]
fn bench_rejects_empty_directory() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = BenchConfig {
        model_dir: dir.path().to_path_buf(),
        strength: 2,
        handlers: vec![HandlerKind::BddAnd],
        repeats: 1,
        trim: 0,
        timeout: Duration::from_secs(1),
        jobs: 1,
    };
    assert!(cmd_bench(&cfg).is_err());
}

fn bddcit(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_bddcit")).args(args).output().unwrap()
}

#[test]
fn binary_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let p = printer();
    let p = p.to_str().unwrap();
    let out = dir.path().join("s.csv");
    let out = out.to_str().unwrap();

    assert!(bddcit(&["generate", p, "-t", "2", "--output", out]).status.success());
    let ok = bddcit(&["verify", p, out, "-t", "2"]);
    assert!(ok.status.success());
    assert!(String::from_utf8_lossy(&ok.stdout).contains("ACCEPTED"));

    fs::write(out, UNCONSTRAINED_SUITE).unwrap();
    assert_eq!(bddcit(&["verify", p, out, "-t", "2"]).status.code(), Some(1));

    let too_strong = bddcit(&["generate", p, "-t", "4"]);
    assert_eq!(too_strong.status.code(), Some(2));

    let bad = dir.path().join("bad.model");
    fs::write(&bad, "[PARAMETERS]\nA: x, y\n[CONSTRAINTS]\nA = z\n").unwrap();
    let parse = bddcit(&["generate", bad.to_str().unwrap()]);
    assert_eq!(parse.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&parse.stderr).contains("error"));
}

#[test]
fn binary_bench_writes_record_and_cactus_files() {
    let dir = tempfile::tempdir().unwrap();
    let models = dir.path().join("models");
    fs::create_dir(&models).unwrap();
    fs::copy(printer(), models.join("printer.model")).unwrap();
    let out = dir.path().join("bench.csv");
    let status = bddcit(&[
        "bench",
        models.to_str().unwrap(),
        "-t",
        "2",
        "--handler",
        "bdd-and,oracle",
        "--repeats",
        "3",
        "--output",
        out.to_str().unwrap(),
    ])
    .status;
    assert!(status.success());
    let text = fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("instance,handler,t,status,seconds,suite_size"));
    assert!(lines.next().unwrap().starts_with("printer,bdd-and,2,OK,"));
    let cactus = fs::read_to_string(dir.path().join("bench.cactus.csv")).unwrap();
    assert!(cactus.starts_with("solved,bdd-and,oracle\n1,"));
}

#[test]
fn binary_writes_indices_and_filled_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.csv");
    let p = printer();
    let status = bddcit(&["generate", p.to_str().unwrap(), "--fill", "--indices", "-o", out.to_str().unwrap()]).status;
    assert!(status.success());
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.lines().skip(1).all(|l| l.split(',').all(|c| c.parse::<u32>().is_ok())), "{text}");
    assert!(cmd_verify(&p, &out, 2, HandlerKind::Oracle).unwrap().accepted());
}
