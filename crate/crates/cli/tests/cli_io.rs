//! End-to-end CLI behavior: exit codes, artifact determinism, golden
//! schemas, and spec-file round trips.

use nlmc_cli::specfile::KernelSpecFile;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_nlmc"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout_of(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "command {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).expect("utf-8 artifact")
}

fn fixture(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
        .display()
        .to_string()
}

fn golden_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

#[test]
fn exit_codes_match_failure_classes() {
    // usage: gamma outside the admissible range
    let out = run(&["analyze", "--builtin", "example1", "--gamma", "0.3"]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));

    // usage: no kernel source / both kernel sources
    let out = run(&["analyze"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&[
        "analyze",
        "--builtin",
        "example2",
        "--gamma",
        "0.4",
        "--spec",
        &fixture("flip.json"),
    ]);
    assert_eq!(out.status.code(), Some(2));

    // validation: kernel invariant violations
    let out = run(&["validate", "--spec", &fixture("bad_coeff_rowsum.json")]);
    assert_eq!(out.status.code(), Some(3));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("coeff_row_sum,1,,1,"), "artifact names (x, k):\n{stdout}");

    // hypothesis failure: certified lambda2 > alpha2
    let out = run(&[
        "audit",
        "--spec",
        &fixture("lambda_exceeds_alpha.json"),
        "--grid",
        "6",
        "--steps",
        "5",
    ]);
    assert_eq!(out.status.code(), Some(4), "{}", String::from_utf8_lossy(&out.stderr));

    // non-convergence: periodic chain from a vertex start
    let out = run(&[
        "invariant",
        "--spec",
        &fixture("flip.json"),
        "--max-iters",
        "50",
    ]);
    assert_eq!(out.status.code(), Some(5), "{}", String::from_utf8_lossy(&out.stderr));

    // I/O: unwritable output path
    let out = run(&[
        "iterate",
        "--builtin",
        "example2",
        "--gamma",
        "0.4",
        "--steps",
        "2",
        "--out",
        "/nonexistent-dir/trajectory.csv",
    ]);
    assert_eq!(out.status.code(), Some(6));
}

#[test]
fn syntax_errors_carry_location() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.json");
    std::fs::write(&path, "{\n  \"name\": \"x\",\n  \"states\": 4,\n").unwrap();
    let out = run(&["validate", "--spec", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("line") && stderr.contains("column"), "{stderr}");
}

#[test]
fn unknown_spec_fields_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("extra.json");
    std::fs::write(
        &path,
        r#"{"name":"x","states":2,"base":[[1.0,0.0],[0.0,1.0]],"coeff":[],"extra":1}"#,
    )
    .unwrap();
    let out = run(&["validate", "--spec", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown field"));
}

#[test]
fn identical_manifests_produce_identical_artifacts() {
    let analyze = [
        "analyze", "--builtin", "example2", "--gamma", "0.4", "--grid", "6",
    ];
    assert_eq!(stdout_of(&analyze), stdout_of(&analyze));

    let simulate = [
        "simulate", "--builtin", "example2", "--gamma", "0.4", "--particles", "100,200",
        "--steps", "4", "--replicas", "3", "--seed", "9",
    ];
    assert_eq!(stdout_of(&simulate), stdout_of(&simulate));
}

#[test]
fn spec_files_round_trip() {
    // builtin -> spec text -> kernel is value-identical
    let kernel = nlmc::builtin::kernel(nlmc::builtin::BuiltinExample::Example2, 0.4).unwrap();
    let spec = KernelSpecFile::from_kernel(&kernel, "example2 gamma=0.4");
    let reparsed = KernelSpecFile::parse(&spec.to_json()).unwrap();
    assert_eq!(spec, reparsed);
    assert_eq!(reparsed.to_kernel().unwrap(), kernel);

    // the emitted artifact of `examples` parses and validates cleanly
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("example2.json");
    let out = run(&[
        "examples", "--builtin", "example2", "--gamma", "0.4", "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    let emitted = KernelSpecFile::parse(&text).unwrap();
    assert_eq!(emitted.to_kernel().unwrap(), kernel);
    let out = run(&["validate", "--spec", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn example1_spec_structure_matches_the_quoted_matrix() {
    let out = stdout_of(&["examples", "--builtin", "example1", "--gamma", "0.2"]);
    let spec = KernelSpecFile::parse(&out).unwrap();
    assert_eq!(spec.states, 4);
    assert_eq!(spec.base[0], vec![0.001, 0.001, 0.499, 0.499]);
    assert_eq!(spec.base[3], vec![0.001, 0.499, 0.001, 0.499]);
    // the law coupling sits entirely in row 1, driven by state 1
    assert_eq!(spec.coeff.len(), 4);
    assert!(spec.coeff.iter().all(|c| c.x == 1 && c.k == 1));
    let positive: Vec<usize> =
        spec.coeff.iter().filter(|c| c.value > 0.0).map(|c| c.j).collect();
    assert_eq!(positive, vec![1, 2]);
}

fn golden_check(name: &str, args: &[&str]) {
    let got = stdout_of(args);
    let path = golden_path(name);
    let want = std::fs::read_to_string(&path)
        .unwrap_or_else(|_| panic!("golden file {} missing", path.display()));
    assert_eq!(got, want, "artifact drifted from golden file {name}");
}

#[test]
fn golden_artifacts_are_stable() {
    golden_check(
        "analyze_example2_grid6.csv",
        &["analyze", "--builtin", "example2", "--gamma", "0.4", "--grid", "6"],
    );
    golden_check(
        "analyze_example1_steps1.csv",
        &["analyze", "--builtin", "example1", "--gamma", "0.2", "--steps", "1"],
    );
    golden_check(
        "iterate_example2_steps5.csv",
        &["iterate", "--builtin", "example2", "--gamma", "0.4", "--steps", "5"],
    );
    golden_check(
        "invariant_example2.csv",
        &["invariant", "--builtin", "example2", "--gamma", "0.4"],
    );
    golden_check(
        "audit_example2_grid6.csv",
        &[
            "audit", "--builtin", "example2", "--gamma", "0.4", "--grid", "6", "--steps", "8",
        ],
    );
    golden_check(
        "simulate_small.csv",
        &[
            "simulate", "--builtin", "example2", "--gamma", "0.4", "--particles", "50,100",
            "--steps", "3", "--replicas", "2", "--seed", "7",
        ],
    );
    golden_check(
        "examples_example2.json",
        &["examples", "--builtin", "example2", "--gamma", "0.4"],
    );
}
