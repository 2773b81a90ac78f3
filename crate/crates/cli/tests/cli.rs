use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("svcomp-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_svcomp")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).trim().to_string()
}

#[test]
fn oracle_answers_membership() {
    let a1 = fixture("a1.aut");
    let a1 = a1.to_str().unwrap();
    assert_eq!(stdout(&run(&["oracle", "--automaton", a1, "--word", "ba"])), "true");
    assert_eq!(stdout(&run(&["oracle", "--automaton", a1, "--word", "ab"])), "false");
    let j: serde_json::Value = serde_json::from_str(&stdout(&run(&["--json", "oracle", "--automaton", a1, "--word", "ba"]))).unwrap();
    assert_eq!(j["member"], true);
}

#[test]
fn verify_passes_on_a1() {
    let o = run(&["verify", "--mode", "cg1", "--automaton", fixture("a1.aut").to_str().unwrap(), "--max-len", "8"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("PASS"));
}

#[test]
fn verify_fails_without_the_check() {
    let o = run(&[
        "verify",
        "--mode",
        "cg1",
        "--automaton",
        fixture("a1.aut").to_str().unwrap(),
        "--max-len",
        "4",
        "--disable-check",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL"));
}

#[test]
fn converted_machine_simulates() {
    let out = scratch("a1.cg1");
    let o = run(&["convert", "--mode", "cg1", "--automaton", fixture("a1.aut").to_str().unwrap(), "-o", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let m = out.to_str().unwrap();
    assert_eq!(stdout(&run(&["simulate", "--machine", m, "--word", "ba"])), "ACCEPT");
    assert_eq!(stdout(&run(&["simulate", "--machine", m, "--word", "ab"])), "REJECT");
}

#[test]
fn simulate_reads_an_annotation_file() {
    let a1 = fixture("a1.aut");
    let a1 = a1.to_str().unwrap();
    let annotation = stdout(&run(&["convert", "--mode", "cg1", "--automaton", a1, "--emit", "annotation", "--word", "ba"]));
    let good = scratch("good.annot");
    std::fs::write(&good, &annotation).unwrap();
    let sim = |p: &Path| stdout(&run(&["simulate", "--automaton", a1, "--mode", "cg1", "--annot", p.to_str().unwrap()]));
    assert_eq!(sim(&good), "ACCEPT");
    let bad = scratch("bad.annot");
    let flipped = annotation.replacen("/1", "/0", 1);
    std::fs::write(&bad, &flipped).unwrap();
    assert_ne!(annotation, flipped);
    assert_eq!(sim(&bad), "NEITHER");
}

#[test]
fn stats_writes_a_report() {
    let report = scratch("stats.json");
    let o = run(&["stats", "--mode", "cg1", "--n-range", "1..2", "--samples", "2", "--report", report.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let j: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    let rows = j.as_array().unwrap();
    assert_eq!(rows.len(), 2);
    for key in ["mode", "n", "structural_bound", "reachable", "per_field_cardinalities"] {
        assert!(rows[0].get(key).is_some(), "missing {key}");
    }
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(run(&["verify", "--mode", "nope"]).status.code(), Some(2));
    assert_eq!(run(&["oracle", "--automaton", "/nonexistent.aut", "--word", "a"]).status.code(), Some(2));
}
