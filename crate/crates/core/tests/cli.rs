use std::fs;
use std::process::{Command, Output};

use groundness::cli::{bench_rows, run_verify, rows_to_csv, VerifyConfig, CSV_HEADER};
use groundness::oracle::random_corpus;
use groundness::program::render;
use groundness::{Domain, FamilyId};

fn groundness(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_groundness"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn generate_prints_the_program() {
    let o = groundness(&["generate", "--family", "def-chain", "--n", "2"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "p(X2, c) :- p(X2, X1).\np(c, X1) :- p(X1, c).\np(X1, X1).\n");
}

#[test]
fn generate_writes_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.pl");
    let o = groundness(&["generate", "--family", "pos-linear", "--n", "2", "-o", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).is_empty());
    let text = fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 4);
    assert!(text.contains("s(c, X1, X1, c)."));
}

#[test]
fn generate_rejects_small_n() {
    let o = groundness(&["generate", "--family", "pos-linear", "--n", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("n must be ≥ 2"), "{}", stderr(&o));
}

fn write_family(dir: &tempfile::TempDir, family: FamilyId, n: usize) -> String {
    let path = dir.path().join(format!("{family}-{n}.pl"));
    fs::write(&path, render(&family.generate(n).unwrap())).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn analyze_def_chain_reaches_top() {
    let dir = tempfile::tempdir().unwrap();
    let file = write_family(&dir, FamilyId::DefChain, 2);
    let o = groundness(&["analyze", &file, "--domain", "def", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["domain"], "def");
    let p = &v["predicates"][0];
    assert_eq!(p["predicate"], "p");
    assert_eq!(p["strict_increases"], 3);
    assert_eq!(p["models"], serde_json::json!(["00", "01", "10", "11"]));
}

#[test]
fn analyze_reports_the_schema_keys() {
    let dir = tempfile::tempdir().unwrap();
    let file = write_family(&dir, FamilyId::PosLinear, 2);
    let o = groundness(&["analyze", &file, "--domain", "pos", "--format", "json", "--trace"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    for key in ["rounds", "domain", "wall_ms", "predicates", "trace"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    let preds = v["predicates"].as_array().unwrap();
    for p in preds {
        for key in ["predicate", "arity", "models", "ground_args", "strict_increases"] {
            assert!(p.get(key).is_some(), "missing {key}");
        }
    }
    let s = preds.iter().find(|p| p["predicate"] == "s").unwrap();
    assert_eq!(s["arity"], 4);
    assert_eq!(s["intersection_closed"], false);
}

#[test]
fn analyze_text_output() {
    let dir = tempfile::tempdir().unwrap();
    let file = write_family(&dir, FamilyId::DefChain, 2);
    let o = groundness(&["analyze", &file]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("domain: def"));
    assert!(text.contains("p/2: strict_increases=3"));
}

#[test]
fn analyze_input_errors_exit_2() {
    let o = groundness(&["analyze", "/nonexistent/prog.pl"]);
    assert_eq!(o.status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.pl");
    fs::write(&path, "p(X) :- q(X\n").unwrap();
    let o = groundness(&["analyze", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("bad.pl"));
}

#[test]
fn analyze_round_guard_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let file = write_family(&dir, FamilyId::DefChain, 3);
    let o = groundness(&["analyze", &file, "--max-rounds", "2"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn bench_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.csv");
    let o = groundness(&[
        "bench", "--family", "pos-linear", "--domain", "pos", "--n-min", "2", "--n-max", "6", "--csv",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(CSV_HEADER));
    let rows: Vec<Vec<String>> = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    assert_eq!(rows.len(), 5);
    for (row, n) in rows.iter().zip(2..) {
        assert_eq!(row[0], "pos-linear");
        assert_eq!(row[1], "pos");
        assert_eq!(row[2], n.to_string());
        assert_eq!(row[3], (11 * n).to_string());
        assert_eq!(row[5], ((1 << n) - 1).to_string());
    }
}

#[test]
fn bench_def_chain_notes_the_size_convention() {
    let o = groundness(&["bench", "--family", "def-chain", "--domain", "def", "--n-min", "1", "--n-max", "3"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stderr(&o).contains("n^2+n"));
    // wall_ms varies between runs; every other column is deterministic.
    let strip = |t: &str| t.lines().map(|l| l.rsplit_once(',').unwrap().0.to_string()).collect::<Vec<_>>();
    let direct = rows_to_csv(&bench_rows(FamilyId::DefChain, Domain::Def, 1, 3).unwrap());
    assert_eq!(strip(&stdout(&o)), strip(&direct));
    assert_eq!(strip(&direct)[3], "def-chain,def,3,21,7,7");
}

#[test]
fn bench_bad_range_exits_2() {
    let o = groundness(&["bench", "--family", "def-chain", "--domain", "def", "--n-min", "4", "--n-max", "2"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_passes() {
    let o = groundness(&["verify"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(!stdout(&o).contains("FAIL"));
}

#[test]
fn verify_catches_a_broken_join() {
    let cfg = VerifyConfig {
        join_override: Some(Domain::Pos),
        ..Default::default()
    };
    let outcomes = run_verify(&cfg);
    let failed: Vec<_> = outcomes.iter().filter(|o| !o.passed()).collect();
    assert!(!failed.is_empty());
    let report = failed[0].failure.as_deref().unwrap();
    assert!(report.contains("program:"), "{report}");
}

#[test]
fn random_corpus_is_seeded() {
    assert_eq!(random_corpus(5, 20), random_corpus(5, 20));
    assert_ne!(random_corpus(5, 20), random_corpus(6, 20));
}
