use std::path::Path;
use std::process::{Command, Output};

use coarselab::cyclic::random_tensor;
use coarselab::io::{chain_from_json, tensor_to_json, CSV_SCHEMA_LINE};
use coarselab::WindowSpec;

fn coarselab(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_coarselab")).current_dir(dir).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn space_gen_writes_descriptor() {
    let dir = tempfile::tempdir().unwrap();
    let o = coarselab(dir.path(), &["space", "gen", "--kind", "zd", "--dim", "2", "--radius", "16", "--out", "w.json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("w.json")).unwrap()).unwrap();
    assert_eq!(json["window"]["W"], 16);
    assert_eq!(json["points"], 545);
    let m = json["growth"]["M"].as_f64().unwrap();
    assert!((m - 2.0).abs() < 0.2);
}

#[test]
fn operator_pipeline_and_csv_schema() {
    let dir = tempfile::tempdir().unwrap();
    let o = coarselab(dir.path(), &["op", "gen", "-W", "12", "--margin", "6", "--seed", "4", "--out", "a.json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = coarselab(dir.path(), &["op", "mu-profile", "--op", "a.json", "--rmax", "6", "--csv", "mu.csv"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("mu.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some(CSV_SCHEMA_LINE));
    assert_eq!(lines.next(), Some("radius,lower,upper"));
    assert_eq!(lines.count(), 7);

    let o = coarselab(dir.path(), &["op", "mu-profile", "--op", "a.json", "--rmax", "16"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("opalg") && stderr(&o).contains("margin"));
}

#[test]
fn chain_pairing_and_filling() {
    let dir = tempfile::tempdir().unwrap();
    let o = coarselab(
        dir.path(),
        &["chain", "gen", "--dim", "2", "-W", "12", "--margin", "4", "--terms", "8", "--seed", "3", "--out", "c.json"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let chain = chain_from_json(&std::fs::read_to_string(dir.path().join("c.json")).unwrap(), None).unwrap();
    assert_eq!(chain.degree(), 1);

    let o = coarselab(dir.path(), &["pair", "--cochain", "const:1:2", "--chain", "c.json"]);
    assert!(o.status.success());
    let re: f64 = stdout(&o).split_whitespace().next().unwrap().parse().unwrap();
    let expected: f64 = chain.terms().map(|(_, v)| 2.0 * v.re).sum();
    assert!((re - expected).abs() < 1e-12);

    let o = coarselab(dir.path(), &["cochain", "pair", "--cochain", "wobble:1", "--chain", "c.json"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("cannot parse cochain"));

    let o = coarselab(dir.path(), &["fill", "--chain", "c.json", "--verify-estimate", "--json", "f.json", "--samples", "50"]);
    assert!(o.status.success(), "{}{}", stdout(&o), stderr(&o));
    let report: coarselab::FillingReport =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("f.json")).unwrap()).unwrap();
    assert!(report.pass && report.lhs <= report.rhs);

    let o = coarselab(dir.path(), &["fill", "run", "--chain", "c.json", "--out", "filled.json"]);
    assert!(o.status.success());
    assert!(dir.path().join("filled.json").exists());
}

#[test]
fn character_of_a_tensor_file() {
    let dir = tempfile::tempdir().unwrap();
    let window = WindowSpec::zd(1, 10, 4).build().unwrap();
    let t = random_tensor(&window, 1, 2, &[1], 5).unwrap();
    std::fs::write(dir.path().join("t.json"), tensor_to_json(&t).unwrap()).unwrap();
    let o = coarselab(dir.path(), &["chi", "--tensor", "t.json", "--out", "chain.json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let chain = chain_from_json(&std::fs::read_to_string(dir.path().join("chain.json")).unwrap(), None).unwrap();
    assert_eq!(chain, coarselab::cyclic::chi(&t).unwrap());

    let o = coarselab(dir.path(), &["chain-map-check", "--tensor", "t.json"]);
    assert!(o.status.success(), "{}", stdout(&o));
}

#[test]
fn chain_map_check_random() {
    let dir = tempfile::tempdir().unwrap();
    let o = coarselab(dir.path(), &["chain-map-check", "--seed", "7", "--trials", "4", "-W", "16", "--margin", "8", "--csv", "cm.csv"]);
    assert!(o.status.success(), "{}", stdout(&o));
    let csv = std::fs::read_to_string(dir.path().join("cm.csv")).unwrap();
    assert_eq!(csv.lines().count(), 6);
}

#[test]
fn demos_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let o = coarselab(dir.path(), &["demo", "winding", "--k", "0,1,2", "--radius", "24", "--margin", "12"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).contains("pass"));

    let o = coarselab(dir.path(), &["demo", "winding", "--k", "3", "--margin", "8"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("demo: margin violated"));

    let o = coarselab(dir.path(), &["demo", "tree", "--radius", "6"]);
    assert!(o.status.success());

    std::fs::write(
        dir.path().join("ind.json"),
        r#"{"degree": 0, "values": [{"tuple": [[0]], "re": 1}, {"tuple": [[1]], "re": 1}, {"tuple": [[2]], "re": 1}]}"#,
    )
    .unwrap();
    let o = coarselab(dir.path(), &["demo", "degree0", "--projection", "even", "--cochain", "table:ind.json"]);
    assert_eq!(stdout(&o).trim(), "2 0");

    let o = coarselab(dir.path(), &["no-such-command"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn suite_run_is_reproducible_and_fails_loudly() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("cfg.json"), r#"{"seed": 5, "only": [1, 2, 10]}"#).unwrap();
    let run = |csv: &str| coarselab(dir.path(), &["suite", "run", "--config", "cfg.json", "--csv", csv]);
    assert!(run("a.csv").status.success());
    assert!(run("b.csv").status.success());
    let a = std::fs::read(dir.path().join("a.csv")).unwrap();
    assert_eq!(a, std::fs::read(dir.path().join("b.csv")).unwrap());

    std::fs::write(dir.path().join("m0.json"), r#"{"margin": 0, "only": [10]}"#).unwrap();
    let o = coarselab(dir.path(), &["suite", "run", "--config", "m0.json"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("ERROR") && stdout(&o).contains("margin"));

    std::fs::write(dir.path().join("bad.json"), r#"{"seeds": 5}"#).unwrap();
    let o = coarselab(dir.path(), &["suite", "run", "--config", "bad.json"]);
    assert_eq!(o.status.code(), Some(2));
}
