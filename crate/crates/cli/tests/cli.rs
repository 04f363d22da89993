use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use gridgame_core::scenario::catalog_default;
use gridgame_core::PayoffMatrix;
use serde_json::Value;

fn gridgame(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gridgame")).args(args).current_dir(dir).output().unwrap()
}

fn json(path: impl AsRef<Path>) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn missing_input_exits_2_naming_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let out = gridgame(dir.path(), &["solve", "--matrix", "no_such.csv", "--out", "o"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no_such.csv"));
}

#[test]
fn malformed_inputs_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.csv"), "attack,D1\nA1,oops\n").unwrap();
    let out = gridgame(dir.path(), &["solve", "--matrix", "bad.csv", "--out", "o"]);
    assert_eq!(out.status.code(), Some(2));
    fs::write(dir.path().join("net.json"), "{\"buses\": 3}").unwrap();
    assert_eq!(gridgame(dir.path(), &["payoff", "--network", "net.json", "--out", "o"]).status.code(), Some(2));
    fs::write(dir.path().join("ahp.json"), "[[1,2,1,1],[1,1,1,1],[1,1,1,1],[1,1,1,1]]").unwrap();
    assert_eq!(gridgame(dir.path(), &["payoff", "--ahp", "ahp.json", "--out", "o"]).status.code(), Some(2));
}

#[test]
fn unknown_method_and_bad_thread_count_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("m.csv"), "attack,D1\nA1,0.5\n").unwrap();
    let out = gridgame(dir.path(), &["solve", "--matrix", "m.csv", "--method", "simulated", "--out", "o"]);
    assert_eq!(out.status.code(), Some(2));
    let out = gridgame(dir.path(), &["compare", "--methods", "nash,bogus", "--out", "o"]);
    assert_eq!(out.status.code(), Some(2));
    let out = Command::new(env!("CARGO_BIN_EXE_gridgame"))
        .args(["solve", "--matrix", "m.csv", "--out", "o"])
        .current_dir(dir.path())
        .env("GRIDGAME_THREADS", "0")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn one_by_one_game_is_trivial() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("m.csv"), "attack,D1\nA1,0.37\n").unwrap();
    let out = gridgame(dir.path(), &["solve", "--matrix", "m.csv", "--out", "o"]);
    assert!(out.status.success());
    let eq = json(dir.path().join("o/equilibrium.json"));
    assert_eq!(eq["value"].as_f64(), Some(0.37));
    assert_eq!(eq["attacker_probs"], serde_json::json!([1.0]));
    assert_eq!(eq["defender_probs"], serde_json::json!([1.0]));
    assert!(dir.path().join("o/manifest.json").exists());
}

#[test]
fn regret_trajectory_has_one_row_per_iteration() {
    let dir = tempfile::tempdir().unwrap();
    assert!(gridgame(dir.path(), &["payoff", "--out", "p"]).status.success());
    let out = gridgame(
        dir.path(),
        &["solve", "--matrix", "p/payoff.csv", "--method", "regret", "--iters", "10000", "--out", "r"],
    );
    assert!(out.status.success());
    let text = fs::read_to_string(dir.path().join("r/trajectory.csv")).unwrap();
    assert_eq!(text.lines().count(), 10_001);
    assert!(text.starts_with("iteration,"));
}

#[test]
fn single_attack_catalog_gives_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let cat = catalog_default();
    let defenses: Vec<String> = cat.defense_ids();
    let refs: Vec<&str> = defenses.iter().map(String::as_str).collect();
    let one = cat.subset(&["A3"], &refs).unwrap();
    fs::write(dir.path().join("cat.json"), one.to_json()).unwrap();
    let out = gridgame(dir.path(), &["payoff", "--catalog", "cat.json", "--out", "p"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let m = PayoffMatrix::from_csv(&fs::read_to_string(dir.path().join("p/payoff.csv")).unwrap()).unwrap();
    assert_eq!((m.rows(), m.cols()), (1, 10));
    assert_eq!(m.attack_ids, vec!["A3".to_string()]);
    let manifest = json(dir.path().join("p/manifest.json"));
    assert!(manifest["inputs"]["cat.json"].is_string());
}

#[test]
fn non_convergence_is_flagged_not_fatal() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("pennies.csv"), "attack,D1,D2\nA1,1,0\nA2,0,1\n").unwrap();
    let out = gridgame(
        dir.path(),
        &["learn", "--matrix", "pennies.csv", "--mode", "multi", "--iters", "5000", "--out", "l"],
    );
    assert_eq!(out.status.code(), Some(0));
    let policy = json(dir.path().join("l/policy.json"));
    assert_eq!(policy["outcome"]["converged"], Value::Bool(false));
    let manifest = json(dir.path().join("l/manifest.json"));
    assert!(!manifest["warnings"].as_array().unwrap().is_empty());
}

#[test]
fn compare_writes_all_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = gridgame(
        dir.path(),
        &["compare", "--methods", "RDS,SOD,nash", "--runs", "50", "--attack-dist", "uniform", "--out", "c"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["comparison.csv", "stats.json", "runs.csv", "timings.csv", "policies.json", "manifest.json"] {
        assert!(dir.path().join("c").join(f).exists(), "{f}");
    }
    let table = fs::read_to_string(dir.path().join("c/comparison.csv")).unwrap();
    assert_eq!(table.lines().count(), 4);
    let runs = fs::read_to_string(dir.path().join("c/runs.csv")).unwrap();
    assert_eq!(runs.lines().count(), 1 + 3 * 50);
    let manifest = json(dir.path().join("c/manifest.json"));
    assert_eq!(manifest["seed"], Value::from(0));
    assert_eq!(manifest["outputs"].as_object().unwrap().len(), 6);
}

#[test]
fn stackelberg_output_names_the_commitment() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("m.csv"), "attack,D1,D2\nA1,0.9,0.2\nA2,0.1,0.8\n").unwrap();
    let out = gridgame(dir.path(), &["solve", "--matrix", "m.csv", "--method", "stackelberg", "--out", "s"]);
    assert!(out.status.success());
    let eq = json(dir.path().join("s/equilibrium.json"));
    assert_eq!(eq["stackelberg"]["defense_id"], "D2");
    assert_eq!(eq["stackelberg"]["attack_id"], "A1");
    assert_eq!(eq["stackelberg"]["security_level"].as_f64(), Some(0.2));
}

#[test]
fn baseline_and_probe_outputs() {
    let dir = tempfile::tempdir().unwrap();
    assert!(gridgame(dir.path(), &["baseline", "--method", "rbd", "--out", "b"]).status.success());
    let b = json(dir.path().join("b/baseline.json"));
    assert_eq!(b["policy"]["kind"], "reactive");
    assert_eq!(b["policy"]["response"].as_array().unwrap().len(), 10);
    assert!(gridgame(dir.path(), &["probe", "--out", "p"]).status.success());
    let probe = fs::read_to_string(dir.path().join("p/probe.csv")).unwrap();
    assert!(probe.lines().nth(1).unwrap().starts_with("ieee33,,33,4,4,41,"));
}
