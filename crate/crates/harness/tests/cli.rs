use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn seqmeas(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_seqmeas"))
        .args(args)
        .env_remove("SEQMEAS_SEED")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn report(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn counterexample_text_and_json() {
    let o = seqmeas(&["counterexample"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("S(sigma)      1.12467028923762e0"), "{text}");
    assert!(text.contains("minimal pair  false"));

    let o = seqmeas(&["counterexample", "--json"]);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["is_minimal"], false);
    assert!((v["s_sigma"].as_f64().unwrap() - 1.1246703).abs() < 1e-6);
}

#[test]
fn small_checks_pass() {
    for check in ["jcheck", "chain", "klein", "luders", "minimal", "dilation"] {
        let o = seqmeas(&[check, "--trials", "8", "--dims", "2,3", "--seed", "4"]);
        assert_eq!(o.status.code(), Some(0), "{check}: {}", stdout(&o));
        assert!(stdout(&o).ends_with("PASS\n"));
    }
    let o = seqmeas(&["jarzynski", "--trials", "6", "--dims", "2..4", "--beta", "0.5,1"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn input_errors_exit_with_two() {
    assert_eq!(seqmeas(&["jcheck", "--dims", "0,3"]).status.code(), Some(2));
    assert_eq!(seqmeas(&["jcheck", "--dims", "99"]).status.code(), Some(2));
    assert_eq!(seqmeas(&["jarzynski", "--beta", "-1"]).status.code(), Some(2));
    assert_eq!(seqmeas(&["suite", "--config", "/nonexistent.json"]).status.code(), Some(2));
    assert_eq!(seqmeas(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn residual_failures_exit_with_one_and_replay() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let o = seqmeas(&[
        "klein", "--trials", "3", "--dims", "3", "--tol", "1e-300", "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    let r = report(&out);
    let bundle = &r["checks"]["klein"]["failures"][0];
    let path = dir.path().join("bundle.json");
    std::fs::write(&path, serde_json::to_string(bundle).unwrap()).unwrap();
    let o = seqmeas(&["replay", "--bundle", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("reproduced"));
}

#[test]
fn model_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.json");
    // reverse weights sum to 1.2
    std::fs::write(&path, r#"{"pi": [[1, 0], [0, 1]], "x": [1, 0], "x_tilde": [0.5, 0.7]}"#).unwrap();
    let o = seqmeas(&["jcheck", "--model", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));

    // x(1) = 0, so the J-equation needs the regularized branch
    std::fs::write(&path, r#"{"pi": [[1, 0], [0, 1]], "x": [1, 0], "x_tilde": [0.5, 0.5]}"#).unwrap();
    let o = seqmeas(&["jcheck", "--model", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("regularized      true"));

    std::fs::write(&path, r#"{"pi": [[1, 0]], "x": [1, 0, 3], "x_tilde": [1]}"#).unwrap();
    assert_eq!(seqmeas(&["jcheck", "--model", path.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn suite_config_env_seed_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("config.json");
    std::fs::write(
        &cfg,
        r#"{"seed": 1, "dims": [2, 3], "trials": 5, "check_set": ["jcheck", "luders", "counterexample"]}"#,
    )
    .unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    let run = |out: &Path, seed: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_seqmeas"));
        cmd.args(["suite", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        match seed {
            Some(s) => cmd.env("SEQMEAS_SEED", s),
            None => cmd.env_remove("SEQMEAS_SEED"),
        };
        cmd.output().unwrap()
    };
    assert_eq!(run(&a, None).status.code(), Some(0));
    assert_eq!(run(&b, None).status.code(), Some(0));
    let (ra, rb) = (report(&a), report(&b));
    assert_eq!(ra["checks"], rb["checks"]);
    assert_eq!(ra["config"]["seed"], 1);

    assert_eq!(run(&b, Some("77")).status.code(), Some(0));
    assert_eq!(report(&b)["config"]["seed"], 77);
    assert_eq!(run(&b, Some("x")).status.code(), Some(2));
}
