//! End-to-end checks of the `cpc` binary: exit codes, determinism of the
//! written CSVs, and the run -> recover round trip.

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cpc"))
}

fn tmp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("cpc-bin-{}-{}", tag, std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn write(path: &PathBuf, body: &str) {
    fs::write(path, body).unwrap();
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

const SMALL_CONFIG: &str = r#"{
  "name": "bin-smoke",
  "instance": { "kind": "inequality", "d": 2, "n": 3, "seed": 5 },
  "stop": { "eps": 0.05, "max_rounds": 100 },
  "repetitions": 2,
  "seed": 11
}"#;

#[test]
fn validate_reports_ok_with_exit_zero() {
    let dir = tmp_dir("validate-ok");
    let cfg = dir.join("cfg.json");
    write(&cfg, SMALL_CONFIG);
    let out = bin().arg("validate").arg(&cfg).output().unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).starts_with("OK:"), "{}", stdout(&out));
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn config_problems_exit_with_code_two() {
    let dir = tmp_dir("validate-bad");

    // Semantic problem: negative eps.
    let cfg = dir.join("bad_eps.json");
    write(
        &cfg,
        r#"{
  "instance": { "kind": "inequality", "d": 2, "n": 3, "seed": 5 },
  "stop": { "eps": -0.5 }
}"#,
    );
    let out = bin().arg("validate").arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
    assert!(stderr(&out).contains("stop.eps"), "{}", stderr(&out));

    // Schema problem: unknown field, message anchored to its line.
    let cfg = dir.join("bad_field.json");
    write(
        &cfg,
        "{\n  \"instance\": { \"kind\": \"inequality\", \"d\": 2, \"n\": 3, \"seed\": 5 },\n  \"epz\": 0.5\n}",
    );
    let out = bin().arg("validate").arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let msg = stderr(&out);
    assert!(msg.contains("bad_field.json") && msg.contains("line 3"), "{msg}");

    // Missing file: configs must reference files that exist.
    let out = bin().arg("validate").arg(dir.join("nope.json")).output().unwrap();
    assert_eq!(out.status.code(), Some(2));

    // Fault plan naming a node outside the network, checked at run time too.
    let cfg = dir.join("bad_fault.json");
    write(
        &cfg,
        r#"{
  "instance": { "kind": "inequality", "d": 2, "n": 3, "seed": 5 },
  "faults": [{ "node": 7, "round": 2 }]
}"#,
    );
    let out = bin().arg("run").arg(&cfg).arg("--out-dir").arg(dir.join("out")).output().unwrap();
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
    assert!(stderr(&out).contains("fault names node 7"), "{}", stderr(&out));

    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn rerunning_a_config_reproduces_identical_csv_bytes() {
    let dir = tmp_dir("determinism");
    let cfg = dir.join("cfg.json");
    write(&cfg, SMALL_CONFIG);

    for sub in ["a", "b"] {
        let out = bin()
            .arg("run")
            .arg(&cfg)
            .arg("--out-dir")
            .arg(dir.join(sub))
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", stderr(&out));
    }
    for name in ["plot_data.csv", "runlog_n0003_rep00.csv", "runlog_n0003_rep01.csv"] {
        let a = fs::read(dir.join("a").join(name)).unwrap();
        let b = fs::read(dir.join("b").join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between identical runs");
    }

    // The seed override flows through and changes the trace.
    let out = bin()
        .arg("run")
        .arg(&cfg)
        .arg("--seed")
        .arg("999")
        .arg("--out-dir")
        .arg(dir.join("c"))
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    let a = fs::read(dir.join("a").join("runlog_n0003_rep00.csv")).unwrap();
    let c = fs::read(dir.join("c").join("runlog_n0003_rep00.csv")).unwrap();
    assert_ne!(a, c, "seed override had no effect");

    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn out_dir_env_var_is_the_default_sink() {
    let dir = tmp_dir("env-out");
    let cfg = dir.join("cfg.json");
    write(&cfg, SMALL_CONFIG);
    let out = bin()
        .arg("run")
        .arg(&cfg)
        .env("CPC_OUT_DIR", dir.join("from_env"))
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(dir.join("from_env").join("plot_data.csv").exists());
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn run_then_recover_round_trips_through_the_binary() {
    let dir = tmp_dir("recover");
    let inst = dir.join("toy.json");
    write(&inst, r#"{ "kind": "colgen_toy", "r": 2, "n": 3, "seed": 21 }"#);
    let cfg = dir.join("cfg.json");
    write(
        &cfg,
        r#"{
  "instance": { "path": "toy.json" },
  "stop": { "eps": 0.01, "max_rounds": 200 },
  "repetitions": 1,
  "flood_after_stop": true,
  "seed": 2
}"#,
    );
    let out_dir = dir.join("out");
    let out = bin().arg("run").arg(&cfg).arg("--out-dir").arg(&out_dir).output().unwrap();
    assert!(out.status.success(), "{}", stderr(&out));

    let columns = out_dir.join("columns_n0003_rep00.json");
    assert!(columns.exists());
    let out = bin()
        .arg("recover")
        .arg(&columns)
        .arg(&inst)
        .arg("--out-dir")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(report["balance_residual"].as_f64().unwrap() < 1e-6);
    assert!(out_dir.join("recovered.json").exists());

    // Claiming the wrong family is a configuration error.
    let wrong = dir.join("wrong.json");
    write(&wrong, r#"{ "kind": "localization" }"#);
    let out = bin().arg("recover").arg(&columns).arg(&wrong).output().unwrap();
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));

    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn reference_prints_the_optimizer_as_json() {
    let dir = tmp_dir("reference");
    let inst = dir.join("toy.json");
    write(&inst, r#"{ "kind": "inequality", "d": 2, "n": 3, "seed": 5 }"#);
    let out = bin().arg("reference").arg(&inst).output().unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let z = report["instances"][0]["z_ref"].as_array().unwrap();
    assert_eq!(z.len(), 2);
    assert!(report["instances"][0]["gamma"].is_number());
    let _ = fs::remove_dir_all(&dir);
}
