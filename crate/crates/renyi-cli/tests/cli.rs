use std::process::{Command, Output};

use serde_json::Value;

fn renyi(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_renyi"))
        .args(args)
        .env_remove("RENYI_WORKERS")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("json output")
}

fn tmp(name: &str, body: &str) -> String {
    let dir = std::env::temp_dir().join(format!("renyi-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn capacity_of_useless_channel() {
    let v = json(&renyi(&[
        "capacity",
        "--channel",
        "bsc:0.5",
        "--order",
        "0.5",
    ]));
    assert!(v["result"]["value"].as_f64().unwrap().abs() < 1e-12);
    assert!(v["result"]["duality_gap"].as_f64().unwrap().abs() < 1e-12);
    assert_eq!(v["config"]["command"], "capacity");
    assert_eq!(v["config"]["order"], 0.5);
}

#[test]
fn sphere_packing_vanishes_at_capacity() {
    let c = json(&renyi(&["capacity", "--channel", "bsc:0.1"]))["result"]["value"]
        .as_f64()
        .unwrap();
    let v = json(&renyi(&[
        "exponent",
        "sp",
        "--channel",
        "bsc:0.1",
        "--rate",
        &c.to_string(),
    ]));
    assert!(v["result"]["value"].as_f64().unwrap().abs() < 1e-8);
}

#[test]
fn verify_pinsker_passes() {
    let out = renyi(&[
        "verify",
        "--suite",
        "pinsker",
        "--instances",
        "10000",
        "--seed",
        "7",
        "--format",
        "csv",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("# config "));
    assert_eq!(
        lines[1],
        "suite,instances,checks,violations,worst_slack,tolerance,passed"
    );
    assert!(lines[2].starts_with("pinsker,10000,10000,0,") && lines[2].ends_with(",true"));
}

#[test]
fn capacity_curve_is_monotone() {
    let v = json(&renyi(&[
        "report",
        "curve",
        "--channel",
        "bsc:0.1",
        "--points",
        "64",
    ]));
    let rows = v["result"].as_array().unwrap();
    assert_eq!(rows.len(), 64);
    let caps: Vec<f64> = rows
        .iter()
        .map(|r| r["capacity"].as_f64().unwrap())
        .collect();
    assert!(caps.windows(2).all(|w| w[1] >= w[0] - 1e-12));
}

#[test]
fn config_file_precedence() {
    let path = tmp(
        "cfg.json",
        r#"{"channel": "bsc:0.1", "order": 2.0, "format": "json"}"#,
    );
    let from_file = json(&renyi(&["capacity", "--config", &path]));
    assert_eq!(from_file["config"]["order"], 2.0);
    let flagged = json(&renyi(&["capacity", "--config", &path, "--order", "0.5"]));
    assert_eq!(flagged["config"]["order"], 0.5);
    assert_eq!(flagged["config"]["channel"], "bsc:0.1");
    let bad = tmp("bad.json", r#"{"ordre": 2.0}"#);
    assert_eq!(
        renyi(&["capacity", "--config", &bad]).status.code(),
        Some(4)
    );
}

#[test]
fn channel_files_and_exit_codes() {
    let path = tmp("ch.json", r#"{"rows": [[0.9, 0.1], [0.2, 0.8]]}"#);
    let before = std::fs::read_to_string(&path).unwrap();
    json(&renyi(&["capacity", "--channel", &path]));
    assert_eq!(std::fs::read_to_string(&path).unwrap(), before);
    assert_eq!(
        renyi(&["capacity", "--channel", "bsc:1.5"]).status.code(),
        Some(2)
    );
    assert_eq!(
        renyi(&["capacity", "--channel", "/no/such/file.json"])
            .status
            .code(),
        Some(4)
    );
    let bad = tmp("ns.json", r#"[[0.5, 0.6]]"#);
    assert_eq!(
        renyi(&["capacity", "--channel", &bad]).status.code(),
        Some(2)
    );
    assert_eq!(
        renyi(&["capacity", "--channel", "bsc:0.1", "--format", "xml"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(renyi(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn require_binding_exit_code() {
    let args = [
        "bound",
        "spb-feedback",
        "--channel",
        "bsc:0.1",
        "-M",
        "4",
        "-n",
        "3",
        "--kappa",
        "2",
        "--eps",
        "0.05",
        "--a0",
        "0.3",
        "--a1",
        "0.6",
    ];
    let out = renyi(&args);
    let v = json(&out);
    assert_eq!(v["result"]["lemma"], "spb_feedback");
    assert_eq!(v["result"]["hypothesis_satisfied"], false);
    let mut strict = args.to_vec();
    strict.push("--require-binding");
    assert_eq!(renyi(&strict).status.code(), Some(3));
}

#[test]
fn bound_reports_carry_constants() {
    let v = json(&renyi(&[
        "bound",
        "gallager",
        "--channel",
        "bsc:0.1",
        "-M",
        "4",
        "-n",
        "1",
        "--order",
        "0.6",
    ]));
    assert!(v["result"]["lemma"].as_str().is_some());
    assert!(v["result"]["constants"]
        .as_object()
        .unwrap()
        .contains_key("information"));
    let csv = renyi(&[
        "bound",
        "arimoto",
        "--channel",
        "bsc:0.1",
        "-M",
        "8",
        "-n",
        "3",
        "--format",
        "csv",
    ]);
    let text = String::from_utf8(csv.stdout).unwrap();
    assert!(text
        .lines()
        .nth(1)
        .unwrap()
        .starts_with("lemma,direction,binding,value,ln_value,"));
}

#[test]
fn poisson_closed_form() {
    let v = json(&renyi(&[
        "poisson",
        "capacity",
        "--duration",
        "2",
        "--ceiling",
        "3",
        "--order",
        "0.5",
    ]));
    assert!((v["result"]["capacity"].as_f64().unwrap() - 1.5).abs() < 1e-9);
}

#[test]
fn workers_do_not_change_results() {
    let run = |w: &str| {
        let out = Command::new(env!("CARGO_BIN_EXE_renyi"))
            .args([
                "verify",
                "--suite",
                "berry,sandwich",
                "--instances",
                "200",
                "--seed",
                "11",
            ])
            .env("RENYI_WORKERS", w)
            .output()
            .unwrap();
        let v: Value = serde_json::from_slice(&out.stdout).unwrap();
        v["result"].clone()
    };
    assert_eq!(run("1"), run("3"));
}
