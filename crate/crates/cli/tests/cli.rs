use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn sirbf(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sirbf"))
        .args(args)
        .current_dir(dir)
        .env_remove("SIRBF_OUTPUT_DIR")
        .output()
        .unwrap()
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = sirbf(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn json(text: &str) -> serde_json::Value {
    serde_json::from_str(text).unwrap()
}

#[test]
fn simulate_then_score_complete_data() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["simulate", "--model", "exp", "--beta", "2", "--gamma", "1", "--pop", "25", "--seed", "3", "--condition", "--out", "o.csv"]);
    let text = fs::read_to_string(d.join("o.csv")).unwrap();
    assert!(text.starts_with("# population: 25\nlabel,infection_time,removal_time\n"));
    // same seed, same file
    let again = ok(d, &["simulate", "--model", "exp", "--beta", "2", "--gamma", "1", "--pop", "25", "--seed", "3", "--condition"]);
    assert_eq!(again, text);

    let ll = json(&ok(d, &["loglik", "--data", "o.csv", "--model", "exp", "--beta", "2", "--gamma", "1"]));
    let parts = &ll["log_likelihood"];
    let total = parts["total"].as_f64().unwrap();
    assert!(total.is_finite());
    assert!((parts["infection"].as_f64().unwrap() + parts["removal"].as_f64().unwrap() - total).abs() < 1e-9);

    let bf = json(&ok(d, &["bf-complete", "--data", "o.csv", "--comparison", "exp-gamma", "--alpha", "1", "--diffuse"]));
    assert_eq!(bf["schema_version"], 1);
    assert!(bf["result"]["log_bf"].as_f64().unwrap().abs() < 1e-10);
    let bf = json(&ok(d, &["bf-complete", "--data", "o.csv", "--comparison", "standard-power", "--p", "1", "--priors", "exp:0.1"]));
    assert_eq!(bf["result"]["log_bf"].as_f64().unwrap(), 0.0);
    assert_eq!(bf["result"]["variant"], "standard_vs_power_full");
}

#[test]
fn evidence_dic_and_curves() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["dataset", "abakaliki", "--out", "ab.csv"]);
    let quick = ["--iters", "1500", "--burnin", "300", "--thin", "3", "--seed", "4"];
    let mut args = vec!["evidence", "--data", "ab.csv", "--model", "exp", "--r", "3", "--out", "ev.json", "--curve", "curve.csv"];
    args.extend(quick);
    ok(d, &args);
    let ev = json(&fs::read_to_string(d.join("ev.json")).unwrap());
    assert_eq!(ev["kind"], "evidence");
    assert_eq!(ev["seed"], 4);
    assert!(ev["result"]["log_marginal"].as_f64().unwrap().is_finite());
    let curve = fs::read_to_string(d.join("curve.csv")).unwrap();
    assert_eq!(curve.lines().count(), 5);

    let mut args = vec!["evidence", "--data", "ab.csv", "--model", "exp", "--against", "gamma:2", "--r", "2", "--priors", "{\"beta\":{\"shape\":1,\"rate\":1},\"gamma\":{\"shape\":1,\"rate\":1},\"delta\":{\"shape\":1,\"rate\":1}}"];
    args.extend(quick);
    let bf = json(&ok(d, &args));
    assert_eq!(bf["kind"], "bayes-factor");
    let r = &bf["result"];
    let diff = r["first"]["log_marginal"].as_f64().unwrap() - r["second"]["log_marginal"].as_f64().unwrap();
    assert!((r["log_bf"].as_f64().unwrap() - diff).abs() < 1e-9);

    let mut args = vec!["dic", "--data", "ab.csv", "--model", "exp", "--out", "dic.json", "--trace", "trace.csv"];
    args.extend(quick);
    ok(d, &args);
    let dic = json(&fs::read_to_string(d.join("dic.json")).unwrap())["result"].clone();
    let expected = -4.0 * dic["first_run_mean"].as_f64().unwrap() + 2.0 * dic["plugin_mean"].as_f64().unwrap();
    assert_eq!(dic["dic6"].as_f64().unwrap(), expected);
    let trace = fs::read_to_string(d.join("trace.csv")).unwrap();
    assert_eq!(trace.lines().count(), 1 + 400);
}

#[test]
fn output_dir_and_reproduce() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let summary = ok(d, &["--output-dir", "results", "reproduce", "--table", "2", "--scale", "10", "--seed", "1", "--out", "t2"]);
    assert_eq!(summary.lines().count(), 24);
    let csv = fs::read_to_string(d.join("results/t2/table2.csv")).unwrap();
    assert_eq!(csv.lines().count(), 25);
    assert!(d.join("results/t2/table2.json").exists());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let code = |args: &[&str]| sirbf(d, args).status.code().unwrap();
    assert_eq!(code(&["simulate", "--model", "bogus", "--beta", "1", "--gamma", "1", "--pop", "5"]), 2);
    assert_eq!(code(&["simulate", "--model", "exp", "--beta", "-1", "--gamma", "1", "--pop", "5"]), 2);
    assert_eq!(code(&["no-such-command"]), 2);
    fs::write(d.join("bad.csv"), "# population: 5\nlabel,infection_time,removal_time\n1,0,2\n2,3,1\n").unwrap();
    let out = sirbf(d, &["loglik", "--data", "bad.csv", "--model", "exp", "--beta", "1", "--gamma", "1"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 4") && err.contains("case 2"), "{err}");
    // a missing file is a runtime failure, not a validation error
    assert_eq!(code(&["loglik", "--data", "missing.csv", "--model", "exp", "--beta", "1", "--gamma", "1"]), 1);
    fs::write(d.join("r.csv"), "label,removal_time\n1,0\n2,1.5\n").unwrap();
    assert_eq!(code(&["evidence", "--data", "r.csv", "--pop", "3", "--model", "exp", "--iters", "10", "--burnin", "20"]), 2);
    assert_eq!(code(&["evidence", "--data", "r.csv", "--model", "exp"]), 2);
}
