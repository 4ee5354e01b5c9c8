mod common;

use std::fs;
use std::path::Path;

use common::simulated;
use proptest::prelude::*;
use sirbf::io::{load_csv, load_json, parse_csv_str, save_csv, save_json, save_trace, to_csv_string, Report};
use sirbf::mcmc::{run_chain, EpidemicData, McmcConfig};
use sirbf::{Error, Exponent, Mechanism, ModelSpec, Params, PriorSpec};

fn corpus(target: &str) -> Vec<(String, Vec<u8>)> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<_> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| {
            let p = e.unwrap().path();
            (p.display().to_string(), fs::read(&p).unwrap())
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "empty corpus for {target}");
    out
}

#[test]
fn fuzz_corpus_replays_cleanly() {
    for (name, bytes) in corpus("parse_csv") {
        let Ok(text) = std::str::from_utf8(&bytes) else { continue };
        if let Ok(d) = parse_csv_str(text, None) {
            let again = parse_csv_str(&to_csv_string(&d), None).unwrap();
            assert_eq!(to_csv_string(&again), to_csv_string(&d), "{name}");
        }
    }
    for (name, bytes) in corpus("parse_model") {
        if let Ok(m) = String::from_utf8_lossy(&bytes).parse::<ModelSpec>() {
            assert_eq!(m.to_string().parse::<ModelSpec>().unwrap(), m, "{name}");
        }
    }
    for (_, bytes) in corpus("parse_priors") {
        if let Ok(p) = PriorSpec::from_json(&String::from_utf8_lossy(&bytes)) {
            p.validate().unwrap();
        }
    }
    for (_, bytes) in corpus("parse_mcmc_config") {
        if let Ok(c) = McmcConfig::from_json(&String::from_utf8_lossy(&bytes)) {
            c.validate().unwrap();
        }
    }
}

#[test]
fn file_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let o = simulated(ModelSpec::gamma(3.0), Params::new(2.0, 3.0), 25, 1);
    let complete: EpidemicData = o.clone().into();
    let path = dir.path().join("nested/complete.csv");
    save_csv(&path, &complete).unwrap();
    assert_eq!(load_csv(&path, None).unwrap(), complete);
    let removals: EpidemicData = o.removals().into();
    let path = dir.path().join("removals.csv");
    save_csv(&path, &removals).unwrap();
    let back = load_csv(&path, None).unwrap();
    assert_eq!(back.removal_times(), removals.removal_times());
    assert_eq!(back.population(), 25);
    // the explicit population wins over the comment
    assert_eq!(load_csv(&path, Some(40)).unwrap().population(), 40);

    let report = Report::new("outbreak", Some(1), serde_json::json!({"n": 25}), o.clone());
    let path = dir.path().join("report.json");
    save_json(&path, &report).unwrap();
    let back: Report<sirbf::Outbreak> = load_json(&path).unwrap();
    assert_eq!(back, report);
}

#[test]
fn missing_file_names_the_path() {
    let e = load_csv("/definitely/not/here.csv", Some(3)).unwrap_err();
    assert!(matches!(e, Error::File { .. }));
    assert!(e.to_string().contains("/definitely/not/here.csv"));
}

#[test]
fn trace_columns_follow_the_model() {
    let dir = tempfile::tempdir().unwrap();
    let data: EpidemicData = simulated(ModelSpec::exponential(), Params::new(2.0, 1.0), 15, 2).removals().into();
    let model = ModelSpec::exponential().with_mechanism(Mechanism::PowerY { exponent: Exponent::Inferred });
    let out = run_chain(&data, &model, &PriorSpec::default(), 1.0, &McmcConfig::short(300, 100, 10, 3)).unwrap();
    let path = dir.path().join("trace.csv");
    save_trace(&path, &out).unwrap();
    let text = fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "iteration,beta,removal_rate,p,initial_case,initial_time,log_aug_lik");
    assert_eq!(lines.count(), out.samples.len());
}

proptest! {
    #[test]
    fn parser_never_panics(text in "\\PC{0,200}") {
        let _ = parse_csv_str(&text, None);
        let _ = parse_csv_str(&text, Some(10));
        let _ = text.parse::<ModelSpec>();
        let _ = PriorSpec::from_json(&text);
        let _ = McmcConfig::from_json(&text);
    }

    #[test]
    fn structured_rows_round_trip(times in proptest::collection::vec((0.0f64..100.0, 0.001f64..50.0), 1..30)) {
        let mut text = format!("# population: {}\nlabel,infection_time,removal_time\n", times.len() + 3);
        for (k, (i, d)) in times.iter().enumerate() {
            text.push_str(&format!("{},{},{}\n", k + 1, i, i + d));
        }
        // structurally valid rows may still describe an impossible outbreak
        if let Ok(d) = parse_csv_str(&text, None) {
            prop_assert_eq!(parse_csv_str(&to_csv_string(&d), None).unwrap(), d);
        }
    }
}
