use std::fs;
use std::process::{Command, Output};

fn mbhash(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mbhash")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).unwrap()
}

#[test]
fn thresholds_json() {
    let o = mbhash(&["thresholds", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    let bell = v["reports"]
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r["target"] == "bell" && r["convention"] == "paper_product")
        .unwrap();
    assert!((bell["tolerable_noise"].as_f64().unwrap() - 0.0688).abs() < 1e-4);
    assert!((v["f_min"].as_f64().unwrap() - 0.8107).abs() < 2e-4);
}

#[test]
fn thresholds_for_one_target() {
    let v = json(&mbhash(&["thresholds", "--target", "cluster1d"]));
    let reports = v["reports"].as_array().unwrap();
    assert!(reports.iter().all(|r| r["target"] == "cluster1d"));
    assert!((reports[0]["q_min"].as_f64().unwrap() - 0.9204).abs() < 1e-3);
}

#[test]
fn thresholds_csv() {
    let out = stdout(&mbhash(&["thresholds", "--format", "csv"]));
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("target,convention,q_min,p_min,tolerable_noise"));
    assert_eq!(lines.count(), 4);
}

#[test]
fn malformed_target_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.json");
    let o = mbhash(&["thresholds", "--target", "torus", "--output", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!path.exists());
}

#[test]
fn yield_curve_csv() {
    let o = mbhash(&["yield-curve", "--q-from", "0.8", "--q-to", "1", "--steps", "201"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(!out.contains('\r'));
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("q,raw_yield,clamped_yield"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 201);
    assert_eq!(rows[0][0], 0.8);
    assert_eq!(rows[200], vec![1.0, 1.0, 1.0]);
    let sign_changes = rows.windows(2).filter(|w| (w[0][1] < 0.0) != (w[1][1] < 0.0)).count();
    assert_eq!(sign_changes, 1);
    assert!(rows.iter().all(|r| r[2] == r[1].max(0.0)));
}

#[test]
fn yield_curve_bell_example() {
    let out = stdout(&mbhash(&["yield-curve", "--q-from", "0.95", "--q-to", "1", "--steps", "2"]));
    assert_eq!(out, "q,raw_yield,clamped_yield\n0.95,0.5066208317,0.5066208317\n1,1,1\n");
}

#[test]
fn yield_curve_cluster_and_file_output() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("curve.csv");
    let o = mbhash(&["yield-curve", "--target", "cluster2d", "--steps", "11", "--output", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    assert_eq!(fs::read_to_string(&path).unwrap().lines().count(), 12);
}

#[test]
fn inverted_range_is_rejected() {
    assert_eq!(mbhash(&["yield-curve", "--q-from", "0.9", "--q-to", "0.8"]).status.code(), Some(2));
    assert_eq!(mbhash(&["yield-curve", "--steps", "1"]).status.code(), Some(2));
}

#[test]
fn perfect_simulation() {
    let o = mbhash(&["simulate", "--n", "64", "--q", "1", "--p", "1", "--trials", "100", "--seed", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["decode_success_rate"], 1.0);
    assert_eq!(v["mean_output_fidelity"], 1.0);
    assert_eq!(v["config"]["seed"], 3);
    for key in ["predicted_output_fidelity", "yield_asymptotic", "yield_empirical", "trials"] {
        assert!(v.get(key).is_some(), "{key}");
    }
}

#[test]
fn simulation_reports_are_byte_identical() {
    let args = ["simulate", "--n", "128", "--fidelity", "0.95", "--p", "0.99", "--trials", "40", "--seed", "9"];
    let a = mbhash(&args);
    let b = Command::new(env!("CARGO_BIN_EXE_mbhash")).args(args).env("MBHASH_THREADS", "3").output().unwrap();
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn noisy_resources_match_prediction() {
    let o = mbhash(&["simulate", "--n", "1024", "--p", "0.98", "--q", "0.99", "--trials", "200", "--seed", "11"]);
    let v = json(&o);
    let (mean, se) = (v["mean_output_fidelity"].as_f64().unwrap(), v["fidelity_std_error"].as_f64().unwrap());
    let predicted = v["predicted_output_fidelity"].as_f64().unwrap();
    assert!((predicted - 0.9703).abs() < 1e-12);
    assert!((mean - predicted).abs() <= 3.0 * se, "{mean} ± {se}");
}

#[test]
fn gate_execution_has_no_prediction() {
    let o = mbhash(&[
        "simulate", "--n", "64", "--fidelity", "0.95", "--execution", "gate", "--gate-noise", "0.995", "--trials", "10",
        "--seed", "1",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(json(&o)["predicted_output_fidelity"].is_null());
}

#[test]
fn below_threshold_is_infeasible() {
    let o = mbhash(&["simulate", "--n", "64", "--fidelity", "0.78", "--delta", "0", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(json(&o)["reason"], "below hashing threshold");
}

#[test]
fn simulate_requires_a_seed() {
    assert_eq!(mbhash(&["simulate", "--n", "64", "--fidelity", "0.95"]).status.code(), Some(2));
    assert_eq!(mbhash(&["simulate", "--n", "64", "--seed", "1"]).status.code(), Some(2));
    assert_eq!(mbhash(&["simulate", "--n", "64", "--fidelity", "1.5", "--seed", "1"]).status.code(), Some(2));
}

#[test]
fn config_file_supplies_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    fs::write(&cfg, "# defaults\nn = 64\nfidelity = 1\ntrials = 5\nseed = 4\n").unwrap();
    let o = mbhash(&["simulate", "--config", cfg.to_str().unwrap(), "--trials", "7"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&o);
    assert_eq!(v["trials"], 7);
    assert_eq!(v["config"]["seed"], 4);
}

#[test]
fn bad_thread_count_is_a_usage_error() {
    let o = Command::new(env!("CARGO_BIN_EXE_mbhash")).args(["thresholds"]).env("MBHASH_THREADS", "zero").output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn selftest_passes_and_is_seed_stable() {
    for seed in ["2024", "7"] {
        let o = mbhash(&["selftest", "--seed", seed]);
        assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
        let out = stdout(&o);
        for suite in ["pauli_core", "noise", "resource", "engine", "analytics"] {
            assert!(out.lines().any(|l| l.starts_with("PASS") && l.contains(suite)), "{out}");
        }
    }
}

#[test]
fn injected_fault_fails_the_noise_suite() {
    let o = mbhash(&["selftest", "--inject-fault", "ldn-identity"]);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    assert!(out.lines().any(|l| l.starts_with("FAIL") && l.contains("noise")));
    assert!(out.lines().filter(|l| l.starts_with("FAIL")).count() == 1);
}
