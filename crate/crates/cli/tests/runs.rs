use std::fs;
use std::process::Command;

use qhs_cli::runner::{DISTRIBUTION_CSV, REPORT_JSON, SAMPLES_CSV, SWEEP_CSV};
use qhs_cli::{parse_config, run_experiment, ReportBody};

fn run(text: &str) -> (tempfile::TempDir, qhs_cli::ExperimentReport) {
    let dir = tempfile::tempdir().unwrap();
    let report = run_experiment(&parse_config(text).unwrap(), dir.path()).unwrap();
    (dir, report)
}

#[test]
fn simon_recovers_the_brute_force_subgroup() {
    let (_d, report) = run(r#"{"experiment":"simon","group":"Z2^3","hidden_generators":[[1,0,1]],"trials":20,"seed":5}"#);
    let ReportBody::Simon(r) = report.body else { panic!() };
    assert!(r.matches_brute_force);
    assert!(r.confirmed);
    assert_eq!(r.recovered.elements, ["000", "101"]);
    assert_eq!(r.trials_used, 20);
}

#[test]
fn exact_shor_case_has_unit_peak_mass() {
    let (dir, report) = run(r#"{"experiment":"shor","N":15,"a":7,"Q":16,"transversal":{"kind":"shor"},"seed":1}"#);
    let ReportBody::Shor(r) = &report.body else { panic!() };
    assert_eq!(r.peak_mass.0, 1.0);
    assert_eq!(r.r_true, 4);
    let json = fs::read_to_string(dir.path().join(REPORT_JSON)).unwrap();
    assert!(json.contains("\"peak_mass\": 1.0000000000000000e0"), "{json}");
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v["r_true"], 4);
}

#[test]
fn reruns_are_byte_identical() {
    for text in [
        r#"{"experiment":"simulate","group":"D4","hidden_generators":["r^2"],"trials":200,"seed":12}"#,
        r#"{"experiment":"simulate","group":"Z2xZ6","hidden_generators":[[1,3]],"trials":64,"seed":3}"#,
        r#"{"experiment":"simon","group":"Z2^5","hidden_generators":["10110","01011"],"trials":8,"seed":99}"#,
        r#"{"experiment":"shor","N":21,"a":2,"Q":512,"transversal":{"kind":"offset","bound":21},"trials":30,"seed":7}"#,
        r#"{"experiment":"sweep-transversal","N":21,"a":2,"Q":64,"transversal":{"kind":"offset","bound":21},"seeds":12,"seed":7}"#,
    ] {
        let (a, _) = run(text);
        let (b, _) = run(text);
        for name in [DISTRIBUTION_CSV, SAMPLES_CSV, SWEEP_CSV, REPORT_JSON] {
            let pa = a.path().join(name);
            if pa.exists() {
                assert_eq!(fs::read(&pa).unwrap(), fs::read(b.path().join(name)).unwrap(), "{text}: {name}");
            }
        }
    }
}

#[test]
fn seed_changes_samples() {
    let (a, _) = run(r#"{"experiment":"simulate","group":"Z16","hidden_generators":[8],"trials":50,"seed":1}"#);
    let (b, _) = run(r#"{"experiment":"simulate","group":"Z16","hidden_generators":[8],"trials":50,"seed":2}"#);
    assert_eq!(fs::read(a.path().join(DISTRIBUTION_CSV)).unwrap(), fs::read(b.path().join(DISTRIBUTION_CSV)).unwrap());
    assert_ne!(fs::read(a.path().join(SAMPLES_CSV)).unwrap(), fs::read(b.path().join(SAMPLES_CSV)).unwrap());
}

#[test]
fn recover_ranks_the_simulated_subgroup_first() {
    let (sim, _) = run(r#"{"experiment":"simulate","group":"D4","hidden_generators":["r^2"],"seed":1}"#);
    let dist = sim.path().join(DISTRIBUTION_CSV);
    let text = format!(r#"{{"experiment":"recover","group":"D4","dist":{}}}"#, serde_json::to_string(&dist).unwrap());
    let (_d, report) = run(&text);
    let ReportBody::Recover(r) = report.body else { panic!() };
    assert_eq!(r.candidates.len(), 10);
    let hit = r.candidates.iter().find(|c| c.subgroup.elements == ["e", "r^2"]).unwrap();
    assert!(hit.distance.0 < 1e-10);
    assert_eq!(r.candidates[hit.tie_class].distance.0, r.candidates[0].distance.0);
}

fn qhs(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_qhs")).args(args).output().unwrap();
    (out.status.code().unwrap(), String::from_utf8(out.stdout).unwrap())
}

#[test]
fn binary_exit_codes_and_csv_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let (code, csv) = qhs(&["--out-dir", out, "--format", "csv", "shor", "--N", "15", "--a", "7", "--Q", "16"]);
    assert_eq!(code, 0);
    assert_eq!(csv.trim_end(), fs::read_to_string(dir.path().join(DISTRIBUTION_CSV)).unwrap().trim_end());
    assert!(csv.starts_with("outcome_label,probability\n0,2.5000000000000000e-1\n"));

    assert_eq!(qhs(&["--out-dir", out, "shor", "--N", "15", "--a", "5", "--Q", "16"]).0, 2);
    assert_eq!(qhs(&["--out-dir", out, "shor", "--N", "15", "--a", "7", "--Q", "8192"]).0, 3);
    assert_eq!(qhs(&["--out-dir", out, "irreps", "Z9000"]).0, 3);
    assert_eq!(qhs(&["--out-dir", out, "bogus"]).0, 2);

    let (code, json) = qhs(&["--out-dir", out, "fourier", "D6", "--check"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v["completeness_defect"], 0);
    assert!(v["max_schur_residual"].as_f64().unwrap() < 1e-12);

    let (code, json) = qhs(&[
        "--out-dir", out, "--seed", "4", "simulate", "--instance", r#"{"group":"D4","hidden_generators":["s"]}"#, "--trials", "10",
    ]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v["samples"].as_array().unwrap().len(), 10);
    assert_eq!(v["norms"].as_array().unwrap().len(), 4);

    let (code, csv) = qhs(&["--out-dir", out, "--format", "csv", "sweep-transversal", "--N", "21", "--a", "2", "--Q", "64", "--bound", "21", "--seeds", "3"]);
    assert_eq!(code, 0);
    assert_eq!(csv.lines().count(), 4);
    assert!(csv.starts_with("seed,peak_mass_shor,peak_mass_offset\n"));
}
