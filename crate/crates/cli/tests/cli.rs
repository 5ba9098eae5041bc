use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn mzfid(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mzfid"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

/// Data rows split on commas; header skipped.
fn data_rows(csv: &str) -> Vec<Vec<f64>> {
    csv.lines()
        .skip(1)
        .map(|l| {
            l.split(',')
                .map(|f| f.parse::<f64>().unwrap_or(f64::NAN))
                .collect()
        })
        .collect()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn probs_single_photon_table() {
    let text = stdout(&mzfid(&["probs", "--state", "fock", "--n", "1", "--grid", "8"]));
    assert_eq!(text.lines().next().unwrap(), "phi,\"P(0,1)\",\"P(1,0)\"");
    let rows = data_rows(&text);
    assert_eq!(rows.len(), 8);
    for r in &rows {
        assert_eq!(r.len(), 3);
        assert!((r[1] + r[2] - 1.0).abs() < 1e-11);
    }
    assert!(!text.contains('\r'));
}

#[test]
fn probs_noon_two_has_no_coincidences() {
    let rows = data_rows(&stdout(&mzfid(&["probs", "--state", "noon", "--n", "2", "--grid", "8"])));
    assert!(rows.iter().all(|r| r[2] == 0.0));
}

#[test]
fn probs_vacuum_is_certain() {
    let text = stdout(&mzfid(&["probs", "--state", "fock", "--n", "0", "--grid", "16"]));
    let rows = data_rows(&text);
    assert_eq!(rows.len(), 16);
    assert!(rows.iter().all(|r| r.len() == 2 && r[1] == 1.0));
}

#[test]
fn probs_from_coefficient_file_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let coeffs = dir.path().join("state.txt");
    fs::write(&coeffs, "# c0\n0.6 0\n0 0.8\n").unwrap();
    let out = dir.path().join("p.csv");
    stdout(&mzfid(&[
        "probs",
        "--state",
        coeffs.to_str().unwrap(),
        "--grid",
        "32",
        "--out",
        out.to_str().unwrap(),
    ]));
    let rows = data_rows(&fs::read_to_string(&out).unwrap());
    assert_eq!(rows.len(), 32);
    let manifest = read_json(&dir.path().join("p.csv.manifest.json"));
    assert_eq!(manifest["command"], "probs");
    assert_eq!(manifest["parameters"]["grid"], 32);
    assert!(manifest["timestamp"].as_str().unwrap().ends_with('Z'));

    let bad = mzfid(&["probs", "--state", coeffs.to_str().unwrap(), "--n", "3"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(mzfid(&["probs", "--state", "/no/such/file"]).status.code(), Some(2));
    assert_eq!(mzfid(&["probs", "--state", "fock"]).status.code(), Some(2));
    assert_eq!(mzfid(&["probs", "--state", "fock", "--n", "1", "--grid", "1"]).status.code(), Some(2));
    assert_eq!(mzfid(&["fidelity", "--state", "fock", "--n", "41"]).status.code(), Some(2));
    assert_eq!(mzfid(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(
        mzfid(&["simulate", "--state", "fock", "--n", "1", "--phi", "inf", "--shots", "3"]).status.code(),
        Some(2)
    );
    assert_eq!(
        mzfid(&["posterior", "--state", "fock", "--n", "3", "--outcome", "1,1"]).status.code(),
        Some(2)
    );
}

#[test]
fn impossible_outcome_exits_with_three() {
    let out = mzfid(&["posterior", "--state", "noon", "--n", "2", "--outcome", "1,1", "--grid", "64"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("zero-probability outcome"));
}

#[test]
fn resource_cap_exits_with_four() {
    let out = mzfid(&["fidelity", "--state", "fock", "--n", "5", "--repeats", "30", "--cap", "1000", "--grid", "64"]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn posterior_for_fock_25() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("post.csv");
    stdout(&mzfid(&[
        "posterior", "--state", "fock", "--n", "25", "--outcome", "4,21", "--out", out.to_str().unwrap(),
    ]));
    let rows = data_rows(&fs::read_to_string(&out).unwrap());
    assert_eq!(rows.len(), 8192);
    let mass: f64 = rows.iter().map(|r| r[1]).sum::<f64>() * 2.0 * PI / 8192.0;
    assert!((mass - 1.0).abs() < 1e-10);
    let side = read_json(&dir.path().join("post.csv.peaks.json"));
    assert_eq!(side["peak_count"], 2);
    let locs: Vec<f64> = side["peaks"].as_array().unwrap().iter().map(|p| p["location"].as_f64().unwrap()).collect();
    assert!(locs[0] < locs[1]);
    let star = 2.0 * (4.0f64 / 21.0).sqrt().atan();
    assert!((locs[1] - star).abs() <= 2.0 * PI / 8192.0);

    let noon_out = dir.path().join("noon.csv");
    stdout(&mzfid(&[
        "posterior", "--state", "noon", "--n", "25", "--outcome", "4,21", "--out", noon_out.to_str().unwrap(),
    ]));
    let noon_count = read_json(&dir.path().join("noon.csv.peaks.json"))["peak_count"].as_u64().unwrap();
    assert!((2..=4).contains(&noon_count));
}

#[test]
fn posterior_single_photon_closed_form() {
    let rows = data_rows(&stdout(&mzfid(&["posterior", "--state", "fock", "--n", "1", "--outcome", "0,1", "--grid", "256"])));
    for r in rows {
        let expected = (r[0] / 2.0).cos().powi(2) / PI;
        // 12 significant digits in the CSV
        assert!((r[1] - expected).abs() <= 1e-12, "{} vs {}", r[1], expected);
    }
}

#[test]
fn fidelity_single_and_sweep() {
    let one = data_rows(&stdout(&mzfid(&["fidelity", "--state", "fock", "--n", "1"])));
    assert!((one[0][2] - (1.0 / std::f64::consts::LN_2 - 1.0)).abs() < 1e-6);
    let noon = data_rows(&stdout(&mzfid(&["fidelity", "--state", "noon", "--n", "1"])));
    assert!((noon[0][2] - one[0][2]).abs() < 1e-9);

    let text = stdout(&mzfid(&["fidelity", "--sweep", "fock,noon", "--n-max", "25"]));
    let lines: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(lines.len(), 50);
    let h = |state: &str, n: u32| -> f64 {
        let prefix = format!("{state},{n},");
        lines.iter().find(|l| l.starts_with(&prefix)).unwrap()[prefix.len()..].parse().unwrap()
    };
    for n in 2..=25 {
        assert!(h("fock", n) > h("noon", n), "N={n}");
    }
}

#[test]
fn optimize_is_deterministic_and_bounded() {
    let args = ["optimize", "--n", "2", "--seed", "7", "--restarts", "4", "--search-grid", "1024", "--grid", "2048"];
    let a = stdout(&mzfid(&args));
    let b = stdout(&mzfid(&args));
    assert_eq!(a, b);
    let json: Value = serde_json::from_str(&a).unwrap();
    let best = json["best_h_bits"].as_f64().unwrap();
    let fock = data_rows(&stdout(&mzfid(&["fidelity", "--state", "fock", "--n", "2", "--grid", "2048"])))[0][2];
    let noon = data_rows(&stdout(&mzfid(&["fidelity", "--state", "noon", "--n", "2", "--grid", "2048"])))[0][2];
    assert!(best >= fock.max(noon) - 1e-6);
    let coeffs = json["best_state"]["coeffs"].as_array().unwrap();
    assert_eq!(coeffs.len(), 3);
    let norm: f64 = coeffs
        .iter()
        .map(|c| c[0].as_f64().unwrap().powi(2) + c[1].as_f64().unwrap().powi(2))
        .sum();
    assert!((norm - 1.0).abs() < 1e-12);
}

#[test]
fn simulate_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sim.csv");
    stdout(&mzfid(&[
        "simulate", "--state", "fock", "--n", "1", "--phi", "1.5707963267948966", "--shots", "10000", "--seed", "3",
        "--grid", "1024", "--out", out.to_str().unwrap(),
    ]));
    let rows = data_rows(&fs::read_to_string(&out).unwrap());
    assert_eq!(rows.len(), 10_000);
    let freq = rows.iter().filter(|r| r[1] == 1.0).count() as f64 / 10_000.0;
    assert!((0.485..=0.515).contains(&freq), "{freq}");
    let summary = read_json(&dir.path().join("sim.csv.summary.json"));
    let f10 = summary["frequencies"]
        .as_array()
        .unwrap()
        .iter()
        .find(|f| f["n_c"] == 1)
        .unwrap()["frequency"]
        .as_f64()
        .unwrap();
    assert_eq!(f10, freq);
    assert_eq!(summary["peak_count"], 2);
    assert!(dir.path().join("sim.csv.posterior.csv").exists());

    let one = stdout(&mzfid(&["simulate", "--state", "fock", "--n", "2", "--phi", "0.3", "--shots", "1", "--grid", "64"]));
    assert_eq!(one.lines().count(), 2);

    let noon = stdout(&mzfid(&[
        "simulate", "--state", "noon", "--n", "2", "--phi", "-0.9", "--shots", "500", "--grid", "64",
    ]));
    assert!(data_rows(&noon).iter().all(|r| !(r[1] == 1.0 && r[2] == 1.0)));
}

#[test]
fn replay_reproduces_output() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("run1.csv");
    let second = dir.path().join("run2.csv");
    stdout(&mzfid(&[
        "simulate", "--state", "noon", "--n", "3", "--phi", "0.7", "--shots", "200", "--seed", "11", "--grid", "128",
        "--out", first.to_str().unwrap(),
    ]));
    let manifest = dir.path().join("run1.csv.manifest.json");
    stdout(&mzfid(&["replay", manifest.to_str().unwrap(), "--out", second.to_str().unwrap()]));
    assert_eq!(fs::read(&first).unwrap(), fs::read(&second).unwrap());
    assert_eq!(
        fs::read(dir.path().join("run1.csv.posterior.csv")).unwrap(),
        fs::read(dir.path().join("run2.csv.posterior.csv")).unwrap()
    );
    assert_eq!(mzfid(&["replay", "/no/manifest.json"]).status.code(), Some(2));
}
