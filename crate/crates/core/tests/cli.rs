use std::path::Path;
use std::process::{Command, Output};

const PHYSICAL: &str = r#"{
  "physical": {
    "kinetic_energy": {"value": 200000, "unit": "eV"},
    "sigma_z0": {"value": 40, "unit": "nm"},
    "drift_length": {"value": 0.0, "unit": "m"},
    "interaction_length": {"value": 100e-6, "unit": "m"},
    "omega": {"value": 2.354564459e15, "unit": "rad/s"},
    "q_z": {"value": 1.1296e7, "unit": "1/m"},
    "field_amplitude": {"value": 1.0e3, "unit": "V/m"},
    "photon_state": {"kind": "coherent", "nu0": 4}
  }
}"#;

const FOCK: &str = r#"{
  "dimensionless": {"ups": 0.1, "theta": 0.0, "eps": 0.2, "phi0": 0.0, "gamma0": 1.0, "chirp": 0.0,
    "photon_state": {"kind": "fock", "nu0": 10},
    "small_ratios": {"rec_over_p0": 0.0, "qz_over_p0": 0.0, "sig_over_p0": 0.0, "delta": 0.0}}
}"#;

fn qewp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qewp")).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn emit_physical_reports_derived_quantities() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "p.json", PHYSICAL);
    let out = qewp(&["emit", "--config", &cfg]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    for key in ["dnu1", "dnu2", "einstein_ratio", "v0"] {
        assert!(text.contains(key), "missing {key} in\n{text}");
    }
}

#[test]
fn emit_fock_has_zero_first_order() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "f.json", FOCK);
    let out = qewp(&["emit", "--config", &cfg, "--format", "json"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["dnu1"].as_f64(), Some(0.0));
    let expected = 0.01 * (0.05f64.sin() / 0.05).powi(2);
    assert!((v["dnu2"].as_f64().unwrap() - expected).abs() < 1e-16);
}

#[test]
fn out_flag_writes_file_and_nothing_to_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("fig3.csv");
    let out = qewp(&["fig3", "--out", target.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let csv = std::fs::read_to_string(&target).unwrap();
    assert!(csv.lines().any(|l| l == "Gamma,dnu1,normalized,exp_minus_half_Gamma_sq"));
    assert_eq!(csv.lines().filter(|l| !l.starts_with('#')).count(), 202);
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad_unit = write(dir.path(), "u.json", &PHYSICAL.replace(r#""unit": "nm""#, r#""unit": "furlong""#));
    let both = write(dir.path(), "b.json", r#"{}"#);
    let bad_sweep = write(
        dir.path(),
        "s.json",
        &FOCK.replace("\n}", r#", "sweep": {"axis": "spin", "start": 0, "stop": 1, "steps": 3}}"#),
    );
    for args in [
        vec!["emit", "--config", bad_unit.as_str()],
        vec!["emit", "--config", both.as_str()],
        vec!["sweep", "--config", bad_sweep.as_str()],
        vec!["emit", "--config", "/nonexistent/cfg.json"],
        vec!["fig3", "--format", "xml"],
    ] {
        let out = qewp(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn unwritable_output_exits_2() {
    let out = qewp(&["fig3", "--out", "/nonexistent/dir/x.csv"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_passes_and_mutation_is_caught() {
    let ok = qewp(&["verify", "--seed-grid", "40"]);
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stderr));
    let report: serde_json::Value = serde_json::from_slice(&ok.stdout).unwrap();
    assert_eq!(report["pass"], true);

    let bad = qewp(&["verify", "--seed-grid", "40", "--perturb-sinc", "1e-3"]);
    assert_eq!(bad.status.code(), Some(1));
    let report: serde_json::Value = serde_json::from_slice(&bad.stdout).unwrap();
    let records = report["records"].as_array().unwrap();
    let pass_of = |name: &str| records.iter().find(|r| r["name"] == name).unwrap()["pass"].as_bool().unwrap();
    assert!(pass_of("sum_rule"));
    assert!(!pass_of("oracle_gaussian_ratio_1e-8"));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("FAIL oracle_gaussian_ratio_1e-8"));
}

#[test]
fn sweep_over_gamma_is_ordered() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "g.json",
        &FOCK
            .replace(r#""kind": "fock", "nu0": 10"#, r#""kind": "coherent", "nu0": 1.0"#)
            .replace("\n}", r#", "sweep": {"axis": "Gamma", "start": 0, "stop": 3, "steps": 7}}"#),
    );
    let out = qewp(&["sweep", "--config", &cfg]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).skip(1).collect();
    assert_eq!(rows.len(), 7);
    let first: Vec<f64> = rows.iter().map(|r| r.split(',').next().unwrap().parse().unwrap()).collect();
    assert_eq!(first, vec![0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0]);
}
