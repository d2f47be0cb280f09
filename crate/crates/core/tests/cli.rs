use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::{json, Value};
use xferscat::cli::{run, EXIT_ERROR, EXIT_FAILED, EXIT_OK};
use xferscat::potentials::Potential;

const GAUSS: &str = r#"{"type": "GaussianBump", "amplitude": [0.3, 0.0], "center": [0.0, 0.0], "widths": [1.0, 1.0]}"#;

fn write(dir: &Path, name: &str, v: &Value) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, serde_json::to_string_pretty(v).unwrap()).unwrap();
    p
}

fn xs(args: &[&str]) -> i32 {
    run(std::iter::once("xferscat").chain(args.iter().copied()))
}

fn fast_engine() -> Value {
    json!({"nodes": 24, "tol": 1e-6})
}

#[test]
fn zero_potential_amplitudes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "zero.json",
        &json!({"potentials": [{"type": "Sum", "members": []}], "k": [1.0, 0.5], "theta_grid": {"count": 12}, "engine": fast_engine()}),
    );
    let out = dir.path().join("amp.csv");
    let svg = dir.path().join("amp.svg");
    let code = xs(&["amplitude", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--svg", svg.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    let text = fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "k,theta0_deg,side,theta_deg,re_f,im_f,abs_f2");
    let rows: Vec<_> = lines.collect();
    assert_eq!(rows.len(), 2 * 2 * 12);
    for r in &rows {
        let f: Vec<_> = r.split(',').collect();
        assert_eq!(f.len(), 7);
        assert!(f[4..].iter().all(|x| x.parse::<f64>().unwrap() == 0.0), "{r}");
    }
    // k-list is sorted on load
    assert!(rows[0].starts_with("0.5,"));
    assert!(fs::read_to_string(&svg).unwrap().starts_with("<svg"));
}

#[test]
fn outputs_are_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let g: Value = serde_json::from_str(GAUSS).unwrap();
    let cfg = write(
        dir.path(),
        "g.json",
        &json!({"potentials": [g], "k": [0.8], "theta0_deg": [0.0, -30.0], "theta_grid": {"count": 16}, "engine": fast_engine()}),
    );
    let mut bytes = Vec::new();
    for i in 0..2 {
        let out = dir.path().join(format!("a{i}.csv"));
        let svg = dir.path().join(format!("a{i}.svg"));
        let code = xs(&["born", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--svg", svg.to_str().unwrap()]);
        assert_eq!(code, EXIT_OK);
        bytes.push((fs::read(&out).unwrap(), fs::read(&svg).unwrap()));
    }
    assert_eq!(bytes[0], bytes[1]);
    assert!(!bytes[0].0.is_empty());
}

fn equivalence_config(dir: &Path, second: Value, ks: &[f64]) -> PathBuf {
    let g: Value = serde_json::from_str(GAUSS).unwrap();
    write(
        dir,
        "eq.json",
        &json!({"potentials": [g, second], "alpha": 1.0, "k": ks, "theta_grid": {"count": 24}, "engine": fast_engine()}),
    )
}

#[test]
fn verify_equivalence_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let g: Value = serde_json::from_str(GAUSS).unwrap();
    let deformation = json!({"type": "RationalDeformation2D", "envelope": {"center": 0.0, "width": 1.0},
        "alpha": 1.0, "order": 0, "decay": 1.0, "amplitude": [0.5, 0.0]});
    let paired = json!({"type": "Sum", "members": [g, deformation]});
    let cfg = equivalence_config(dir.path(), paired, &[0.5, 1.0]);
    let report = dir.path().join("report.json");
    assert_eq!(xs(&["verify-equivalence", "--config", cfg.to_str().unwrap(), "--report", report.to_str().unwrap()]), EXIT_OK);
    let r: Value = serde_json::from_slice(&fs::read(&report).unwrap()).unwrap();
    assert_eq!(r["pass"], true);
    assert_eq!(r["entries"].as_array().unwrap().len(), 4);
    assert!(r["entries"].as_array().unwrap().iter().all(|e| e["verdict"] == "pass"));

    let shifted = json!({"type": "GaussianBump", "amplitude": [0.3, 0.0], "center": [0.0, 0.7], "widths": [1.0, 1.0]});
    let cfg = equivalence_config(dir.path(), shifted, &[0.5]);
    assert_eq!(xs(&["verify-equivalence", "--config", cfg.to_str().unwrap(), "--report", report.to_str().unwrap()]), EXIT_FAILED);
    let r: Value = serde_json::from_slice(&fs::read(&report).unwrap()).unwrap();
    assert_eq!(r["pass"], false);
}

#[test]
fn verify_comb_and_orders() {
    let dir = tempfile::tempdir().unwrap();
    let comb = json!({"type": "DeltaComb", "lattice_frequency": 1.0, "coefficients":
        [[0.1, 0.2], [-0.3, 0.1], [0.4, -0.2], [0.8, 0.3], [0.5, 0.5], [0.2, -0.6], [-0.1, 0.3]]});
    let cfg = write(dir.path(), "comb.json", &json!({"potentials": [comb.clone()], "k": [0.5, 0.9, 1.5], "comb": {"n": 1, "n_prime": 3}}));
    let report = dir.path().join("comb-report.json");
    assert_eq!(xs(&["verify-comb", "--config", cfg.to_str().unwrap(), "--report", report.to_str().unwrap()]), EXIT_OK);
    let r: Value = serde_json::from_slice(&fs::read(&report).unwrap()).unwrap();
    assert_eq!(r["witness"], true);

    let cfg = write(dir.path(), "orders.json", &json!({"potentials": [comb], "k": [1.9], "sides": ["left"], "theta0_deg": [0.0]}));
    let out = dir.path().join("orders.csv");
    assert_eq!(xs(&["orders", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]), EXIT_OK);
    let text = fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().next().unwrap(), "n,sin_theta_n,re_r,im_r,re_t,im_t");
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn construct_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("base.json"), GAUSS).unwrap();
    let cfg = write(
        dir.path(),
        "c.json",
        &json!({"potentials": ["base.json"], "k": [1.0], "construct": {"kind": "deformation2d", "base": "base.json",
            "alpha": 1.0, "order": 1, "decay": 2.0, "amplitude": [0.5, -0.5], "envelope": {"center": 0.0, "width": 1.5}}}),
    );
    let out = dir.path().join("built.json");
    assert_eq!(xs(&["construct", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]), EXIT_OK);
    let text = fs::read_to_string(&out).unwrap();
    let p: Potential = serde_json::from_str(&text).unwrap();
    assert_eq!(serde_json::to_string_pretty(&p).unwrap() + "\n", text);
    let Potential::TwoD(v) = &p else { panic!("expected a 2D potential") };
    let base: xferscat::potentials::Potential2D = serde_json::from_str(GAUSS).unwrap();
    let direct = xferscat::potentials::construct_deformation_2d(
        &base,
        1.0,
        1,
        2.0,
        xferscat::C64::new(0.5, -0.5),
        xferscat::potentials::Envelope::new(0.0, 1.5),
    )
    .unwrap();
    assert_eq!(v, &direct);

    // the constructed file feeds a verification run
    let cfg = write(
        dir.path(),
        "inv.json",
        &json!({"potentials": ["base.json", "built.json"], "alpha": 1.0, "k": [0.6],
            "theta_grid": {"count": 12}, "engine": fast_engine()}),
    );
    assert_eq!(xs(&["verify-equivalence", "--config", cfg.to_str().unwrap(), "--report", dir.path().join("r.json").to_str().unwrap()]), EXIT_OK);
}

#[test]
fn usage_and_engine_errors() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(xs(&["no-such-command"]), EXIT_ERROR);
    assert_eq!(xs(&["amplitude"]), EXIT_ERROR);
    assert_eq!(xs(&["amplitude", "--config", dir.path().join("missing.json").to_str().unwrap()]), EXIT_ERROR);
    let bad = write(dir.path(), "bad.json", &json!({"potentials": [], "k": [1.0]}));
    assert_eq!(xs(&["amplitude", "--config", bad.to_str().unwrap()]), EXIT_ERROR);
    let unknown = write(dir.path(), "unknown.json", &json!({"potentials": [{"type": "Sum", "members": []}], "k": [1.0], "bogus": 1}));
    assert_eq!(xs(&["amplitude", "--config", unknown.to_str().unwrap()]), EXIT_ERROR);
    let neg = write(dir.path(), "neg.json", &json!({"potentials": [{"type": "Sum", "members": []}], "k": [-1.0]}));
    assert_eq!(xs(&["amplitude", "--config", neg.to_str().unwrap()]), EXIT_ERROR);
    assert_eq!(xs(&["--version"]), EXIT_OK);
}

#[test]
fn binary_reports_errors_by_name() {
    let dir = tempfile::tempdir().unwrap();
    let comb = json!({"type": "DeltaComb", "lattice_frequency": 1.0, "coefficients": [[1.0, 0.0]]});
    let cfg = write(dir.path(), "c.json", &json!({"potentials": [comb], "k": [1.0], "theta_grid": {"count": 8}}));
    let out = Command::new(env!("CARGO_BIN_EXE_xferscat")).args(["amplitude", "--config", cfg.to_str().unwrap()]).output().unwrap();
    assert_eq!(out.status.code(), Some(EXIT_ERROR));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error[CombRequiresLattice]"));
    let out = Command::new(env!("CARGO_BIN_EXE_xferscat")).arg("--version").output().unwrap();
    assert_eq!(out.status.code(), Some(EXIT_OK));
    let v = String::from_utf8_lossy(&out.stdout);
    assert!(v.contains("engine") && v.contains("schema"), "{v}");
    let out = Command::new(env!("CARGO_BIN_EXE_xferscat")).arg("frobnicate").output().unwrap();
    assert_eq!(out.status.code(), Some(EXIT_ERROR));
    assert!(String::from_utf8_lossy(&out.stderr).contains("config schema"));
}
