use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_coorbit")).arg("--out").arg(dir).args(args).output().unwrap()
}

fn json(o: &Output) -> Value {
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).unwrap()
}

#[test]
fn norm_smoke_and_zero_signal() {
    let tmp = tempfile::tempdir().unwrap();
    let v = json(&run(tmp.path(), &["norm", "--family", "F", "--variant", "def", "--signal", "gaussian"]));
    let value = v["reports"][0]["value"].as_f64().unwrap();
    assert!(value.is_finite() && value > 0.0);
    assert!(tmp.path().join("norm.json").exists());
    let v = json(&run(tmp.path(), &["norm", "--signal", "zero"]));
    let reports = v["reports"].as_array().unwrap();
    assert_eq!(reports.len(), 5);
    assert!(reports.iter().all(|r| r["value"].as_f64() == Some(0.0)));
}

#[test]
fn check_reports_meyer_support() {
    let tmp = tempfile::tempdir().unwrap();
    let v = json(&run(tmp.path(), &["check", "--analyzer", "meyer"]));
    let s = &v["analyzer"]["support"];
    assert!((s[0].as_f64().unwrap() - 2.0 * std::f64::consts::PI / 3.0).abs() < 1e-12);
    assert!((s[1].as_f64().unwrap() - 8.0 * std::f64::consts::PI / 3.0).abs() < 1e-12);
    assert_eq!(v["analyzer"]["tauberian"]["passes"], Value::Bool(true));
    let profile = std::fs::read_to_string(tmp.path().join("profile_phi.csv")).unwrap();
    assert!(profile.starts_with("xi,abs\n"));
}

#[test]
fn recon_meyer_is_exact() {
    let tmp = tempfile::tempdir().unwrap();
    let v = json(&run(tmp.path(), &["recon", "--system", "meyer", "--J", "6"]));
    assert!(v["max_residual"].as_f64().unwrap() < 1e-8);
    assert!(v["atom"]["delta_defect"].as_f64().unwrap() < 1e-12);
}

#[test]
fn discretize_emits_monotone_residuals() {
    let tmp = tempfile::tempdir().unwrap();
    let v = json(&run(tmp.path(), &["discretize", "--sweep", "default"]));
    assert_eq!(v["residual_monotone"], Value::Bool(true));
    let csv = std::fs::read_to_string(tmp.path().join("sweep.csv")).unwrap();
    assert!(csv.starts_with("alpha,beta,osc_a1,osc_amnu,contraction_ratio,recon_residual,"));
    assert_eq!(csv.lines().count(), 13);
}

#[test]
fn errors_exit_nonzero_with_location() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(tmp.path(), &["equiv", "--count", "0"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("[battery]"));

    let cfg = tmp.path().join("bad.toml");
    std::fs::write(&cfg, "[space]\np = \"wobble\"\n").unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_coorbit"))
        .args(["--out"])
        .arg(tmp.path())
        .arg("--config")
        .arg(&cfg)
        .arg("norm")
        .output()
        .unwrap();
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("[space] p"));

    std::fs::write(&cfg, "[grid]\nsize = 3\n").unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_coorbit")).arg("--config").arg(&cfg).arg("norm").output().unwrap();
    assert!(!o.status.success());
    let o = run(tmp.path(), &["discretize", "--sweep", "sideways"]);
    assert!(!o.status.success());
}

#[test]
fn print_defaults_is_a_valid_config() {
    let tmp = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_coorbit")).arg("--print-defaults").output().unwrap();
    assert!(o.status.success());
    let cfg = tmp.path().join("defaults.toml");
    std::fs::write(&cfg, &o.stdout).unwrap();
    let v = json(
        &Command::new(env!("CARGO_BIN_EXE_coorbit"))
            .arg("--config")
            .arg(&cfg)
            .arg("--out")
            .arg(tmp.path())
            .args(["norm", "--variant", "def,norm2"])
            .output()
            .unwrap(),
    );
    assert_eq!(v["reports"].as_array().unwrap().len(), 2);
}

#[test]
fn signal_from_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("sig.csv");
    let mut text = String::from("index,re,im\n");
    for i in 0..1024 {
        text += &format!("{i},{},0\n", if i == 512 { 1.0 } else { 0.0 });
    }
    std::fs::write(&path, text).unwrap();
    let arg = format!("csv:{}", path.display());
    let v = json(&run(tmp.path(), &["norm", "--variant", "def", "--signal", &arg]));
    assert!(v["reports"][0]["value"].as_f64().unwrap() > 0.0);
}
