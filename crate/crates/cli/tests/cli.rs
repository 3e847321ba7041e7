use std::fs;
use std::io::BufReader;
use std::path::Path;
use std::process::Command;

use ma_plate_core::discretization::ScalarField;
use serde_json::Value;

fn ma_plate(args: &[&str], out: &Path) -> (i32, String) {
    let o = Command::new(env!("CARGO_BIN_EXE_ma-plate"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env("MA_PLATE_THREADS", "2")
        .output()
        .unwrap();
    (o.status.code().unwrap(), String::from_utf8_lossy(&o.stderr).into_owned())
}

fn summary(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap()
}

#[test]
fn solve_paraboloid() {
    let d = tempfile::tempdir().unwrap();
    let (code, err) = ma_plate(&["solve", "--f", "const:1", "--grid", "disk:65"], d.path());
    assert_eq!(code, 0, "{err}");
    let s = summary(d.path());
    assert!((s["energy_over_2pi"].as_f64().unwrap() - 1.0).abs() < 0.02);
    assert_eq!(s["init"], "radial");
    for f in ["v.csv", "multiplier.csv", "trace.csv"] {
        assert!(d.path().join(f).exists(), "{f}");
    }
}

#[test]
fn field_csv_round_trips() {
    let d = tempfile::tempdir().unwrap();
    let (code, _) = ma_plate(&["solve", "--f", "1", "--grid", "disk:33"], d.path());
    assert_eq!(code, 0);
    let path = d.path().join("v.csv");
    let v = ScalarField::read_csv(BufReader::new(fs::File::open(&path).unwrap())).unwrap();
    let mut again = Vec::new();
    v.write_csv(&mut again).unwrap();
    assert_eq!(fs::read(&path).unwrap(), again);
}

#[test]
fn summaries_are_deterministic() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let args = ["solve", "--f", "1+r^2/4", "--grid", "disk:33", "--seed", "7"];
    assert_eq!(ma_plate(&args, a.path()).0, 0);
    assert_eq!(ma_plate(&args, b.path()).0, 0);
    assert_eq!(
        fs::read(a.path().join("summary.json")).unwrap(),
        fs::read(b.path().join("summary.json")).unwrap()
    );
}

#[test]
fn radial_two_minus_r() {
    let d = tempfile::tempdir().unwrap();
    let (code, _) = ma_plate(&["radial", "--f", "expr:2-r"], d.path());
    assert_eq!(code, 0);
    let s = summary(d.path());
    assert_eq!(s["verdict"], "admissible");
    assert!((s["energy"]["total"].as_f64().unwrap() - 8.497196115886043).abs() < 1e-7);
    let csv = fs::read_to_string(d.path().join("radial.csv")).unwrap();
    assert!(csv.starts_with("r,f,v,lambda"));
}

#[test]
fn incompatible_growth_preset() {
    let d = tempfile::tempdir().unwrap();
    let (code, _) = ma_plate(&["check-compat", "--growth", "preset:incompatible-B", "--grid", "disk:33"], d.path());
    assert_eq!(code, 0);
    let s = summary(d.path());
    assert_eq!(s["verdict"], "violated(first)");
    assert!(s["gap"].as_f64().unwrap() > 0.0);
    assert_eq!(s["gap_consistent"], true);
}

#[test]
fn scaling_and_matching_commands() {
    let d = tempfile::tempdir().unwrap();
    let (code, _) = ma_plate(&["scaling", "--grid", "disk:33", "--gamma", "1.5", "--h-list", "2^-3,2^-4,2^-5,2^-6"], d.path());
    assert_eq!(code, 0);
    let s = summary(d.path());
    assert!((s["slope"].as_f64().unwrap() - 3.5).abs() < 0.1);
    assert_eq!(s["verdict"], "ok");
    let (code, _) = ma_plate(&["matching", "--grid", "disk:33"], d.path());
    assert_eq!(code, 0);
    let s = summary(d.path());
    assert!(s["z_over_eps_reduction"].as_array().unwrap().iter().all(|r| r.as_f64().unwrap() > 1.8));
}

#[test]
fn family_and_check_el() {
    let d = tempfile::tempdir().unwrap();
    let (code, e) = ma_plate(&["family", "--f", "-exp(2*x1)", "--grid", "disk:65"], d.path());
    assert_eq!(code, 0, "{e}");
    assert!(summary(d.path())["energy_spread"].as_f64().unwrap() < 0.01);
    let (code, _) = ma_plate(&["check-el", "--f", "const:1", "--grid", "disk:65"], d.path());
    assert_eq!(code, 0);
    assert!(summary(d.path())["grid_residual"]["interior"].as_f64().unwrap() < 1e-6);
}

#[test]
fn validation_errors_exit_2() {
    let d = tempfile::tempdir().unwrap();
    for args in [
        vec!["solve", "--f", "log(r"],
        vec!["solve", "--grid", "disk"],
        vec!["solve", "--mode", "sideways"],
        vec!["check-compat", "--growth", "nope"],
        vec!["radial", "--f", "x1 + r"],
        vec!["scaling", "--gamma", "2.5"],
        vec!["scaling", "--h-list", "0.1,0.2"],
    ] {
        let (code, err) = ma_plate(&args, d.path());
        assert_eq!(code, 2, "{args:?}: {err}");
        assert!(err.starts_with("error:"), "{err}");
    }
}

#[test]
fn non_convergence_exits_3() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("run.toml");
    fs::write(&cfg, "[solver]\nmax_outer = 1\nmax_inner = 2\n").unwrap();
    let (code, _) = ma_plate(
        &["solve", "--config", cfg.to_str().unwrap(), "--f", "expr:2-r", "--init", "default", "--grid", "disk:33"],
        d.path(),
    );
    assert_eq!(code, 3);
    assert_eq!(summary(d.path())["converged"], false);
}

#[test]
fn config_file_sections() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("run.toml");
    fs::write(
        &cfg,
        "[run]\nf = \"const:1\"\ngrid = \"disk:33\"\n\n[solver]\nmode = \"inequality\"\n\n[radial]\nm = 501\n",
    )
    .unwrap();
    let (code, _) = ma_plate(&["solve", "--config", cfg.to_str().unwrap()], d.path());
    assert_eq!(code, 0);
    let s = summary(d.path());
    assert_eq!(s["mode"], "inequality");
    assert_eq!(s["grid"], "disk:33");
    fs::write(&cfg, "[solver]\nbogus = 1\n").unwrap();
    assert_eq!(ma_plate(&["solve", "--config", cfg.to_str().unwrap()], d.path()).0, 2);
}
