use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn weyl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_weyl")).args(args).output().expect("binary runs")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn write_input(dir: &TempDir, name: &str, body: &str) -> String {
    let p = dir.path().join(name);
    fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

const SHIFTED_PAULI: &str = r#"{"frame":{"preset":"k3","k3":0},"potential":{"harmonics":[{"row":1,"col":1,"wave":[0,0,0],"re":0.5}]}}"#;

#[test]
fn analyze_twisted_frame() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("a");
    let o = weyl(&["analyze", "--preset", "k3=1", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let c = json(&out.join("coefficients.json"));
    assert!((c["a"].as_f64().unwrap() - 4.0 * PI / 3.0).abs() < 1e-10);
    assert!(c["b"].as_f64().unwrap().abs() <= 1e-8);
    assert!(c["b_quadrature"].as_f64().unwrap().abs() <= 1e-8);
    let g = json(&out.join("geometry.json"));
    assert_eq!(g["trace_star_t"]["max"].as_f64(), Some(-2.0));
    let csv = fs::read_to_string(out.join("densities.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("x1,x2,x3,a,b,b_closed"));
    assert_eq!(csv.lines().count(), 1 + 64);
}

#[test]
fn analyze_shifted_pauli() {
    let dir = TempDir::new().unwrap();
    let input = write_input(&dir, "p.json", SHIFTED_PAULI);
    let out = dir.path().join("a");
    assert!(weyl(&["analyze", "--input", &input, "--out", out.to_str().unwrap()]).status.success());
    let c = json(&out.join("coefficients.json"));
    assert!((c["b"].as_f64().unwrap() + PI).abs() < 1e-8);
    assert!(c["b_discrepancy"].as_f64().unwrap() < 1e-8);
}

#[test]
fn schema_errors_exit_2_with_pointer() {
    let dir = TempDir::new().unwrap();
    let dependent = r#"{"frame":{"harmonics":[
        {"j":1,"alpha":1,"wave":[0,0,0],"re":1},
        {"j":2,"alpha":1,"wave":[0,0,0],"re":1},
        {"j":3,"alpha":3,"wave":[0,0,0],"re":1}]}}"#;
    for (body, pointer) in [
        (dependent, "\"/frame\""),
        (r#"{"frame":{"preset":"k3","k3":1},"mollifier":{"T":0}}"#, "\"/mollifier/T\""),
        (
            r#"{"frame":{"preset":"k3","k3":1},"potential":{"harmonics":[{"row":3,"col":1,"wave":[0,0,0]}]}}"#,
            "\"/potential/harmonics/0/row\"",
        ),
        ("{not json", "\"\""),
    ] {
        let input = write_input(&dir, "bad.json", body);
        let o = weyl(&["analyze", "--input", &input, "--out", dir.path().join("x").to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(2));
        let err = String::from_utf8_lossy(&o.stderr);
        assert!(err.contains(pointer), "{err}");
    }
    assert_eq!(weyl(&["analyze"]).status.code(), Some(2));
    assert_eq!(weyl(&["spectrum", "--preset", "k4=1"]).status.code(), Some(2));
}

#[test]
fn spectrum_fits_on_oracle() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("s0");
    assert!(weyl(&["spectrum", "--preset", "k3=0", "--out", out.to_str().unwrap(), "--samples", "41"]).status.success());
    let f = json(&out.join("fit.json"));
    let (a, b) = (f["fit"]["a"].as_f64().unwrap(), f["fit"]["b"].as_f64().unwrap());
    assert!((a - 4.0 * PI / 3.0).abs() / (4.0 * PI / 3.0) < 0.01);
    assert!(b.abs() <= 0.05 * a.abs());
    assert_eq!(f["method"], "oracle");

    let input = write_input(&dir, "p.json", SHIFTED_PAULI);
    let out = dir.path().join("s1");
    let o = weyl(&["spectrum", "--input", &input, "--out", out.to_str().unwrap(), "--samples", "41", "--asymmetry", "--workers", "2"]);
    assert!(o.status.success());
    let f = json(&out.join("fit.json"));
    assert!((f["fit"]["b"].as_f64().unwrap() + PI).abs() / PI < 0.15);
    assert!(f["asymmetry"]["b_minus"].as_f64().unwrap() > 0.0);
    let asym = fs::read_to_string(out.join("asymmetry.csv")).unwrap();
    assert_eq!(asym.lines().count(), 42);
}

fn has_half(dir: &Path) -> bool {
    fs::read_to_string(dir.join("eigenvalues.csv"))
        .unwrap()
        .lines()
        .skip(1)
        .any(|l| (l.split(',').nth(1).unwrap().parse::<f64>().unwrap() - 0.5).abs() < 1e-8)
}

#[test]
fn twisted_frame_has_one_half() {
    let dir = TempDir::new().unwrap();
    let o = dir.path().join("o");
    assert!(weyl(&["spectrum", "--preset", "k3=1", "--lambda-max", "8", "--out", o.to_str().unwrap()]).status.success());
    assert!(has_half(&o));
    let g = dir.path().join("g");
    let out = weyl(&["spectrum", "--preset", "k3=1", "--galerkin", "-K", "8", "--out", g.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(has_half(&g));
    let f = json(&g.join("fit.json"));
    assert!(f["fit"].is_null() && f["reason"].is_string());

    let e = dir.path().join("e");
    assert!(weyl(&["example-k3", "--preset", "k3=1", "--out", e.to_str().unwrap()]).status.success());
    let ex = json(&e.join("example.json"));
    assert!(ex["half_integers"].as_array().unwrap().iter().any(|h| h["value"] == 0.5 && h["exact_in_oracle"] == true));
    assert!(ex["galerkin_vs_oracle"].as_f64().unwrap() < 1e-8);
}

#[test]
fn oracle_refuses_unsupported_operators() {
    let dir = TempDir::new().unwrap();
    let curved = r#"{"frame":{"harmonics":[
        {"j":1,"alpha":1,"wave":[0,0,0],"re":1},
        {"j":1,"alpha":2,"wave":[1,0,0],"re":0.05},
        {"j":1,"alpha":2,"wave":[-1,0,0],"re":0.05},
        {"j":2,"alpha":2,"wave":[0,0,0],"re":1},
        {"j":3,"alpha":3,"wave":[0,0,0],"re":1}]}}"#;
    let input = write_input(&dir, "c.json", curved);
    let o = weyl(&["spectrum", "--input", &input, "--oracle", "--out", dir.path().join("x").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("oracle"));
}

#[test]
fn verify_default_and_corrupted() {
    let dir = TempDir::new().unwrap();
    let v1 = dir.path().join("v1");
    let v8 = dir.path().join("v8");
    assert!(weyl(&["verify", "--out", v1.to_str().unwrap(), "--workers", "1"]).status.success());
    assert!(weyl(&["verify", "--out", v8.to_str().unwrap(), "--workers", "8"]).status.success());
    let (a, b) = (fs::read(v1.join("report.json")).unwrap(), fs::read(v8.join("report.json")).unwrap());
    assert_eq!(a, b);
    let r = json(&v1.join("report.json"));
    assert_eq!(r["all_pass"], true);
    let names: Vec<&str> = r["targets"][0]["checks"].as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap()).collect();
    for n in [
        "curvature_torsion",
        "trace_identity",
        "sum_rule",
        "unitary_invariance",
        "self_adjointness",
        "charge_conjugation",
        "dirac_characterization",
    ] {
        assert!(names.contains(&n), "{n}");
    }

    let bad = write_input(
        &dir,
        "bad.json",
        r#"{"frame":{"preset":"k3","k3":1},"potential":{"harmonics":[{"row":1,"col":1,"wave":[0,0,0],"im":0.5}]}}"#,
    );
    let vb = dir.path().join("vb");
    let o = weyl(&["verify", "--input", &bad, "--out", vb.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let r = json(&vb.join("report.json"));
    let sa = r["targets"][0]["checks"].as_array().unwrap().iter().find(|c| c["name"] == "self_adjointness").unwrap().clone();
    assert_eq!(sa["pass"], false);
}

#[test]
fn outputs_do_not_depend_on_workers() {
    let dir = TempDir::new().unwrap();
    let input = write_input(&dir, "p.json", SHIFTED_PAULI);
    let run = |w: &str| {
        let out = dir.path().join(format!("w{w}"));
        let o =
            weyl(&["spectrum", "--input", &input, "--lambda-max", "12", "--samples", "21", "--workers", w, "--out", out.to_str().unwrap()]);
        assert!(o.status.success());
        out
    };
    let (a, b) = (run("1"), run("4"));
    for f in ["eigenvalues.csv", "counting.csv", "fit.json"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    let line = fs::read_to_string(a.join("counting.csv")).unwrap().lines().nth(1).unwrap().to_string();
    let lambda = line.split(',').next().unwrap();
    assert_eq!(lambda, "6.0000000000000000e0");
}
