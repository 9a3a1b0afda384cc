use serde::Serialize;
use weyl_core::dirac::build_dirac;
use weyl_core::spectrum::{galerkin_spectrum, lattice_oracle, OracleFamily};
use weyl_core::FrameBundle;

use super::RunConfig;
use crate::config::FrameInput;
use crate::error::CliError;
use crate::output::{float, OutDir};

#[derive(Serialize)]
struct HalfInteger {
    value: f64,
    /// Present in the separation oracle as an exact floating-point value.
    exact_in_oracle: bool,
    /// Distance to the nearest Galerkin eigenvalue, when inside the trust window.
    galerkin_deviation: Option<f64>,
}

#[derive(Serialize)]
struct Closest {
    eigenvalue: f64,
    distance: f64,
}

#[derive(Serialize)]
struct Example {
    k3: i32,
    lambda_max: f64,
    truncation: usize,
    window: f64,
    half_integers: Vec<HalfInteger>,
    /// Eigenvalue closest to a half-integer (excluding exact hits).
    closest_other: Option<Closest>,
    /// Largest gap between sorted Galerkin and oracle eigenvalues inside the trust window.
    galerkin_vs_oracle: f64,
}

pub fn run(cfg: &RunConfig) -> Result<(), CliError> {
    let k = match cfg.spec.as_ref().map(|s| &s.frame) {
        None => 1,
        Some(FrameInput::K3(k)) => *k,
        Some(_) => return Err(CliError::Input("example-k3 needs the k3 preset".into())),
    };
    let lambda_max = cfg.lambda_max.unwrap_or(10.0);
    let truncation = cfg.k.unwrap_or(16);
    let oracle = lattice_oracle(&OracleFamily::K3Frame { k, d: [0.0, 0.0] }, lambda_max)?;
    let gal = galerkin_spectrum(&build_dirac(&FrameBundle::k3(k), true)?, truncation)?;
    let window = gal.window;

    let out = OutDir::create(&cfg.out)?;
    let idx = oracle.signed_indices();
    out.csv("eigenvalues.csv", &["k", "lambda"], oracle.values.iter().zip(&idx).map(|(l, i)| vec![i.to_string(), float(*l)]))?;

    let nearest = |target: f64, vals: &[f64]| vals.iter().map(|v| (v - target).abs()).fold(f64::INFINITY, f64::min);
    let trusted: Vec<f64> = gal.trusted().collect();
    let n = lambda_max.floor() as i64;
    let half_integers: Vec<HalfInteger> = (-n..n)
        .map(|i| i as f64 + 0.5)
        .filter(|h| h.abs() < lambda_max)
        .map(|h| HalfInteger {
            value: h,
            exact_in_oracle: oracle.values.contains(&h),
            galerkin_deviation: (h.abs() < window - 0.25).then(|| nearest(h, &trusted)),
        })
        .filter(|h| h.exact_in_oracle || h.galerkin_deviation.is_some_and(|d| d < 1e-8))
        .collect();

    let half_dist = |l: f64| (l - (l - 0.5).round() - 0.5).abs();
    let closest_other = oracle
        .values
        .iter()
        .map(|&l| Closest { eigenvalue: l, distance: half_dist(l) })
        .filter(|c| c.distance > 0.0)
        .min_by(|a, b| a.distance.total_cmp(&b.distance));

    let inner = window - 0.25;
    let a: Vec<f64> = oracle.values.iter().copied().filter(|l| l.abs() < inner).collect();
    let b: Vec<f64> = trusted.iter().copied().filter(|l| l.abs() < inner).collect();
    let galerkin_vs_oracle =
        if a.len() == b.len() { a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max) } else { f64::INFINITY };

    out.json(
        "example.json",
        &Example {
            k3: k,
            lambda_max,
            truncation,
            window,
            half_integers,
            closest_other,
            galerkin_vs_oracle: if galerkin_vs_oracle.is_finite() { galerkin_vs_oracle } else { -1.0 },
        },
    )?;
    Ok(())
}
