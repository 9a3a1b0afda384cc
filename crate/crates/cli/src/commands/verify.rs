use std::f64::consts::PI;

use serde::Serialize;
use weyl_core::asymptotics::{b_density_closed, densities};
use weyl_core::dirac::{
    build_dirac, charge_conjugation_residual, is_massless_dirac, selfadjointness_residual, subprincipal_closed_form_residual,
    DiracCondition,
};
use weyl_core::fixtures::{random_frame, random_point, random_trial_field, random_unitary_field, rng};
use weyl_core::frame::curvature_torsion_residual;
use weyl_core::linalg::{norm, r, trace, CMat, C64};
use weyl_core::quadrature::{torus_grid, SphereRule};
use weyl_core::symbol::{bracket_terms, propagator_zero_subprincipal, transform_operator_unitary, u1_curvature};
use weyl_core::{FrameBundle, OperatorSpec};

use super::RunConfig;
use crate::config::Tolerances;
use crate::error::CliError;
use crate::output::OutDir;

#[derive(Serialize)]
struct Check {
    name: &'static str,
    pass: bool,
    max_residual: Option<f64>,
    tolerance: Option<f64>,
    detail: Option<String>,
}

#[derive(Serialize)]
struct Decision {
    is_dirac: bool,
    failing: Option<DiracCondition>,
    max_off_identity: f64,
    extreme_b: f64,
}

#[derive(Serialize)]
struct TargetReport {
    name: String,
    /// Characterization of the operator as given (informational).
    decision: Option<Decision>,
    checks: Vec<Check>,
}

#[derive(Serialize)]
struct Report {
    all_pass: bool,
    tolerances: Tolerances,
    targets: Vec<TargetReport>,
}

struct Target {
    name: String,
    bundle: FrameBundle,
    op: OperatorSpec,
    half_density: bool,
}

fn residual_check(name: &'static str, res: weyl_core::Result<f64>, tol: f64) -> Check {
    match res {
        Ok(v) => Check { name, pass: v <= tol, max_residual: Some(v), tolerance: Some(tol), detail: None },
        Err(e) => Check { name, pass: false, max_residual: None, tolerance: Some(tol), detail: Some(e.to_string()) },
    }
}

fn flag_check(name: &'static str, pass: bool, detail: String) -> Check {
    Check { name, pass, max_residual: None, tolerance: None, detail: Some(detail) }
}

fn trace_and_sum(op: &OperatorSpec) -> weyl_core::Result<(f64, f64)> {
    let sym = op.to_symbol();
    let mut g = rng(31);
    let (mut worst_trace, mut worst_sum): (f64, f64) = (0.0, 0.0);
    for _ in 0..10 {
        let pt = random_point(&mut g);
        let mut total = CMat::zeros(op.m, op.m);
        for t in bracket_terms(&sym, &pt)? {
            let u = propagator_zero_subprincipal(&sym, t.index, &pt)?;
            let curv = u1_curvature(&sym, t.index, &pt)?.scalar;
            worst_trace = worst_trace.max((trace(&u) - C64::new(curv, 0.0)).norm());
            total += u;
        }
        worst_sum = worst_sum.max(norm(&total));
    }
    Ok((worst_trace, worst_sum))
}

fn unitary_residual(op: &OperatorSpec, rule: &SphereRule) -> weyl_core::Result<f64> {
    let sym = op.to_symbol();
    let mut worst: f64 = 0.0;
    for (seed, x) in [(1u64, [0.4, 1.3, 2.2]), (2, [3.0, 0.1, 5.5])] {
        let t = transform_operator_unitary(&sym, &random_unitary_field(seed, op.m, 0.4))?;
        worst = worst.max((densities(&sym, &x, rule)?.b_x - densities(&t, &x, rule)?.b_x).abs());
    }
    Ok(worst)
}

fn run_target(t: &Target, cfg: &RunConfig, tol: &Tolerances) -> TargetReport {
    let periods = t.bundle.periods();
    let mut checks = Vec::new();

    let mut g = rng(7);
    let ct =
        (0..20).map(|_| curvature_torsion_residual(&t.bundle, &random_point(&mut g))).try_fold(0.0, |acc: f64, r| r.map(|v| acc.max(v)));
    checks.push(residual_check("curvature_torsion", ct, tol.curvature_torsion));

    checks.push(residual_check("subprincipal_closed_form", subprincipal_closed_form_residual(&t.bundle, cfg.grid), tol.closed_form));

    match trace_and_sum(&t.op) {
        Ok((a, b)) => {
            checks.push(residual_check("trace_identity", Ok(a), tol.identity));
            checks.push(residual_check("sum_rule", Ok(b), tol.identity));
        }
        Err(e) => {
            checks.push(residual_check("trace_identity", Err(e.clone()), tol.identity));
            checks.push(residual_check("sum_rule", Err(e), tol.identity));
        }
    }

    let rule = SphereRule::new(3, cfg.quadrature.0, cfg.quadrature.1);
    checks.push(residual_check("unitary_invariance", unitary_residual(&t.op, &rule), tol.unitary));

    // all pairs including (v, v): distinct random fields rarely share harmonics
    let fields: Vec<_> = (0..4).map(|s| random_trial_field(s, 2, periods)).collect();
    let trials: Vec<_> = (0..4).flat_map(|i| (i..4).map(move |j| (i, j))).map(|(i, j)| (fields[i].clone(), fields[j].clone())).collect();
    // the weight sqrt(det g) of the plain operator is not a trigonometric polynomial
    let sa_grid = if t.half_density { 12 } else { 24 };
    checks.push(residual_check("self_adjointness", Ok(selfadjointness_residual(&t.op, &trials, sa_grid)), tol.self_adjoint));

    let dirac = build_dirac(&t.bundle, true);
    checks.push(residual_check(
        "charge_conjugation",
        dirac.clone().map(|d| charge_conjugation_residual(&d, &fields, 6)),
        tol.charge_conjugation,
    ));

    match dirac {
        Ok(d) => {
            let check = match is_massless_dirac(&d, cfg.grid) {
                Ok(dec) => flag_check(
                    "dirac_characterization",
                    dec.is_dirac && dec.witness.is_some(),
                    format!("witness reconstruction error {:?}", dec.reconstruction_error),
                ),
                Err(e) => flag_check("dirac_characterization", false, e.to_string()),
            };
            checks.push(check);

            let diag = d.clone().with_constant_potential(CMat::from_row_slice(2, 2, &[r(0.4), r(0.0), r(0.0), r(0.0)]));
            let check = match is_massless_dirac(&diag, cfg.grid) {
                Ok(dec) => flag_check(
                    "characterization_scalar_condition",
                    dec.failing == Some(DiracCondition::SubprincipalNotScalar),
                    format!("+diag(0.4, 0) rejected with {:?}", dec.failing),
                ),
                Err(e) => flag_check("characterization_scalar_condition", false, e.to_string()),
            };
            checks.push(check);

            let c0 = 0.3;
            let shifted = d.with_constant_potential(CMat::identity(2, 2) * r(c0));
            let check = match is_massless_dirac(&shifted, cfg.grid) {
                Ok(dec) => {
                    // b(x) / sqrt(det g) is the constant -c0 / (2 pi^2)
                    let dev = torus_grid(periods, cfg.grid)
                        .iter()
                        .map(|x| {
                            (b_density_closed(&t.bundle, &shifted.subprincipal_at(x), x) / t.bundle.at(x).sqrt_det_g + c0 / (2.0 * PI * PI))
                                .abs()
                        })
                        .fold(0.0, f64::max);
                    Check {
                        name: "characterization_b_condition",
                        pass: dec.failing == Some(DiracCondition::NonzeroB) && dev <= tol.identity,
                        max_residual: Some(dev),
                        tolerance: Some(tol.identity),
                        detail: Some(format!("+{c0} I rejected with {:?}", dec.failing)),
                    }
                }
                Err(e) => flag_check("characterization_b_condition", false, e.to_string()),
            };
            checks.push(check);
        }
        Err(e) => checks.push(flag_check("dirac_characterization", false, e.to_string())),
    }

    let decision = is_massless_dirac(&t.op, cfg.grid).ok().map(|d| Decision {
        is_dirac: d.is_dirac,
        failing: d.failing,
        max_off_identity: d.max_off_identity,
        extreme_b: d.extreme_b,
    });
    TargetReport { name: t.name.clone(), decision, checks }
}

pub fn run(cfg: &RunConfig) -> Result<(), CliError> {
    let (targets, tol) = match &cfg.spec {
        Some(spec) => {
            let name = match spec.frame {
                crate::config::FrameInput::K3(k) => format!("input (k3={k})"),
                _ => "input".to_string(),
            };
            (vec![Target { name, bundle: spec.bundle()?, op: spec.operator()?, half_density: spec.half_density }], spec.tolerances.clone())
        }
        None => {
            let twisted = FrameBundle::k3(1);
            let curved = random_frame(1, 1, 0.1);
            let targets = vec![
                Target { name: "preset k3=1".into(), op: build_dirac(&twisted, true)?, bundle: twisted, half_density: true },
                Target { name: "preset random frame".into(), op: build_dirac(&curved, true)?, bundle: curved, half_density: true },
            ];
            (targets, Tolerances::default())
        }
    };
    let reports: Vec<TargetReport> = targets.iter().map(|t| run_target(t, cfg, &tol)).collect();
    let failed: Vec<String> =
        reports.iter().flat_map(|r| r.checks.iter().filter(|c| !c.pass).map(move |c| format!("{}: {}", r.name, c.name))).collect();
    let out = OutDir::create(&cfg.out)?;
    out.json("report.json", &Report { all_pass: failed.is_empty(), tolerances: tol, targets: reports })?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Verification(failed.join(", ")))
    }
}
