//! Massless Dirac operators built from frames, their properties, and the
//! characterization of Dirac operators by the subprincipal symbol and `b(x)`.

use std::sync::Arc;

use serde::Serialize;

use crate::asymptotics::{a_density_closed, b_density_closed};
use crate::error::{Error, Result};
use crate::frame::{christoffel, frame_from_symbol, FrameBundle};
use crate::linalg::{c, det2, max_abs, metric_spinor, norm, r, trace, unitarity_residual, CMat, CVec};
use crate::operator::{OperatorSpec, PointField};
use crate::quadrature::{torus_cell_volume, torus_grid};
use crate::trig::TrigPoly;

/// Zero-order term of the Dirac operator at a point, evaluated from the frame jet.
fn dirac_zero_order_at(bundle: &FrameBundle, x: &[f64; 3], half_density: bool) -> CMat {
    let pt = bundle.at(x);
    let (sig, dsig) = bundle.pauli_jet_at(&pt);
    let chris = christoffel(&pt);
    let lower: [CMat; 3] = std::array::from_fn(|b| (0..3).fold(CMat::zeros(2, 2), |acc, g| acc + &sig[g] * r(pt.g_down[(b, g)])));
    let mut out = CMat::zeros(2, 2);
    for a in 0..3 {
        for b in 0..3 {
            let mut cov = dsig[a][b].clone();
            for g in 0..3 {
                cov += &sig[g] * r(chris[b][a][g]);
            }
            out += &sig[a] * &lower[b] * cov;
        }
    }
    out *= c(0.0, -0.25);
    if half_density {
        for a in 0..3 {
            let dlog = (pt.g_up * pt.dg_down[a]).trace();
            out += &sig[a] * c(0.0, 0.25 * dlog);
        }
    }
    out
}

/// Exact zero-order term when the metric is constant.
fn dirac_zero_order_trig(bundle: &FrameBundle) -> Option<TrigPoly> {
    let f = bundle.frame();
    let g_up = f.transpose().mul(f).pruned(1e-13);
    if !g_up.is_constant() {
        return None;
    }
    let g_up_c = g_up.coeff(&[0, 0, 0]).cloned().unwrap_or_else(|| CMat::zeros(3, 3));
    let g_down = g_up_c.try_inverse()?;
    let sig = bundle.pauli_field();
    let p = bundle.periods();
    let lower: Vec<TrigPoly> =
        (0..3).map(|b| (0..3).fold(TrigPoly::zero(2, 2, p), |acc, g| acc.add(&sig[g].scale(g_down[(b, g)])))).collect();
    let mut out = TrigPoly::zero(2, 2, p);
    for a in 0..3 {
        for b in 0..3 {
            out = out.add(&sig[a].mul(&lower[b]).mul(&sig[b].derivative(a)));
        }
    }
    Some(out.scale(c(0.0, -0.25)).pruned(1e-14))
}

/// The massless Dirac operator `W` of a frame, or its half-density version.
pub fn build_dirac(bundle: &FrameBundle, half_density: bool) -> Result<OperatorSpec> {
    let res = bundle.orthonormality_residual();
    if res > 1e-10 {
        return Err(Error::NotOrthonormal { residual: res });
    }
    let mut op = OperatorSpec::from_principal(bundle.pauli_field());
    op.half_density = half_density;
    match dirac_zero_order_trig(bundle) {
        Some(z) => op.zero_order = z,
        None => {
            let b = bundle.clone();
            op.zero_order_extra = Some(Arc::new(move |x| dirac_zero_order_at(&b, x, half_density)));
        }
    }
    if !half_density {
        let b = bundle.clone();
        op.weight = Some(Arc::new(move |x| b.at(x).sqrt_det_g));
    }
    Ok(op)
}

/// `(c/4) tr*T(x) I`.
pub fn dirac_subprincipal_closed(bundle: &FrameBundle, x: &[f64; 3]) -> CMat {
    let t = crate::frame::teleparallel_tensors(bundle, x).trace_star_t;
    CMat::identity(2, 2) * r(0.25 * bundle.c * t)
}

/// Which condition of the characterization failed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum DiracCondition {
    /// The subprincipal symbol is not a multiple of the identity somewhere.
    SubprincipalNotScalar,
    /// `b(x)` does not vanish somewhere.
    NonzeroB,
    /// Both hold but the rebuilt Dirac operator differs from the input.
    Reconstruction,
}

#[derive(Clone, Debug)]
pub struct DiracDecision {
    pub is_dirac: bool,
    pub failing: Option<DiracCondition>,
    pub witness: Option<FrameBundle>,
    pub max_off_identity: f64,
    /// `b(x)` at the grid point where `|b|` is largest.
    pub extreme_b: f64,
    /// Coefficient distance between the input and the rebuilt operator (when attempted).
    pub reconstruction_error: Option<f64>,
}

/// Decides whether `op` is a massless Dirac operator on half-densities.
///
/// Checks on a `grid^3` sample that the subprincipal symbol is scalar and that
/// `b(x)` vanishes; if both hold, extracts the frame from the principal symbol,
/// rebuilds the Dirac operator and compares coefficients.
pub fn is_massless_dirac(op: &OperatorSpec, grid: usize) -> Result<DiracDecision> {
    if op.m != 2 {
        return Err(Error::AssumptionViolated { which: 1, detail: format!("system size {} is not 2", op.m) });
    }
    for (a, b) in op.derivative_coeffs.iter().enumerate() {
        let t = b.trace().max_coeff();
        if t > 1e-12 {
            return Err(Error::AssumptionViolated { which: 2, detail: format!("principal coefficient {a} has trace {t:.3e}") });
        }
    }
    let bundle = frame_from_symbol(&op.derivative_coeffs)
        .map_err(|e| Error::AssumptionViolated { which: 3, detail: format!("principal symbol does not define a frame: {e}") })?;
    let mut max_off: f64 = 0.0;
    let mut scalar_ok = true;
    let mut b_ok = true;
    let mut extreme_b: f64 = 0.0;
    for x in torus_grid(op.periods, grid) {
        let sub = op.subprincipal_at(&x);
        let half_tr = trace(&sub) * 0.5;
        let off = norm(&(&sub - CMat::identity(2, 2) * half_tr));
        max_off = max_off.max(off);
        if off > 1e-8 * (1.0 + norm(&sub)) {
            scalar_ok = false;
        }
        let b = b_density_closed(&bundle, &sub, &x);
        if b.abs() > extreme_b.abs() {
            extreme_b = b;
        }
        if b.abs() > 1e-8 * (1.0 + a_density_closed(&bundle, &x)) {
            b_ok = false;
        }
    }
    let mut decision =
        DiracDecision { is_dirac: false, failing: None, witness: None, max_off_identity: max_off, extreme_b, reconstruction_error: None };
    if !scalar_ok {
        decision.failing = Some(DiracCondition::SubprincipalNotScalar);
        return Ok(decision);
    }
    if !b_ok {
        decision.failing = Some(DiracCondition::NonzeroB);
        return Ok(decision);
    }
    let rebuilt = build_dirac(&bundle, true)?;
    let err = op.coefficient_distance(&rebuilt, grid);
    decision.reconstruction_error = Some(err);
    if err > 1e-8 {
        decision.failing = Some(DiracCondition::Reconstruction);
        return Ok(decision);
    }
    decision.is_dirac = true;
    decision.witness = Some(bundle);
    Ok(decision)
}

fn inner(op: &OperatorSpec, u: &[CVec], v: &[CVec], pts: &[[f64; 3]], cell: f64) -> crate::linalg::C64 {
    let terms: Vec<crate::linalg::C64> = pts.iter().zip(u.iter().zip(v)).map(|(x, (a, b))| a.dotc(b) * op.weight_at(x)).collect();
    let re: Vec<f64> = terms.iter().map(|z| z.re).collect();
    let im: Vec<f64> = terms.iter().map(|z| z.im).collect();
    c(crate::linalg::pairwise_sum(&re), crate::linalg::pairwise_sum(&im)) * cell
}

/// `max |<v, A w> - <A v, w>|` over trial pairs, by trapezoid quadrature on a `grid^3` mesh.
pub fn selfadjointness_residual(op: &OperatorSpec, trials: &[(TrigPoly, TrigPoly)], grid: usize) -> f64 {
    let pts = torus_grid(op.periods, grid);
    let cell = torus_cell_volume(op.periods, grid);
    let col = |f: &TrigPoly, x: &[f64; 3]| -> CVec { f.eval(x).column(0).into_owned() };
    trials
        .iter()
        .map(|(v, w)| {
            let vv: Vec<CVec> = pts.iter().map(|x| col(v, x)).collect();
            let ww: Vec<CVec> = pts.iter().map(|x| col(w, x)).collect();
            let av: Vec<CVec> = pts.iter().map(|x| op.apply_at(v, x)).collect();
            let aw: Vec<CVec> = pts.iter().map(|x| op.apply_at(w, x)).collect();
            (inner(op, &vv, &aw, &pts, cell) - inner(op, &av, &ww, &pts, cell)).norm()
        })
        .fold(0.0, f64::max)
}

/// `C(v) = eps conj(v)` on a trigonometric column field.
pub fn charge_conjugate(v: &TrigPoly) -> TrigPoly {
    v.conj().left_mul(&metric_spinor())
}

/// `sup |C(A v) - A(C v)|` over trial fields and a `grid^3` mesh.
pub fn charge_conjugation_residual(op: &OperatorSpec, trials: &[TrigPoly], grid: usize) -> f64 {
    let eps = metric_spinor();
    let pts = torus_grid(op.periods, grid);
    let mut worst: f64 = 0.0;
    for v in trials {
        let cv = charge_conjugate(v);
        for x in &pts {
            let lhs = &eps * op.apply_at(v, x).map(|z| z.conj());
            let rhs = op.apply_at(&cv, x);
            worst = worst.max((lhs - rhs).norm());
        }
    }
    worst
}

/// The operator `R A R*` for a special unitary trigonometric field `R`.
pub fn transform_dirac_su2(op: &OperatorSpec, rf: &TrigPoly) -> Result<OperatorSpec> {
    if rf.rows() != 2 || rf.cols() != 2 || op.m != 2 {
        return Err(Error::DimensionMismatch("SU(2) transform needs 2x2 fields".into()));
    }
    for x in torus_grid(rf.periods(), 6) {
        let u = rf.eval(&x);
        let res = unitarity_residual(&u).max((det2(&u) - c(1.0, 0.0)).norm());
        if res > 1e-10 {
            return Err(Error::NotSpecialUnitary { residual: res });
        }
    }
    let ra = rf.adjoint();
    let derivative_coeffs: [TrigPoly; 3] = std::array::from_fn(|a| rf.mul(&op.derivative_coeffs[a]).mul(&ra).pruned(1e-15));
    let mut zero = rf.mul(&op.zero_order).mul(&ra);
    for a in 0..3 {
        zero = zero.sub(&rf.mul(&op.derivative_coeffs[a]).mul(&ra.derivative(a)).scale(c(0.0, 1.0)));
    }
    let mut out = OperatorSpec::new(derivative_coeffs, zero.pruned(1e-15), op.half_density)?;
    out.weight = op.weight.clone();
    if let Some(extra) = op.zero_order_extra.clone() {
        let r2 = rf.clone();
        let f: PointField = Arc::new(move |x| {
            let u = r2.eval(x);
            &u * extra(x) * u.adjoint()
        });
        out.zero_order_extra = Some(f);
    }
    Ok(out)
}

/// Largest entry of `A_sub - (c/4) tr*T I` over a `grid^3` sample.
pub fn subprincipal_closed_form_residual(bundle: &FrameBundle, grid: usize) -> Result<f64> {
    let op = build_dirac(bundle, true)?;
    Ok(torus_grid(bundle.periods(), grid)
        .iter()
        .map(|x| max_abs(&(op.subprincipal_at(x) - dirac_subprincipal_closed(bundle, x))))
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{random_frame, random_rotation_frame};
    use crate::linalg::pauli;
    use crate::trig::TWO_PI_PERIODS;

    fn trial(seed: u64) -> TrigPoly {
        let mut rng = crate::fixtures::rng(seed);
        use rand::Rng;
        let mut v = TrigPoly::zero(2, 1, TWO_PI_PERIODS);
        for _ in 0..3 {
            let w = [rng.gen_range(-2..=2), rng.gen_range(-2..=2), rng.gen_range(-2..=2)];
            v.add_term(w, CMat::from_fn(2, 1, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))));
        }
        v
    }

    #[test]
    fn constant_frame_operator() {
        let op = build_dirac(&FrameBundle::identity(), false).unwrap();
        assert!(op.is_polynomial());
        assert!(op.zero_order.max_coeff() < 1e-15);
        for a in 0..3 {
            assert!(norm(&(op.derivative_coeffs[a].eval(&[0.1, 0.2, 0.3]) - &pauli()[a])) < 1e-15);
        }
    }

    #[test]
    fn twisted_frame_zero_order_is_scalar() {
        for k in [1, 2, 3] {
            let b = FrameBundle::k3(k);
            let op = build_dirac(&b, true).unwrap();
            assert!(op.is_polynomial());
            let x = [0.3, 0.8, 1.9];
            let expect = CMat::identity(2, 2) * r(-0.5 * k as f64);
            assert!(norm(&(op.subprincipal_at(&x) - &expect)) < 1e-12);
            assert!(norm(&(dirac_subprincipal_closed(&b, &x) - &expect)) < 1e-12);
            let ptwise = dirac_zero_order_at(&b, &x, true);
            assert!(norm(&(ptwise - op.zero_order.eval(&x))) < 1e-12);
        }
    }

    #[test]
    fn closed_form_subprincipal_on_random_frames() {
        for seed in 0..3 {
            let b = random_frame(seed, 1, 0.15);
            assert!(subprincipal_closed_form_residual(&b, 4).unwrap() < 1e-10);
            let inv = b.inverted().unwrap();
            assert!(subprincipal_closed_form_residual(&inv, 3).unwrap() < 1e-10);
        }
    }

    #[test]
    fn self_adjoint_and_charge_conjugation() {
        let trials: Vec<(TrigPoly, TrigPoly)> = (0..3).map(|s| (trial(2 * s), trial(2 * s + 1))).collect();
        for b in [FrameBundle::k3(1), random_frame(4, 1, 0.15)] {
            for half in [false, true] {
                let op = build_dirac(&b, half).unwrap();
                // the weight sqrt(det g) is not a trigonometric polynomial, so the
                // trapezoid rule only converges spectrally in that case
                let (grid, tol) = if half { (12, 1e-10) } else { (24, 1e-7) };
                let res = selfadjointness_residual(&op, &trials, grid);
                assert!(res < tol, "half {half}: {res}");
            }
            let op = build_dirac(&b, true).unwrap();
            let singles: Vec<TrigPoly> = trials.iter().map(|t| t.0.clone()).collect();
            assert!(charge_conjugation_residual(&op, &singles, 6) < 1e-10);
        }
        let v = trial(9);
        let back = charge_conjugate(&charge_conjugate(&v));
        assert!(back.distance(&v.scale(r(-1.0))) < 1e-15);
        let broken = build_dirac(&FrameBundle::identity(), true).unwrap().with_constant_potential(CMat::identity(2, 2) * c(0.0, 1.0));
        let (v, w) = (trial(1), trial(1));
        let res = selfadjointness_residual(&broken, &[(v, w)], 8);
        assert!(res > 1.0);
    }

    #[test]
    fn decisions() {
        let op = build_dirac(&FrameBundle::k3(1), true).unwrap();
        let d = is_massless_dirac(&op, 4).unwrap();
        assert!(d.is_dirac && d.witness.is_some());
        let s = 0.3;
        let bad = op.clone().with_constant_potential(CMat::from_row_slice(2, 2, &[r(s), r(0.0), r(0.0), r(0.0)]));
        let d = is_massless_dirac(&bad, 4).unwrap();
        assert_eq!(d.failing, Some(DiracCondition::SubprincipalNotScalar));
        let c0 = 0.4;
        let bad = op.with_constant_potential(CMat::identity(2, 2) * r(c0));
        let d = is_massless_dirac(&bad, 4).unwrap();
        assert_eq!(d.failing, Some(DiracCondition::NonzeroB));
        let expect = -c0 / (2.0 * std::f64::consts::PI.powi(2));
        assert!((d.extreme_b - expect).abs() < 1e-12);
        let rot = build_dirac(&random_rotation_frame(2, 1), true).unwrap();
        assert!(rot.is_polynomial());
        assert!(is_massless_dirac(&rot, 4).unwrap().is_dirac);
        let three = crate::fixtures::random_operator(1, 3, 1, 0.1);
        assert!(matches!(is_massless_dirac(&three, 2), Err(Error::AssumptionViolated { which: 1, .. })));
    }

    #[test]
    fn su2_transform_matches_rotated_frame() {
        let b = FrameBundle::identity();
        let op = build_dirac(&b, true).unwrap();
        // R = diag(e^{i x3}, e^{-i x3}) turns the identity frame into the k = 2 twisted frame.
        let mut rf = TrigPoly::zero(2, 2, TWO_PI_PERIODS);
        rf.add_term([0, 0, 1], CMat::from_row_slice(2, 2, &[r(1.0), r(0.0), r(0.0), r(0.0)]));
        rf.add_term([0, 0, -1], CMat::from_row_slice(2, 2, &[r(0.0), r(0.0), r(0.0), r(1.0)]));
        let t = transform_dirac_su2(&op, &rf).unwrap();
        let o = crate::frame::su2_field_to_so3(&rf);
        let rebuilt = build_dirac(&b.rotated_by_field(&o).unwrap(), true).unwrap();
        assert!(t.coefficient_distance(&rebuilt, 4) < 1e-12);
        assert!(rebuilt.coefficient_distance(&build_dirac(&FrameBundle::k3(2), true).unwrap(), 4) < 1e-12);
        let bad = TrigPoly::constant(CMat::identity(2, 2) * r(1.5), TWO_PI_PERIODS);
        assert!(matches!(transform_dirac_su2(&op, &bad), Err(Error::NotSpecialUnitary { .. })));
    }
}
