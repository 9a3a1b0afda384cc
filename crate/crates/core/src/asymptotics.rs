//! Weyl densities `a(x)`, `b(x)` and the global coefficients `a`, `b`.
//!
//! Integrands are homogeneous of degree zero in `xi`, so the integral over
//! `{h(x, xi) < 1}` reduces to a weighted average over the unit sphere:
//! `int_{h<1} F dxi = (1/n) sum_k w_k s_k^n F(omega_k)` with `s_k = 1/h(x, omega_k)`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::frame::{teleparallel_tensors, FrameBundle};
use crate::linalg::{c, pairwise_sum, trace, CMat, I};
use crate::operator::OperatorSpec;
use crate::quadrature::{torus_cell_volume, torus_grid, SphereRule};
use crate::symbol::{principal_eigensystem, subprincipal_symbol, CotangentPoint, SymbolPair};

/// Unit-sphere rule rescaled to the cosphere `{h^(j)(x, xi) = 1}`.
#[derive(Clone, Debug)]
pub struct CosphereRule {
    pub dim: usize,
    pub j: i32,
    pub nodes: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    /// `s_k = 1 / h^(j)(x, omega_k)`.
    pub scales: Vec<f64>,
}

impl CosphereRule {
    /// `int_{h<1} F dxi / (2 pi)^n` for `F` homogeneous of degree 0.
    pub fn integrate<F: Fn(&[f64]) -> f64 + Sync>(&self, f: F) -> f64 {
        let n = self.dim as i32;
        let terms: Vec<f64> =
            (0..self.nodes.len()).into_par_iter().map(|k| self.weights[k] * self.scales[k].powi(n) * f(&self.nodes[k])).collect();
        pairwise_sum(&terms) / (self.dim as f64 * (2.0 * PI).powi(n))
    }
}

/// Per-eigenvalue contributions to the densities.
#[derive(Clone, Debug, Serialize)]
pub struct DensityTerm {
    pub j: i32,
    pub a: f64,
    pub b: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct AsymptoticDensities {
    pub a_x: f64,
    pub b_x: f64,
    pub per_j: Vec<DensityTerm>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GlobalCoefficients {
    pub a: f64,
    pub b: f64,
}

fn check_dim(sym: &SymbolPair, x: &[f64]) -> Result<()> {
    if x.len() != sym.n() {
        return Err(Error::DimensionMismatch(format!("x has {} components, symbol dimension {}", x.len(), sym.n())));
    }
    if !(2..=3).contains(&sym.n()) {
        return Err(Error::InvalidArgument("cosphere quadrature supports n = 2 and n = 3".into()));
    }
    Ok(())
}

/// Cosphere rule for the positive eigenvalue `j` at `x`.
pub fn cosphere_quadrature(sym: &SymbolPair, x: &[f64], j: i32, rule: &SphereRule) -> Result<CosphereRule> {
    check_dim(sym, x)?;
    if j <= 0 {
        return Err(Error::InvalidArgument("cosphere quadrature is defined for positive eigenvalues".into()));
    }
    let scales = rule
        .nodes
        .par_iter()
        .map(|w| {
            let pt = CotangentPoint { x: x.to_vec(), xi: w.clone() };
            let es = principal_eigensystem(sym, &pt)?;
            let h = es.h(j)?;
            if h <= 0.0 {
                return Err(Error::EllipticityViolated { value: h });
            }
            Ok(1.0 / h)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(CosphereRule { dim: rule.dim, j, nodes: rule.nodes.clone(), weights: rule.weights.clone(), scales })
}

/// Integrand of `b(x)` for every positive eigenvalue at one point, in index order `1..=m+`.
///
/// `tr(A_sub P) - (i/2){v*, A1 - h, v} + (i/(n-1)) h {v*, v}`, evaluated with projectors.
pub fn b_integrand(sym: &SymbolPair, pt: &CotangentPoint) -> Result<Vec<f64>> {
    let terms = crate::symbol::bracket_terms(sym, pt)?;
    let sub = subprincipal_symbol(sym, pt)?;
    let n = pt.n() as f64;
    Ok(terms
        .iter()
        .filter(|t| t.index > 0)
        .map(|t| {
            let z = trace(&(&sub * &t.projector)) - c(0.0, 0.5) * t.generalized + I * t.bracket_vv * (t.h / (n - 1.0));
            z.re
        })
        .collect())
}

/// `a(x)` and `b(x)` with per-eigenvalue contributions.
pub fn densities(sym: &SymbolPair, x: &[f64], rule: &SphereRule) -> Result<AsymptoticDensities> {
    check_dim(sym, x)?;
    let n = sym.n() as i32;
    let per_node = rule
        .nodes
        .par_iter()
        .map(|w| {
            let pt = CotangentPoint { x: x.to_vec(), xi: w.clone() };
            let es = principal_eigensystem(sym, &pt)?;
            let hs: Vec<f64> = (1..=es.m_plus as i32).map(|j| es.h(j)).collect::<Result<_>>()?;
            let f = b_integrand(sym, &pt)?;
            Ok((hs, f))
        })
        .collect::<Result<Vec<(Vec<f64>, Vec<f64>)>>>()?;
    let m_plus = per_node.first().map_or(0, |p| p.0.len());
    if per_node.iter().any(|p| p.0.len() != m_plus) {
        return Err(Error::EllipticityViolated { value: 0.0 });
    }
    let norm = (2.0 * PI).powi(n);
    let mut per_j = Vec::with_capacity(m_plus);
    for j in 0..m_plus {
        let vol: Vec<f64> = per_node.iter().zip(&rule.weights).map(|(p, w)| w * p.0[j].powi(-n)).collect();
        let bt: Vec<f64> = per_node.iter().zip(&rule.weights).map(|(p, w)| w * p.0[j].powi(-n) * p.1[j]).collect();
        per_j.push(DensityTerm { j: j as i32 + 1, a: pairwise_sum(&vol) / (n as f64 * norm), b: -pairwise_sum(&bt) / norm });
    }
    Ok(AsymptoticDensities {
        a_x: pairwise_sum(&per_j.iter().map(|t| t.a).collect::<Vec<_>>()),
        b_x: pairwise_sum(&per_j.iter().map(|t| t.b).collect::<Vec<_>>()),
        per_j,
    })
}

pub fn a_density(sym: &SymbolPair, x: &[f64]) -> Result<f64> {
    Ok(densities(sym, x, &SphereRule::default_for(sym.n()))?.a_x)
}

pub fn b_density(sym: &SymbolPair, x: &[f64]) -> Result<f64> {
    Ok(densities(sym, x, &SphereRule::default_for(sym.n()))?.b_x)
}

/// `a(x) = (2 pi)^{-3} (4 pi / 3) sqrt(det g_{alpha beta})` for a frame operator.
pub fn a_density_closed(bundle: &FrameBundle, x: &[f64; 3]) -> f64 {
    bundle.at(x).sqrt_det_g * (4.0 * PI / 3.0) / (2.0 * PI).powi(3)
}

/// `b(x) = (1/8 pi^2) (c tr*T - 2 tr A_sub) sqrt(det g_{alpha beta})` for `m = 2`, `n = 3`.
pub fn b_density_closed(bundle: &FrameBundle, a_sub: &CMat, x: &[f64; 3]) -> f64 {
    let t = teleparallel_tensors(bundle, x).trace_star_t;
    let sqrt_g = bundle.at(x).sqrt_det_g;
    (bundle.c * t - 2.0 * trace(a_sub).re) * sqrt_g / (8.0 * PI * PI)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CoefficientMethod {
    /// Cosphere quadrature of the general formula.
    Quadrature,
    /// Closed form through the frame (m = 2, trace-free principal symbol).
    Closed,
    /// Closed form when available, quadrature otherwise.
    Auto,
}

#[derive(Clone, Debug)]
pub struct GlobalOptions {
    /// Grid points per axis for the torus trapezoid rule.
    pub grid: usize,
    pub method: CoefficientMethod,
    pub rule: SphereRule,
}

impl Default for GlobalOptions {
    fn default() -> Self {
        Self { grid: 8, method: CoefficientMethod::Auto, rule: SphereRule::new(3, 16, 32) }
    }
}

/// Densities of an operator at one point by the requested method.
pub fn operator_densities(
    op: &OperatorSpec,
    x: &[f64; 3],
    method: CoefficientMethod,
    rule: &SphereRule,
) -> Result<(f64, f64, CoefficientMethod)> {
    let closed = match method {
        CoefficientMethod::Quadrature => None,
        _ if op.m == 2 => crate::frame::frame_from_symbol(&op.derivative_coeffs).ok(),
        _ => None,
    };
    match (method, closed) {
        (CoefficientMethod::Closed, None) => Err(Error::InvalidArgument("closed form needs a 2x2 trace-free principal symbol".into())),
        (_, Some(bundle)) => {
            let sub = op.subprincipal_at(x);
            Ok((a_density_closed(&bundle, x), b_density_closed(&bundle, &sub, x), CoefficientMethod::Closed))
        }
        (_, None) => {
            let d = densities(&op.to_symbol(), x, rule)?;
            Ok((d.a_x, d.b_x, CoefficientMethod::Quadrature))
        }
    }
}

/// `a = int a(x) dx`, `b = int b(x) dx` by the trapezoid rule over the torus.
///
/// Constant-coefficient operators are integrated exactly from a single point.
pub fn global_coefficients(op: &OperatorSpec, opts: &GlobalOptions) -> Result<GlobalCoefficients> {
    let constant = op.active_axes().iter().all(|a| !a) && op.is_polynomial();
    let grid = if constant { 1 } else { opts.grid };
    let pts = torus_grid(op.periods, grid);
    let cell = torus_cell_volume(op.periods, grid);
    let vals =
        pts.iter().map(|x| operator_densities(op, x, opts.method, &opts.rule).map(|(a, b, _)| (a, b))).collect::<Result<Vec<_>>>()?;
    let a: Vec<f64> = vals.iter().map(|v| v.0).collect();
    let b: Vec<f64> = vals.iter().map(|v| v.1).collect();
    Ok(GlobalCoefficients { a: pairwise_sum(&a) * cell, b: pairwise_sum(&b) * cell })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{k3_symbol, sigma_dot};
    use crate::linalg::{pauli, r};

    fn pauli_plus(a0: CMat) -> SymbolPair {
        SymbolPair::new(3, 2, |_, xi| sigma_dot(xi), move |_, _| a0.clone())
    }

    #[test]
    fn unit_ball_volume() {
        let sym = pauli_plus(CMat::zeros(2, 2));
        let rule = SphereRule::new(3, 16, 32);
        let cs = cosphere_quadrature(&sym, &[0.0; 3], 1, &rule).unwrap();
        let v = cs.integrate(|_| 1.0);
        assert!((v - 1.0 / (6.0 * PI * PI)).abs() < 1e-15);
        let two = SymbolPair::new(3, 2, |_, xi| sigma_dot(xi) * r(2.0), |_, _| CMat::zeros(2, 2));
        let cs = cosphere_quadrature(&two, &[0.0; 3], 1, &rule).unwrap();
        assert!((cs.integrate(|_| 1.0) - 1.0 / (48.0 * PI * PI)).abs() < 1e-15);
        assert!((a_density(&sym, &[0.0; 3]).unwrap() - 1.0 / (6.0 * PI * PI)).abs() < 1e-15);
    }

    #[test]
    fn two_positive_eigenvalues_add() {
        let sym = SymbolPair::new(
            3,
            3,
            |_, xi| {
                let mut m = CMat::zeros(3, 3);
                m.view_mut((0, 0), (2, 2)).copy_from(&sigma_dot(xi));
                m[(2, 2)] = r(2.0 * (xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]).sqrt());
                m
            },
            |_, _| CMat::zeros(3, 3),
        );
        let d = densities(&sym, &[0.0; 3], &SphereRule::new(3, 8, 16)).unwrap();
        let ball = 1.0 / (6.0 * PI * PI);
        assert_eq!(d.per_j.len(), 2);
        assert!((d.a_x - ball * (1.0 + 1.0 / 8.0)).abs() < 1e-14);
    }

    #[test]
    fn perturbed_pauli_b_density() {
        let s = 0.2;
        let a0 = CMat::from_row_slice(2, 2, &[r(s), r(0.0), r(0.0), r(0.0)]);
        let sym = pauli_plus(a0);
        let b = b_density(&sym, &[0.0; 3]).unwrap();
        assert!((b + s / (4.0 * PI * PI)).abs() < 1e-14);
        let neg = sym.negated();
        assert!((b_density(&neg, &[0.0; 3]).unwrap() - s / (4.0 * PI * PI)).abs() < 1e-14);
    }

    #[test]
    fn dirac_b_density_vanishes() {
        for k in [1.0, 2.0] {
            let sym = k3_symbol(k);
            let d = densities(&sym, &[0.3, 0.2, 1.0], &SphereRule::new(3, 16, 32)).unwrap();
            assert!(d.b_x.abs() < 1e-10, "{}", d.b_x);
        }
    }

    #[test]
    fn closed_forms_on_twisted_frame() {
        let b = FrameBundle::k3(1);
        let c0 = 0.3;
        let sub = CMat::identity(2, 2) * r(-0.5 + c0);
        let v = b_density_closed(&b, &sub, &[0.0; 3]);
        assert!((v + c0 / (2.0 * PI * PI)).abs() < 1e-15);
        let s = 0.2;
        let sub = CMat::from_row_slice(2, 2, &[r(s), r(0.0), r(0.0), r(0.0)]);
        assert!((b_density_closed(&FrameBundle::identity(), &sub, &[0.0; 3]) + s / (4.0 * PI * PI)).abs() < 1e-15);
        let _ = pauli();
    }

    #[test]
    fn global_coefficients_of_pauli_operators() {
        let op = OperatorSpec::pauli_plus(CMat::zeros(2, 2));
        let g = global_coefficients(&op, &GlobalOptions::default()).unwrap();
        assert!((g.a - 4.0 * PI / 3.0).abs() < 1e-12 && g.b.abs() < 1e-14);
        let s = 0.5;
        let op = OperatorSpec::pauli_plus(CMat::from_row_slice(2, 2, &[r(s), r(0.0), r(0.0), r(0.0)]));
        for method in [CoefficientMethod::Closed, CoefficientMethod::Quadrature] {
            let g = global_coefficients(&op, &GlobalOptions { method, ..GlobalOptions::default() }).unwrap();
            assert!((g.b + 2.0 * PI * s).abs() < 1e-10, "{method:?}: {}", g.b);
        }
    }
}
