use crate::error::{Error, Result};
use crate::linalg::{r, CMat};

use super::{CotangentPoint, SymbolPair, MIXED_FD_STEP};

/// Value and derivatives of a matrix field at one cotangent point.
///
/// `dx[a]` is the derivative in `x^a`, `dxi[a]` the derivative in `xi_a`,
/// `dxdxi[a][b]` the mixed derivative in `x^a` and `xi_b`.
#[derive(Clone, Debug)]
pub struct SymbolJet {
    pub value: CMat,
    pub dx: Vec<CMat>,
    pub dxi: Vec<CMat>,
    pub dxdxi: Option<Vec<Vec<CMat>>>,
}

/// Fourth-order central difference with one Richardson level.
pub fn fd_derivative<F: Fn(f64) -> CMat>(f: F, h: f64) -> CMat {
    let d = |h: f64| -> CMat {
        let a = f(h) - f(-h);
        let b = f(2.0 * h) - f(-2.0 * h);
        (a * r(8.0) - b) * r(1.0 / (12.0 * h))
    };
    let coarse = d(h);
    let fine = d(0.5 * h);
    (fine * r(16.0) - coarse) * r(1.0 / 15.0)
}

fn check_step(step: f64) -> Result<()> {
    if !(step >= 1e-12) || !step.is_finite() {
        return Err(Error::StepUnderflow { step });
    }
    Ok(())
}

fn shifted(v: &[f64], a: usize, t: f64) -> Vec<f64> {
    let mut out = v.to_vec();
    out[a] += t;
    out
}

fn fd_dx<F: Fn(&[f64], &[f64]) -> CMat>(f: &F, x: &[f64], xi: &[f64], a: usize, h: f64) -> CMat {
    fd_derivative(|t| f(&shifted(x, a, t), xi), h)
}

fn fd_dxi<F: Fn(&[f64], &[f64]) -> CMat>(f: &F, x: &[f64], xi: &[f64], a: usize, h: f64) -> CMat {
    fd_derivative(|t| f(x, &shifted(xi, a, t)), h)
}

fn xi_scale(pt: &CotangentPoint) -> f64 {
    pt.xi_norm().max(1.0)
}

/// First-order jet of an arbitrary matrix field by finite differences.
pub fn field_jet<F: Fn(&[f64], &[f64]) -> CMat>(f: F, pt: &CotangentPoint, step: f64) -> Result<SymbolJet> {
    check_step(step)?;
    let n = pt.n();
    let hxi = step * xi_scale(pt);
    Ok(SymbolJet {
        value: f(&pt.x, &pt.xi),
        dx: (0..n).map(|a| fd_dx(&f, &pt.x, &pt.xi, a, step)).collect(),
        dxi: (0..n).map(|a| fd_dxi(&f, &pt.x, &pt.xi, a, hxi)).collect(),
        dxdxi: None,
    })
}

fn mixed_fd<F: Fn(&[f64], &[f64]) -> CMat>(f: &F, pt: &CotangentPoint, a: usize, b: usize, step: f64) -> CMat {
    let hx = step;
    let hxi = step * xi_scale(pt);
    fd_derivative(|t| fd_dxi(f, &shifted(&pt.x, a, t), &pt.xi, b, hxi), hx)
}

/// Jet of the principal symbol, including the full mixed block.
pub fn symbol_jet(sym: &SymbolPair, pt: &CotangentPoint) -> Result<SymbolJet> {
    let mut jet = principal_first_jet(sym, pt)?;
    let n = pt.n();
    let table = match &sym.principal_dxdxi {
        Some(f) => f(&pt.x, &pt.xi),
        None => {
            let mixed_step = MIXED_FD_STEP.max(sym.fd_step);
            check_step(mixed_step)?;
            let p = sym.principal_arc();
            let f = move |x: &[f64], xi: &[f64]| p(x, xi);
            (0..n).map(|a| (0..n).map(|b| mixed_fd(&f, pt, a, b, mixed_step)).collect()).collect()
        }
    };
    jet.dxdxi = Some(table);
    Ok(jet)
}

/// Jet of the principal symbol without the mixed block.
pub(crate) fn principal_first_jet(sym: &SymbolPair, pt: &CotangentPoint) -> Result<SymbolJet> {
    if pt.n() != sym.n() {
        return Err(Error::DimensionMismatch(format!("point dimension {} vs symbol dimension {}", pt.n(), sym.n())));
    }
    check_step(sym.fd_step)?;
    let p = sym.principal_arc();
    let f = move |x: &[f64], xi: &[f64]| p(x, xi);
    let n = pt.n();
    let hxi = sym.fd_step * xi_scale(pt);
    let dx = match &sym.principal_dx {
        Some(d) => d(&pt.x, &pt.xi),
        None => (0..n).map(|a| fd_dx(&f, &pt.x, &pt.xi, a, sym.fd_step)).collect(),
    };
    let dxi = match &sym.principal_dxi {
        Some(d) => d(&pt.x, &pt.xi),
        None => (0..n).map(|a| fd_dxi(&f, &pt.x, &pt.xi, a, hxi)).collect(),
    };
    Ok(SymbolJet { value: f(&pt.x, &pt.xi), dx, dxi, dxdxi: None })
}

/// `sum_a d^2 A1 / dx^a dxi_a`.
pub(crate) fn mixed_trace(sym: &SymbolPair, pt: &CotangentPoint) -> Result<CMat> {
    if pt.n() != sym.n() {
        return Err(Error::DimensionMismatch(format!("point dimension {} vs symbol dimension {}", pt.n(), sym.n())));
    }
    let m = sym.m();
    if let Some(f) = &sym.principal_dxdxi {
        let t = f(&pt.x, &pt.xi);
        return Ok((0..pt.n()).fold(CMat::zeros(m, m), |acc, a| acc + &t[a][a]));
    }
    check_step(sym.fd_step)?;
    let mixed_step = MIXED_FD_STEP.max(sym.fd_step);
    let p = sym.principal_arc();
    let f = move |x: &[f64], xi: &[f64]| p(x, xi);
    Ok((0..pt.n()).fold(CMat::zeros(m, m), |acc, a| acc + mixed_fd(&f, pt, a, a, mixed_step)))
}
