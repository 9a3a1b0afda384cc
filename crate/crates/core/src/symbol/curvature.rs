use crate::error::{Error, Result};
use crate::linalg::{c, dot, trace, CMat, CVec, C64, I};

use super::eigen::{fix_gauge, principal_eigensystem, EigenSystem, GAP_TOL};
use super::jet::{fd_derivative, principal_first_jet};
use super::{subprincipal_symbol, CotangentPoint, SymbolJet, SymbolPair};

/// Per-eigenvalue bracket quantities at one point, all evaluated through projectors.
#[derive(Clone, Debug)]
pub struct BracketTerms {
    pub index: i32,
    pub h: f64,
    pub projector: CMat,
    /// `{v*, v} = tr(P {P, P})`, purely imaginary.
    pub bracket_vv: C64,
    /// `{v*, A1 - h, v}`, purely imaginary.
    pub generalized: C64,
    /// `-i {v*, v}`.
    pub curvature: f64,
}

/// U(1) curvature of one eigenvector line bundle at a point.
#[derive(Clone, Debug)]
pub struct U1CurvatureData {
    pub scalar: f64,
    /// Antisymmetric `2n x 2n` matrix over `(x, xi)`.
    pub form: Vec<Vec<f64>>,
    /// `i v* dv` for the canonical gauge (largest component real positive).
    pub potential: Vec<f64>,
}

fn denominator(hj: f64, hl: f64, radius: f64) -> Result<f64> {
    let d = hj - hl;
    if d.abs() < GAP_TOL * radius {
        return Err(Error::DegenerateEigenvalue { gap: d.abs() / radius, tol: GAP_TOL });
    }
    Ok(d)
}

fn radius(es: &EigenSystem) -> f64 {
    es.values().iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

/// Derivative of the projector at `pos` along a symbol derivative `da`.
fn projector_derivative(es: &EigenSystem, projectors: &[CMat], pos: usize, da: &CMat) -> Result<CMat> {
    let m = es.m();
    let rad = radius(es);
    let pj = &projectors[pos];
    let mut out = CMat::zeros(m, m);
    for l in (0..m).filter(|&l| l != pos) {
        let d = denominator(es.value_at(pos), es.value_at(l), rad)?;
        let pl = &projectors[l];
        out += (pl * da * pj + pj * da * pl) * c(1.0 / d, 0.0);
    }
    Ok(out)
}

/// Projector derivatives `(dx, dxi)` for every eigenvalue, ordered by ascending eigenvalue.
pub fn projector_derivatives(es: &EigenSystem, jet: &SymbolJet) -> Result<Vec<(Vec<CMat>, Vec<CMat>)>> {
    let projectors: Vec<CMat> = (0..es.m()).map(|p| es.projector_at(p)).collect();
    (0..es.m())
        .map(|pos| {
            let dx = jet.dx.iter().map(|d| projector_derivative(es, &projectors, pos, d)).collect::<Result<Vec<_>>>()?;
            let dxi = jet.dxi.iter().map(|d| projector_derivative(es, &projectors, pos, d)).collect::<Result<Vec<_>>>()?;
            Ok((dx, dxi))
        })
        .collect()
}

/// Eigenvector derivative in the parallel gauge (`v* dv = 0` at the point).
fn vector_derivative(es: &EigenSystem, pos: usize, da: &CMat) -> Result<CVec> {
    let m = es.m();
    let rad = radius(es);
    let vj: CVec = es.vectors().column(pos).into_owned();
    let mut out = CVec::zeros(m);
    for l in (0..m).filter(|&l| l != pos) {
        let d = denominator(es.value_at(pos), es.value_at(l), rad)?;
        let vl: CVec = es.vectors().column(l).into_owned();
        let coef = dot(&vl, &(da * &vj)) / d;
        out += vl * coef;
    }
    Ok(out)
}

pub(crate) fn terms_from(es: &EigenSystem, jet: &SymbolJet) -> Result<Vec<BracketTerms>> {
    let derivs = projector_derivatives(es, jet)?;
    let m = es.m();
    let mut out = Vec::with_capacity(m);
    for (pos, (px, pxi)) in derivs.iter().enumerate() {
        let p = es.projector_at(pos);
        let h = es.value_at(pos);
        let shifted = &jet.value - CMat::identity(m, m) * c(h, 0.0);
        let mut pbb = CMat::zeros(m, m);
        let mut gen = CMat::zeros(m, m);
        for a in 0..px.len() {
            pbb += &px[a] * &pxi[a] - &pxi[a] * &px[a];
            gen += &px[a] * &shifted * &pxi[a] - &pxi[a] * &shifted * &px[a];
        }
        let bracket_vv = trace(&(&p * pbb));
        out.push(BracketTerms {
            index: es.signed_index(pos),
            h,
            projector: p,
            bracket_vv,
            generalized: trace(&gen),
            curvature: (-I * bracket_vv).re,
        });
    }
    Ok(out)
}

/// Bracket quantities for every eigenvalue at `pt`, ordered by ascending eigenvalue.
pub fn bracket_terms(sym: &SymbolPair, pt: &CotangentPoint) -> Result<Vec<BracketTerms>> {
    let es = principal_eigensystem(sym, pt)?;
    let jet = principal_first_jet(sym, pt)?;
    terms_from(&es, &jet)
}

/// U(1) curvature scalar, form and potential for eigenvalue `j`.
pub fn u1_curvature(sym: &SymbolPair, j: i32, pt: &CotangentPoint) -> Result<U1CurvatureData> {
    let es = principal_eigensystem(sym, pt)?;
    let pos = es.position(j)?;
    let jet = principal_first_jet(sym, pt)?;
    let terms = terms_from(&es, &jet)?;
    let n = pt.n();
    let dv: Vec<CVec> = jet.dx.iter().chain(jet.dxi.iter()).map(|d| vector_derivative(&es, pos, d)).collect::<Result<_>>()?;
    let mut form = vec![vec![0.0; 2 * n]; 2 * n];
    for a in 0..2 * n {
        for b in (a + 1)..2 * n {
            let w = dot(&dv[b], &dv[a]);
            form[a][b] = -2.0 * w.im;
            form[b][a] = 2.0 * w.im;
        }
    }
    let v: CVec = es.vectors().column(pos).into_owned();
    let (k, vk) =
        v.iter().enumerate().fold((0, -1.0), |(bk, bm), (i, z)| if z.norm() > bm * (1.0 + 1e-12) { (i, z.norm()) } else { (bk, bm) });
    let potential = dv.iter().map(|d| d[k].im / vk).collect();
    Ok(U1CurvatureData { scalar: terms[pos].curvature, form, potential })
}

/// Eigenvector section whose phase is aligned with the eigenvector at `pt`.
///
/// Evaluating it near `pt` gives a locally smooth section, suitable as a
/// finite-difference oracle for the projector-based formulas.
pub fn phase_aligned_section(sym: &SymbolPair, j: i32, pt: &CotangentPoint) -> Result<impl Fn(&[f64], &[f64]) -> CVec> {
    let es = principal_eigensystem(sym, pt)?;
    let v0 = es.v(j)?;
    let sym = sym.clone();
    Ok(move |x: &[f64], xi: &[f64]| {
        let a1 = sym.principal(x, xi);
        let (_, vecs) = crate::linalg::eigh(&a1);
        let es_here = EigenSystem::from_matrix(&a1);
        let mut v: CVec = match es_here.and_then(|e| e.v(j)) {
            Ok(v) => v,
            Err(_) => vecs.column(0).into_owned(),
        };
        fix_gauge(&mut v);
        let ov = dot(&v0, &v);
        if ov.norm() > 0.0 {
            v *= ov.conj() / ov.norm();
        }
        v
    })
}

fn section_jet<F: Fn(&[f64], &[f64]) -> CVec>(section: &F, pt: &CotangentPoint, step: f64) -> (Vec<CVec>, Vec<CVec>) {
    let as_mat = |x: &[f64], xi: &[f64]| -> CMat {
        let v = section(x, xi);
        CMat::from_column_slice(v.len(), 1, v.as_slice())
    };
    let n = pt.n();
    let hxi = step * pt.xi_norm().max(1.0);
    let col = |m: CMat| -> CVec { m.column(0).into_owned() };
    let dx = (0..n)
        .map(|a| {
            col(fd_derivative(
                |t| {
                    let mut x = pt.x.clone();
                    x[a] += t;
                    as_mat(&x, &pt.xi)
                },
                step,
            ))
        })
        .collect();
    let dxi = (0..n)
        .map(|a| {
            col(fd_derivative(
                |t| {
                    let mut xi = pt.xi.clone();
                    xi[a] += t;
                    as_mat(&pt.x, &xi)
                },
                hxi,
            ))
        })
        .collect();
    (dx, dxi)
}

/// `-i {v*, v}` computed directly from a user-supplied smooth eigenvector section.
pub fn curvature_scalar_from_section<F: Fn(&[f64], &[f64]) -> CVec>(section: F, pt: &CotangentPoint, step: f64) -> f64 {
    let (dx, dxi) = section_jet(&section, pt, step);
    let mut b = C64::new(0.0, 0.0);
    for a in 0..pt.n() {
        b += dot(&dx[a], &dxi[a]) - dot(&dxi[a], &dx[a]);
    }
    (-I * b).re
}

/// `{v*, A1 - h, v}` computed directly from a smooth eigenvector section.
pub fn generalized_term_from_section<F: Fn(&[f64], &[f64]) -> CVec>(
    sym: &SymbolPair,
    h: f64,
    section: F,
    pt: &CotangentPoint,
    step: f64,
) -> C64 {
    let (dx, dxi) = section_jet(&section, pt, step);
    let m = sym.m();
    let shifted = sym.principal(&pt.x, &pt.xi) - CMat::identity(m, m) * c(h, 0.0);
    let mut g = C64::new(0.0, 0.0);
    for a in 0..pt.n() {
        g += dot(&dx[a], &(&shifted * &dxi[a])) - dot(&dxi[a], &(&shifted * &dx[a]));
    }
    g
}

/// Subprincipal symbol of the propagator at time zero for eigenvalue `j`.
pub fn propagator_zero_subprincipal(sym: &SymbolPair, j: i32, pt: &CotangentPoint) -> Result<CMat> {
    let es = principal_eigensystem(sym, pt)?;
    let pos = es.position(j)?;
    let jet = principal_first_jet(sym, pt)?;
    let sub = subprincipal_symbol(sym, pt)?;
    let m = es.m();
    let rad = radius(&es);
    let projectors: Vec<CMat> = (0..m).map(|p| es.projector_at(p)).collect();
    let derivs = projector_derivatives(&es, &jet)?;
    let id = CMat::identity(m, m);
    // {A1 + h_l, P_l}
    let bracket = |l: usize| -> CMat {
        let (px, pxi) = &derivs[l];
        let mut out = CMat::zeros(m, m);
        for a in 0..jet.dx.len() {
            let hx = trace(&(&projectors[l] * &jet.dx[a])).re;
            let hxi = trace(&(&projectors[l] * &jet.dxi[a])).re;
            let fx = &jet.dx[a] + &id * c(hx, 0.0);
            let fxi = &jet.dxi[a] + &id * c(hxi, 0.0);
            out += fx * &pxi[a] - fxi * &px[a];
        }
        out
    };
    let two = c(2.0, 0.0);
    let pj = &projectors[pos];
    let bj = bracket(pos);
    let mut out = CMat::zeros(m, m);
    for l in (0..m).filter(|&l| l != pos) {
        let d = denominator(es.value_at(pos), es.value_at(l), rad)?;
        let pl = &projectors[l];
        let term = pl * (&sub * pj * two + &bj * I) + pj * (&sub * pl * two + bracket(l) * I);
        out += term * c(0.5 / d, 0.0);
    }
    Ok(out)
}
