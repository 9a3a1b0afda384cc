use crate::error::{Error, Result};
use crate::linalg::CMat;

use super::jet::field_jet;
use super::{CotangentPoint, SymbolJet};

fn check_dims(a: &SymbolJet, b: &SymbolJet) -> Result<()> {
    if a.dx.len() != b.dx.len() || a.value.ncols() != b.value.nrows() {
        return Err(Error::DimensionMismatch("bracket operands".into()));
    }
    Ok(())
}

/// `{P, R} = P_x R_xi - P_xi R_x` from precomputed jets.
pub fn poisson_bracket_jets(p: &SymbolJet, q: &SymbolJet) -> Result<CMat> {
    check_dims(p, q)?;
    let mut out = CMat::zeros(p.value.nrows(), q.value.ncols());
    for a in 0..p.dx.len() {
        out += &p.dx[a] * &q.dxi[a] - &p.dxi[a] * &q.dx[a];
    }
    Ok(out)
}

/// `{P, Q, R} = P_x Q R_xi - P_xi Q R_x` from precomputed jets.
pub fn generalized_bracket_jets(p: &SymbolJet, q: &CMat, r: &SymbolJet) -> Result<CMat> {
    check_dims(p, r)?;
    if p.value.ncols() != q.nrows() || q.ncols() != r.value.nrows() {
        return Err(Error::DimensionMismatch("middle factor of generalized bracket".into()));
    }
    let mut out = CMat::zeros(p.value.nrows(), r.value.ncols());
    for a in 0..p.dx.len() {
        out += &p.dx[a] * q * &r.dxi[a] - &p.dxi[a] * q * &r.dx[a];
    }
    Ok(out)
}

/// Poisson bracket of two matrix fields, differentiated numerically.
pub fn poisson_bracket<F, G>(p: F, q: G, pt: &CotangentPoint, step: f64) -> Result<CMat>
where
    F: Fn(&[f64], &[f64]) -> CMat,
    G: Fn(&[f64], &[f64]) -> CMat,
{
    poisson_bracket_jets(&field_jet(p, pt, step)?, &field_jet(q, pt, step)?)
}

/// Generalized bracket `{P, Q, R}` with `Q` evaluated at the point.
pub fn generalized_bracket<F, G, H>(p: F, q: G, rr: H, pt: &CotangentPoint, step: f64) -> Result<CMat>
where
    F: Fn(&[f64], &[f64]) -> CMat,
    G: Fn(&[f64], &[f64]) -> CMat,
    H: Fn(&[f64], &[f64]) -> CMat,
{
    let qv = q(&pt.x, &pt.xi);
    generalized_bracket_jets(&field_jet(p, pt, step)?, &qv, &field_jet(rr, pt, step)?)
}
