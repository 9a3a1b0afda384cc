//! Matrix-symbol calculus on the punctured cotangent bundle.
//!
//! A [`SymbolPair`] bundles the principal symbol `A1(x, xi)` (positively
//! homogeneous of degree one in `xi`) with the zero-order part `A0(x, xi)`.
//! Everything downstream (eigen-decompositions, Poisson brackets, the
//! subprincipal symbol, the U(1) curvature) is a pure function of a symbol
//! and a [`CotangentPoint`].

mod bracket;
mod curvature;
mod eigen;
mod jet;
mod unitary;

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{check_hermitian, eigh, norm, r, CMat};

pub use bracket::{generalized_bracket, generalized_bracket_jets, poisson_bracket, poisson_bracket_jets};
pub(crate) use curvature::terms_from as terms_for_flow;
pub use curvature::{
    bracket_terms, curvature_scalar_from_section, generalized_term_from_section, phase_aligned_section, projector_derivatives,
    propagator_zero_subprincipal, u1_curvature, BracketTerms, U1CurvatureData,
};
pub use eigen::{principal_eigensystem, EigenSystem, ELLIPTICITY_TOL, GAP_TOL};
pub(crate) use jet::principal_first_jet as jet_for_flow;
pub use jet::{fd_derivative, field_jet, symbol_jet, SymbolJet};
pub use unitary::{transform_operator_unitary, UnitaryField};

/// Default relative finite-difference step for first derivatives.
pub const DEFAULT_FD_STEP: f64 = 1e-4;

/// Step used for nested (mixed second) differences, where roundoff scales as eps/h^2.
pub const MIXED_FD_STEP: f64 = 1e-2;

/// A point `(x, xi)` of the cotangent bundle with `xi != 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct CotangentPoint {
    pub x: Vec<f64>,
    pub xi: Vec<f64>,
}

impl CotangentPoint {
    pub fn new(x: Vec<f64>, xi: Vec<f64>) -> Result<Self> {
        if x.len() != xi.len() {
            return Err(Error::DimensionMismatch(format!("x has {} components, xi has {}", x.len(), xi.len())));
        }
        if xi.iter().all(|v| *v == 0.0) {
            return Err(Error::InvalidArgument("covector must be nonzero".into()));
        }
        Ok(Self { x, xi })
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn xi_norm(&self) -> f64 {
        self.xi.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { x: self.x.clone(), xi: self.xi.iter().map(|v| v * s).collect() }
    }
}

pub type MatrixFn = Arc<dyn Fn(&[f64], &[f64]) -> CMat + Send + Sync>;
pub type MatrixListFn = Arc<dyn Fn(&[f64], &[f64]) -> Vec<CMat> + Send + Sync>;
pub type MatrixTableFn = Arc<dyn Fn(&[f64], &[f64]) -> Vec<Vec<CMat>> + Send + Sync>;

/// Full symbol `A = A1 + A0` of a first-order operator.
#[derive(Clone)]
pub struct SymbolPair {
    n: usize,
    m: usize,
    principal: MatrixFn,
    zero_order: MatrixFn,
    pub(crate) principal_dx: Option<MatrixListFn>,
    pub(crate) principal_dxi: Option<MatrixListFn>,
    pub(crate) principal_dxdxi: Option<MatrixTableFn>,
    pub fd_step: f64,
}

impl std::fmt::Debug for SymbolPair {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SymbolPair")
            .field("n", &self.n)
            .field("m", &self.m)
            .field("analytic_dx", &self.principal_dx.is_some())
            .field("analytic_dxi", &self.principal_dxi.is_some())
            .field("analytic_dxdxi", &self.principal_dxdxi.is_some())
            .field("fd_step", &self.fd_step)
            .finish()
    }
}

impl SymbolPair {
    pub fn new<P, Z>(n: usize, m: usize, principal: P, zero_order: Z) -> Self
    where
        P: Fn(&[f64], &[f64]) -> CMat + Send + Sync + 'static,
        Z: Fn(&[f64], &[f64]) -> CMat + Send + Sync + 'static,
    {
        Self {
            n,
            m,
            principal: Arc::new(principal),
            zero_order: Arc::new(zero_order),
            principal_dx: None,
            principal_dxi: None,
            principal_dxdxi: None,
            fd_step: DEFAULT_FD_STEP,
        }
    }

    pub(crate) fn from_arcs(n: usize, m: usize, principal: MatrixFn, zero_order: MatrixFn) -> Self {
        Self { n, m, principal, zero_order, principal_dx: None, principal_dxi: None, principal_dxdxi: None, fd_step: DEFAULT_FD_STEP }
    }

    /// Supplies analytic first derivatives of the principal symbol.
    pub fn with_principal_derivatives<DX, DXI>(mut self, dx: DX, dxi: DXI) -> Self
    where
        DX: Fn(&[f64], &[f64]) -> Vec<CMat> + Send + Sync + 'static,
        DXI: Fn(&[f64], &[f64]) -> Vec<CMat> + Send + Sync + 'static,
    {
        self.principal_dx = Some(Arc::new(dx));
        self.principal_dxi = Some(Arc::new(dxi));
        self
    }

    /// Supplies analytic mixed derivatives `d^2 A1 / dx^a dxi_b`, indexed `[a][b]`.
    pub fn with_mixed_derivatives<F>(mut self, f: F) -> Self
    where
        F: Fn(&[f64], &[f64]) -> Vec<Vec<CMat>> + Send + Sync + 'static,
    {
        self.principal_dxdxi = Some(Arc::new(f));
        self
    }

    pub fn with_fd_step(mut self, step: f64) -> Self {
        self.fd_step = step;
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn principal(&self, x: &[f64], xi: &[f64]) -> CMat {
        (self.principal)(x, xi)
    }

    pub fn zero_order(&self, x: &[f64], xi: &[f64]) -> CMat {
        (self.zero_order)(x, xi)
    }

    pub(crate) fn principal_arc(&self) -> MatrixFn {
        self.principal.clone()
    }

    pub(crate) fn zero_order_arc(&self) -> MatrixFn {
        self.zero_order.clone()
    }

    pub fn has_analytic_derivatives(&self) -> bool {
        self.principal_dx.is_some() && self.principal_dxi.is_some()
    }

    /// The symbol of `-A`.
    pub fn negated(&self) -> Self {
        let p = self.principal.clone();
        let z = self.zero_order.clone();
        let mut out = Self::from_arcs(self.n, self.m, Arc::new(move |x, xi| -p(x, xi)), Arc::new(move |x, xi| -z(x, xi)));
        out.fd_step = self.fd_step;
        if let Some(d) = self.principal_dx.clone() {
            out.principal_dx = Some(Arc::new(move |x, xi| d(x, xi).into_iter().map(|m| -m).collect()));
        }
        if let Some(d) = self.principal_dxi.clone() {
            out.principal_dxi = Some(Arc::new(move |x, xi| d(x, xi).into_iter().map(|m| -m).collect()));
        }
        if let Some(d) = self.principal_dxdxi.clone() {
            out.principal_dxdxi =
                Some(Arc::new(move |x, xi| d(x, xi).into_iter().map(|row| row.into_iter().map(|m| -m).collect()).collect()));
        }
        out
    }

    /// Checks homogeneity, Hermiticity and ellipticity at the given points.
    pub fn check_invariants(&self, points: &[CotangentPoint]) -> Result<()> {
        for pt in points {
            if pt.n() != self.n {
                return Err(Error::DimensionMismatch(format!("point dimension {} vs symbol dimension {}", pt.n(), self.n)));
            }
            let a1 = self.principal(&pt.x, &pt.xi);
            let a0 = self.zero_order(&pt.x, &pt.xi);
            if a1.nrows() != self.m || a0.nrows() != self.m {
                return Err(Error::DimensionMismatch("symbol matrix size".into()));
            }
            check_hermitian(&a1, 1e-12)?;
            check_hermitian(&a0, 1e-12)?;
            for lam in [0.5, 2.0, 7.0] {
                let scaled = self.principal(&pt.x, &pt.scaled(lam).xi);
                let res = norm(&(scaled - &a1 * r(lam)));
                if res > 1e-10 * lam * (1.0 + norm(&a1)) {
                    return Err(Error::InvalidArgument(format!("principal symbol not homogeneous of degree 1 (residual {res:.3e})")));
                }
            }
            let (vals, _) = eigh(&a1);
            let radius = vals.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
            if let Some(v) = vals.iter().find(|v| v.abs() <= ELLIPTICITY_TOL * radius.max(f64::MIN_POSITIVE)) {
                return Err(Error::EllipticityViolated { value: *v });
            }
        }
        Ok(())
    }
}

/// Subprincipal symbol `A_sub = A0 + (i/2) sum_a d^2 A1 / dx^a dxi_a`.
///
/// Fails with `NotHermitian` when the result has a significant anti-Hermitian
/// part, which signals a symbol that does not come from a symmetric operator.
pub fn subprincipal_symbol(sym: &SymbolPair, pt: &CotangentPoint) -> Result<CMat> {
    let raw = subprincipal_symbol_raw(sym, pt)?;
    check_hermitian(&raw, 1e-7)?;
    Ok(crate::linalg::hermitian_part(&raw))
}

/// As [`subprincipal_symbol`] without the Hermiticity gate.
pub fn subprincipal_symbol_raw(sym: &SymbolPair, pt: &CotangentPoint) -> Result<CMat> {
    let mixed = jet::mixed_trace(sym, pt)?;
    Ok(sym.zero_order(&pt.x, &pt.xi) + mixed * crate::linalg::c(0.0, 0.5))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::sigma_dot;
    use crate::linalg::{c, pauli, CMat};

    #[test]
    fn subprincipal_of_constant_frame_is_zero_order_term() {
        let a0 = CMat::from_row_slice(2, 2, &[r(0.3), c(0.1, 0.2), c(0.1, -0.2), r(-0.5)]);
        let a0c = a0.clone();
        let sym = SymbolPair::new(3, 2, |_, xi| sigma_dot(xi), move |_, _| a0c.clone());
        let pt = CotangentPoint::new(vec![0.2, 0.4, 1.0], vec![0.3, -1.0, 0.5]).unwrap();
        let sub = subprincipal_symbol(&sym, &pt).unwrap();
        assert!(norm(&(sub - a0)) < 1e-9);
    }

    #[test]
    fn non_symmetric_input_is_rejected() {
        let eps = 0.3;
        let sym = SymbolPair::new(3, 2, move |x, xi| sigma_dot(xi) * r(1.0 + eps * x[0].sin()), |_, _| CMat::zeros(2, 2));
        let pt = CotangentPoint::new(vec![0.4, 0.0, 0.0], vec![1.0, 0.2, -0.3]).unwrap();
        let raw = subprincipal_symbol_raw(&sym, &pt).unwrap();
        let expect = &pauli()[0] * c(0.0, 0.5 * eps * 0.4_f64.cos());
        assert!(norm(&(raw - expect)) < 1e-8);
        assert!(matches!(subprincipal_symbol(&sym, &pt), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn invariants_detect_non_homogeneous_symbol() {
        let sym = SymbolPair::new(3, 2, |_, xi| sigma_dot(xi) + CMat::identity(2, 2), |_, _| CMat::zeros(2, 2));
        let pt = CotangentPoint::new(vec![0.0; 3], vec![1.0, 0.0, 0.0]).unwrap();
        assert!(sym.check_invariants(&[pt]).is_err());
    }

    #[test]
    fn zero_covector_is_rejected() {
        assert!(CotangentPoint::new(vec![0.0; 3], vec![0.0; 3]).is_err());
    }
}
