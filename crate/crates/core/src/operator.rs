//! First-order differential operators `A = B^alpha(x) (-i d/dx^alpha) + C(x)` on the 3-torus.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{c, CMat, CVec};
use crate::symbol::SymbolPair;
use crate::trig::TrigPoly;

pub type PointField = Arc<dyn Fn(&[f64; 3]) -> CMat + Send + Sync>;
pub type PointDensity = Arc<dyn Fn(&[f64; 3]) -> f64 + Send + Sync>;

/// A first-order matrix differential operator with trigonometric coefficients.
///
/// The zero-order term is the trigonometric polynomial `zero_order` plus an
/// optional pointwise correction; operators built from frames with a
/// non-constant metric carry one, since inverse-metric expressions are not
/// trigonometric polynomials.
#[derive(Clone)]
pub struct OperatorSpec {
    pub m: usize,
    pub periods: [f64; 3],
    pub derivative_coeffs: [TrigPoly; 3],
    pub zero_order: TrigPoly,
    pub zero_order_extra: Option<PointField>,
    /// True when the operator acts on half-densities (inner product with `dx`).
    pub half_density: bool,
    /// Density of the inner product; `None` means `dx`.
    pub weight: Option<PointDensity>,
}

impl std::fmt::Debug for OperatorSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OperatorSpec")
            .field("m", &self.m)
            .field("periods", &self.periods)
            .field("max_harmonic", &self.max_harmonic())
            .field("polynomial", &self.is_polynomial())
            .field("half_density", &self.half_density)
            .finish()
    }
}

impl OperatorSpec {
    pub fn new(derivative_coeffs: [TrigPoly; 3], zero_order: TrigPoly, half_density: bool) -> Result<Self> {
        let m = zero_order.rows();
        let periods = zero_order.periods();
        for (a, b) in derivative_coeffs.iter().enumerate() {
            if b.rows() != m || b.cols() != m {
                return Err(Error::DimensionMismatch(format!("derivative coefficient {a} is {}x{}, expected {m}", b.rows(), b.cols())));
            }
            if b.periods() != periods {
                return Err(Error::DimensionMismatch("coefficient periods differ".into()));
            }
            let res = b.hermitian_residual();
            if res > 1e-12 {
                return Err(Error::NotHermitian { residual: res });
            }
        }
        if zero_order.cols() != m {
            return Err(Error::DimensionMismatch("zero-order term must be square".into()));
        }
        Ok(Self { m, periods, derivative_coeffs, zero_order, zero_order_extra: None, half_density, weight: None })
    }

    /// Operator `sigma^alpha (-i d_alpha)` with no zero-order term.
    pub fn from_principal(sigma: [TrigPoly; 3]) -> Self {
        let m = sigma[0].rows();
        let zero = TrigPoly::zero(m, m, sigma[0].periods());
        Self::new(sigma, zero, true).expect("principal coefficients are Hermitian")
    }

    /// Constant-coefficient operator `B^alpha (-i d_alpha) + C` with 2pi periods.
    pub fn constant(b: [CMat; 3], zero: CMat) -> Result<Self> {
        let p = crate::trig::TWO_PI_PERIODS;
        Self::new(b.map(|m| TrigPoly::constant(m, p)), TrigPoly::constant(zero, p), true)
    }

    /// `sigma . D + a0` on the unit torus.
    pub fn pauli_plus(a0: CMat) -> Self {
        Self::constant(crate::linalg::pauli(), a0).expect("Pauli operator")
    }

    pub fn with_potential(mut self, v: &TrigPoly) -> Self {
        self.zero_order = self.zero_order.add(v).pruned(0.0);
        self
    }

    pub fn with_constant_potential(self, v: CMat) -> Self {
        let p = TrigPoly::constant(v, self.periods);
        self.with_potential(&p)
    }

    /// The operator `-A`.
    pub fn negated(&self) -> Self {
        let minus = c(-1.0, 0.0);
        Self {
            m: self.m,
            periods: self.periods,
            derivative_coeffs: self.derivative_coeffs.clone().map(|b| b.scale(minus)),
            zero_order: self.zero_order.scale(minus),
            zero_order_extra: self.zero_order_extra.clone().map(|f| -> PointField { Arc::new(move |x| -f(x)) }),
            half_density: self.half_density,
            weight: self.weight.clone(),
        }
    }

    pub fn is_polynomial(&self) -> bool {
        self.zero_order_extra.is_none()
    }

    pub fn max_harmonic(&self) -> usize {
        self.derivative_coeffs.iter().map(|b| b.max_harmonic()).chain(std::iter::once(self.zero_order.max_harmonic())).max().unwrap_or(0)
    }

    /// Axes along which some coefficient varies.
    pub fn active_axes(&self) -> [bool; 3] {
        let mut out = [false; 3];
        for f in self.derivative_coeffs.iter().chain(std::iter::once(&self.zero_order)) {
            let a = f.active_axes();
            for i in 0..3 {
                out[i] |= a[i];
            }
        }
        out
    }

    pub fn weight_at(&self, x: &[f64; 3]) -> f64 {
        self.weight.as_ref().map_or(1.0, |w| w(x))
    }

    pub fn zero_order_at(&self, x: &[f64; 3]) -> CMat {
        let base = self.zero_order.eval(x);
        match &self.zero_order_extra {
            Some(f) => base + f(x),
            None => base,
        }
    }

    pub fn principal_at(&self, x: &[f64; 3], xi: &[f64]) -> CMat {
        let mut out = CMat::zeros(self.m, self.m);
        for a in 0..3 {
            out += self.derivative_coeffs[a].eval(x) * c(xi[a], 0.0);
        }
        out
    }

    /// `A_sub(x) = C(x) + (i/2) d_alpha B^alpha(x)`.
    pub fn subprincipal_at(&self, x: &[f64; 3]) -> CMat {
        let mut div = CMat::zeros(self.m, self.m);
        for a in 0..3 {
            let (_, g) = self.derivative_coeffs[a].eval_grad(x);
            div += &g[a];
        }
        self.zero_order_at(x) + div * c(0.0, 0.5)
    }

    /// Exact subprincipal symbol when the operator is polynomial.
    pub fn subprincipal_trig(&self) -> Result<TrigPoly> {
        if !self.is_polynomial() {
            return Err(Error::NonPolynomialCoefficient("zero-order term has a pointwise part".into()));
        }
        let div = (0..3).fold(TrigPoly::zero(self.m, self.m, self.periods), |acc, a| acc.add(&self.derivative_coeffs[a].derivative(a)));
        Ok(self.zero_order.add(&div.scale(c(0.0, 0.5))))
    }

    /// Full symbol with exact derivatives of the principal part.
    pub fn to_symbol(&self) -> SymbolPair {
        let b = Arc::new(self.derivative_coeffs.clone());
        let m = self.m;
        let x3 = |x: &[f64]| [x[0], x[1], x[2]];
        let (b1, b2, b3) = (b.clone(), b.clone(), b.clone());
        let principal = move |x: &[f64], xi: &[f64]| {
            let x = x3(x);
            let mut out = CMat::zeros(m, m);
            for a in 0..3 {
                out += b1[a].eval(&x) * c(xi[a], 0.0);
            }
            out
        };
        let op = self.clone();
        let zero = move |x: &[f64], _: &[f64]| op.zero_order_at(&x3(x));
        let dx = move |x: &[f64], xi: &[f64]| {
            let x = x3(x);
            let mut out = vec![CMat::zeros(m, m), CMat::zeros(m, m), CMat::zeros(m, m)];
            for a in 0..3 {
                let (_, g) = b2[a].eval_grad(&x);
                for mu in 0..3 {
                    out[mu] += &g[mu] * c(xi[a], 0.0);
                }
            }
            out
        };
        let dxi = move |x: &[f64], _: &[f64]| {
            let x = x3(x);
            (0..3).map(|a| b3[a].eval(&x)).collect()
        };
        let mixed = move |x: &[f64], _: &[f64]| {
            let x = x3(x);
            let grads: Vec<[CMat; 3]> = (0..3).map(|a| b[a].eval_grad(&x).1).collect();
            (0..3).map(|mu| (0..3).map(|a| grads[a][mu].clone()).collect()).collect()
        };
        SymbolPair::new(3, m, principal, zero).with_principal_derivatives(dx, dxi).with_mixed_derivatives(mixed)
    }

    /// `(A v)(x)` for a trigonometric column field `v`.
    pub fn apply_at(&self, v: &TrigPoly, x: &[f64; 3]) -> CVec {
        let (val, grad) = v.eval_grad(x);
        let mut out = self.zero_order_at(x) * &val;
        for a in 0..3 {
            out += self.derivative_coeffs[a].eval(x) * &grad[a] * c(0.0, -1.0);
        }
        out.column(0).into_owned()
    }

    /// `A v` exactly in coefficient space; requires a polynomial operator.
    pub fn apply_trig(&self, v: &TrigPoly) -> Result<TrigPoly> {
        if !self.is_polynomial() {
            return Err(Error::NonPolynomialCoefficient("zero-order term has a pointwise part".into()));
        }
        let mut out = self.zero_order.mul(v);
        for a in 0..3 {
            out = out.add(&self.derivative_coeffs[a].mul(&v.derivative(a)).scale(c(0.0, -1.0)));
        }
        Ok(out)
    }

    /// Largest distance between the coefficients of two operators; zero-order terms compared on a grid.
    pub fn coefficient_distance(&self, other: &Self, grid: usize) -> f64 {
        let d = (0..3).map(|a| self.derivative_coeffs[a].distance(&other.derivative_coeffs[a])).fold(0.0, f64::max);
        if self.is_polynomial() && other.is_polynomial() {
            return d.max(self.zero_order.distance(&other.zero_order));
        }
        crate::quadrature::torus_grid(self.periods, grid)
            .iter()
            .map(|x| crate::linalg::max_abs(&(self.zero_order_at(x) - other.zero_order_at(x))))
            .fold(d, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{random_operator, sigma_dot};
    use crate::linalg::{norm, pauli, r};
    use crate::symbol::{subprincipal_symbol, symbol_jet, CotangentPoint};
    use crate::trig::TWO_PI_PERIODS;

    #[test]
    fn symbol_of_constant_operator() {
        let op = OperatorSpec::pauli_plus(pauli()[2].clone() * r(0.3));
        let sym = op.to_symbol();
        let xi = [0.2, -0.4, 0.9];
        assert!(norm(&(sym.principal(&[0.0; 3], &xi) - sigma_dot(&xi))) < 1e-15);
        let pt = CotangentPoint::new(vec![0.1; 3], xi.to_vec()).unwrap();
        assert!(norm(&(subprincipal_symbol(&sym, &pt).unwrap() - pauli()[2].clone() * r(0.3))) < 1e-15);
    }

    #[test]
    fn analytic_jet_matches_finite_differences() {
        let op = random_operator(3, 2, 2, 0.2);
        let sym = op.to_symbol();
        let fd = SymbolPair::new(
            3,
            2,
            {
                let s = sym.clone();
                move |x, xi| s.principal(x, xi)
            },
            |_, _| CMat::zeros(2, 2),
        );
        let pt = CotangentPoint::new(vec![0.3, 1.2, 2.1], vec![0.5, -0.7, 0.4]).unwrap();
        let a = symbol_jet(&sym, &pt).unwrap();
        let b = symbol_jet(&fd, &pt).unwrap();
        for mu in 0..3 {
            assert!(norm(&(&a.dx[mu] - &b.dx[mu])) < 1e-9);
            assert!(norm(&(&a.dxi[mu] - &b.dxi[mu])) < 1e-9);
            for al in 0..3 {
                assert!(norm(&(&a.dxdxi.as_ref().unwrap()[mu][al] - &b.dxdxi.as_ref().unwrap()[mu][al])) < 1e-7);
            }
        }
    }

    #[test]
    fn apply_matches_pointwise() {
        let op = random_operator(5, 2, 2, 0.2);
        let mut v = TrigPoly::zero(2, 1, TWO_PI_PERIODS);
        v.add_term([1, 0, -1], CMat::from_row_slice(2, 1, &[c(0.3, 0.1), c(-0.2, 0.5)]));
        v.add_term([0, 2, 0], CMat::from_row_slice(2, 1, &[c(0.1, 0.0), c(0.0, 0.7)]));
        let av = op.apply_trig(&v).unwrap();
        let x = [0.4, 1.9, 3.3];
        let diff = av.eval(&x).column(0).into_owned() - op.apply_at(&v, &x);
        assert!(diff.norm() < 1e-13);
    }

    #[test]
    fn subprincipal_trig_matches_pointwise() {
        let op = random_operator(8, 3, 1, 0.2);
        let s = op.subprincipal_trig().unwrap();
        let x = [1.0, 2.0, 3.0];
        assert!(norm(&(s.eval(&x) - op.subprincipal_at(&x))) < 1e-13);
        assert!(crate::linalg::anti_hermitian_residual(&s.eval(&x)) < 1e-13);
    }
}
