use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{c, unitarity_residual, CMat};

use super::jet::fd_derivative;
use super::SymbolPair;

type FieldFn = Arc<dyn Fn(&[f64]) -> CMat + Send + Sync>;
type FieldGradFn = Arc<dyn Fn(&[f64]) -> Vec<CMat> + Send + Sync>;

/// A smooth unitary matrix field `R(x)`.
#[derive(Clone)]
pub struct UnitaryField {
    n: usize,
    value: FieldFn,
    dx: Option<FieldGradFn>,
}

impl UnitaryField {
    pub fn new<F>(n: usize, value: F) -> Self
    where
        F: Fn(&[f64]) -> CMat + Send + Sync + 'static,
    {
        Self { n, value: Arc::new(value), dx: None }
    }

    pub fn with_derivative<G>(mut self, dx: G) -> Self
    where
        G: Fn(&[f64]) -> Vec<CMat> + Send + Sync + 'static,
    {
        self.dx = Some(Arc::new(dx));
        self
    }

    pub fn eval(&self, x: &[f64]) -> CMat {
        (self.value)(x)
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<CMat> {
        match &self.dx {
            Some(d) => d(x),
            None => (0..self.n)
                .map(|a| {
                    fd_derivative(
                        |t| {
                            let mut y = x.to_vec();
                            y[a] += t;
                            (self.value)(&y)
                        },
                        1e-4,
                    )
                })
                .collect(),
        }
    }
}

/// Deterministic sample points used to validate user-supplied fields.
pub(crate) fn sample_points(n: usize) -> Vec<Vec<f64>> {
    let mut out = vec![vec![0.0; n]];
    for s in 1..=6 {
        out.push((0..n).map(|a| ((s * 7 + a * 3) as f64 * 0.731).rem_euclid(std::f64::consts::TAU)).collect());
    }
    out
}

/// Symbol of `R* A R`, expressed as a new [`SymbolPair`].
///
/// The principal symbol becomes `R A1 R*` and the zero-order part picks up
/// `-i R (A1)_xi R*_x`, which is what makes the subprincipal symbol transform
/// with the extra commutator-like term.
pub fn transform_operator_unitary(sym: &SymbolPair, rf: &UnitaryField) -> Result<SymbolPair> {
    if rf.n != sym.n() {
        return Err(Error::DimensionMismatch(format!("unitary field on {} dims, symbol on {}", rf.n, sym.n())));
    }
    for x in sample_points(sym.n()) {
        let u = rf.eval(&x);
        if u.nrows() != sym.m() {
            return Err(Error::DimensionMismatch("unitary field size".into()));
        }
        let res = unitarity_residual(&u);
        if res > 1e-10 {
            return Err(Error::NotUnitary { residual: res });
        }
    }
    let n = sym.n();
    let (p, z) = (sym.principal_arc(), sym.zero_order_arc());
    let dxi_src = sym.principal_dxi.clone();
    let step = sym.fd_step;
    let a1_dxi = move |x: &[f64], xi: &[f64]| -> Vec<CMat> {
        match &dxi_src {
            Some(d) => d(x, xi),
            None => {
                let hxi = step * xi.iter().map(|v| v * v).sum::<f64>().sqrt().max(1.0);
                (0..n)
                    .map(|a| {
                        fd_derivative(
                            |t| {
                                let mut e = xi.to_vec();
                                e[a] += t;
                                p(x, &e)
                            },
                            hxi,
                        )
                    })
                    .collect()
            }
        }
    };
    let p = sym.principal_arc();
    let r1 = rf.clone();
    let principal = move |x: &[f64], xi: &[f64]| {
        let u = r1.eval(x);
        &u * p(x, xi) * u.adjoint()
    };
    let r0 = rf.clone();
    let zero = move |x: &[f64], xi: &[f64]| {
        let u = r0.eval(x);
        let ua = u.adjoint();
        let du = r0.gradient(x);
        let dxi = a1_dxi(x, xi);
        let mut out = &u * z(x, xi) * &ua;
        for a in 0..n {
            out -= &u * &dxi[a] * du[a].adjoint() * c(0.0, 1.0);
        }
        out
    };
    let mut out = SymbolPair::new(n, sym.m(), principal, zero);
    out.fd_step = sym.fd_step;
    if let Some(d) = sym.principal_dxi.clone() {
        let r2 = rf.clone();
        out.principal_dxi = Some(Arc::new(move |x, xi| {
            let u = r2.eval(x);
            let ua = u.adjoint();
            d(x, xi).into_iter().map(|m| &u * m * &ua).collect()
        }));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::sigma_dot;
    use crate::linalg::{exp_i_involution, norm, pauli, r};
    use crate::symbol::{subprincipal_symbol, CotangentPoint};

    #[test]
    fn rotating_gauge_shifts_subprincipal_symbol() {
        let sym = SymbolPair::new(3, 2, |_, xi| sigma_dot(xi), |_, _| CMat::zeros(2, 2));
        let s3 = pauli()[2].clone();
        let rf = UnitaryField::new(3, move |x| exp_i_involution(0.5 * x[2], &s3));
        let t = transform_operator_unitary(&sym, &rf).unwrap();
        let p = CotangentPoint::new(vec![0.2, 0.1, 0.9], vec![0.3, 0.7, -0.4]).unwrap();
        let sub = subprincipal_symbol(&t, &p).unwrap();
        assert!(norm(&(&sub + CMat::identity(2, 2) * r(0.5))) < 1e-7, "{sub}");
    }

    #[test]
    fn identity_and_non_unitary() {
        let sym = SymbolPair::new(3, 2, |_, xi| sigma_dot(xi), |_, _| pauli()[0].clone());
        let t = transform_operator_unitary(&sym, &UnitaryField::new(3, |_| CMat::identity(2, 2))).unwrap();
        let p = CotangentPoint::new(vec![0.2, 0.1, 0.9], vec![0.3, 0.7, -0.4]).unwrap();
        assert!(norm(&(t.principal(&p.x, &p.xi) - sym.principal(&p.x, &p.xi))) < 1e-15);
        assert!(norm(&(t.zero_order(&p.x, &p.xi) - sym.zero_order(&p.x, &p.xi))) < 1e-15);
        let bad = UnitaryField::new(3, |_| CMat::identity(2, 2) * r(1.1));
        assert!(matches!(transform_operator_unitary(&sym, &bad), Err(Error::NotUnitary { .. })));
    }
}
