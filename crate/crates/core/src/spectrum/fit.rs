//! Least-squares fits of counting data and spectral-asymmetry reports.

use nalgebra::{DMatrix, DVector, Matrix3};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

use super::galerkin::SpectralData;
use super::mollifier::{mollified_counting, Mollifier};

/// `N(lambda) ~ a lambda^3 + b lambda^2 + c lambda`.
#[derive(Clone, Debug, Serialize)]
pub struct CubicFit {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// Covariance of `(a, b, c)` from the residual variance.
    pub covariance: [[f64; 3]; 3],
    pub rms_residual: f64,
    pub range: [f64; 2],
    pub samples: usize,
}

impl CubicFit {
    pub fn model(&self, lambda: f64) -> f64 {
        ((self.a * lambda + self.b) * lambda + self.c) * lambda
    }
}

/// Least squares on the model `a l^3 + b l^2 + c l`.
pub fn fit_cubic(lambdas: &[f64], counts: &[f64]) -> Result<CubicFit> {
    let n = lambdas.len();
    if n != counts.len() || n < 4 {
        return Err(Error::InvalidArgument("fit needs at least four paired samples".into()));
    }
    // columns scaled by the largest lambda keep the normal equations well conditioned
    let scale = lambdas.iter().cloned().fold(0.0, |m: f64, l| m.max(l.abs()));
    let x = DMatrix::from_fn(n, 3, |i, j| (lambdas[i] / scale).powi(3 - j as i32));
    let y = DVector::from_column_slice(counts);
    let svd = x.clone().svd(true, true);
    let cond = svd.singular_values.max() / svd.singular_values.min();
    if !cond.is_finite() || cond > 1e12 {
        return Err(Error::SingularSystem { condition: cond });
    }
    let beta = svd.solve(&y, 1e-14).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let resid = &y - &x * &beta;
    let dof = (n - 3) as f64;
    let sigma2 = resid.norm_squared() / dof;
    let xtx: Matrix3<f64> = (x.transpose() * &x).fixed_view::<3, 3>(0, 0).into_owned();
    let inv = xtx.try_inverse().ok_or(Error::SingularSystem { condition: cond })?;
    let unscale = [scale.powi(3), scale.powi(2), scale];
    let mut cov = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            cov[i][j] = sigma2 * inv[(i, j)] / (unscale[i] * unscale[j]);
        }
    }
    let lo = lambdas.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = lambdas.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(CubicFit {
        a: beta[0] / unscale[0],
        b: beta[1] / unscale[1],
        c: beta[2] / unscale[2],
        covariance: cov,
        rms_residual: (resid.norm_squared() / n as f64).sqrt(),
        range: [lo, hi],
        samples: n,
    })
}

/// Uniform grid of `samples` points on `[lo, hi]`.
pub fn lambda_grid(lo: f64, hi: f64, samples: usize) -> Vec<f64> {
    (0..samples).map(|i| lo + (hi - lo) * i as f64 / (samples - 1).max(1) as f64).collect()
}

/// Fit of the mollified counting function over `[lo, hi]`.
pub fn fit_mollified(data: &SpectralData, moll: &Mollifier, lo: f64, hi: f64, samples: usize) -> Result<CubicFit> {
    let ls = lambda_grid(lo, hi, samples);
    let ns = ls.par_iter().map(|l| mollified_counting(data, moll, *l)).collect::<Result<Vec<_>>>()?;
    fit_cubic(&ls, &ns)
}

/// Spectrum of `-A` from that of `A`.
pub fn negated_spectrum(data: &SpectralData) -> SpectralData {
    SpectralData::from_values(data.values.iter().map(|l| -l).collect(), data.m, data.periods, data.window)
}

#[derive(Clone, Debug, Serialize)]
pub struct AsymmetryRow {
    pub lambda: f64,
    pub n_plus: usize,
    pub n_minus: usize,
    pub mollified_plus: f64,
    pub mollified_minus: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct AsymmetryReport {
    pub rows: Vec<AsymmetryRow>,
    pub fit_plus: CubicFit,
    pub fit_minus: CubicFit,
    /// `|a_A - a_{-A}| / a_A`.
    pub a_relative_gap: f64,
    /// `|b_A + b_{-A}|`.
    pub b_sum: f64,
    /// Largest `|N_A - N_{-A}|` over the grid.
    pub max_count_gap: usize,
}

/// Counting functions of `A` and `-A` over `[lo, hi]` and their mollified fits.
pub fn asymmetry_report(data: &SpectralData, moll: &Mollifier, lo: f64, hi: f64, samples: usize) -> Result<AsymmetryReport> {
    let neg = negated_spectrum(data);
    let ls = lambda_grid(lo, hi, samples);
    let rows = ls
        .par_iter()
        .map(|l| {
            Ok(AsymmetryRow {
                lambda: *l,
                n_plus: data.count_below(*l),
                n_minus: neg.count_below(*l),
                mollified_plus: mollified_counting(data, moll, *l)?,
                mollified_minus: mollified_counting(&neg, moll, *l)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let fit_plus = fit_cubic(&ls, &rows.iter().map(|r| r.mollified_plus).collect::<Vec<_>>())?;
    let fit_minus = fit_cubic(&ls, &rows.iter().map(|r| r.mollified_minus).collect::<Vec<_>>())?;
    Ok(AsymmetryReport {
        a_relative_gap: (fit_plus.a - fit_minus.a).abs() / fit_plus.a.abs(),
        b_sum: (fit_plus.b + fit_minus.b).abs(),
        max_count_gap: rows.iter().map(|r| r.n_plus.abs_diff(r.n_minus)).max().unwrap_or(0),
        rows,
        fit_plus,
        fit_minus,
    })
}

/// Largest gap inside pairs of sorted eigenvalues `(l_0, l_1), (l_2, l_3), ..` within the window.
pub fn pairing_gap(data: &SpectralData) -> f64 {
    let vals: Vec<f64> = data.trusted().collect();
    // trim a trailing element broken off at the window edge
    let usable = vals.len() - vals.len() % 2;
    vals[..usable].chunks(2).map(|p| p[1] - p[0]).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_cubic_is_recovered() {
        let ls = lambda_grid(1.0, 3.0, 20);
        let ys: Vec<f64> = ls.iter().map(|l| 2.0 * l * l * l - 0.5 * l * l + 0.1 * l).collect();
        let f = fit_cubic(&ls, &ys).unwrap();
        assert!((f.a - 2.0).abs() < 1e-12 && (f.b + 0.5).abs() < 1e-11 && (f.c - 0.1).abs() < 1e-11);
        assert!(f.covariance[0][0] < 1e-20);
        assert!(fit_cubic(&ls[..3], &ys[..3]).is_err());
    }

    #[test]
    fn pairing() {
        let d = SpectralData::from_values(vec![1.0, 1.0, 2.0, 2.0 + 1e-9, 7.0], 2, crate::trig::TWO_PI_PERIODS, 3.0);
        assert!(pairing_gap(&d) < 2e-9);
        let e = SpectralData::from_values(vec![1.0, 1.5], 2, crate::trig::TWO_PI_PERIODS, 3.0);
        assert!((pairing_gap(&e) - 0.5).abs() < 1e-15);
    }
}
