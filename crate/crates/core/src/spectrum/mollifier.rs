//! Smooth counting: `int N(lambda - mu) rho(mu) d mu` with `rho_hat` supported in `(-T, T)`.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre_interval;

use super::galerkin::SpectralData;

/// Panels and nodes per panel of the composite rule in `t`.
const PANELS: usize = 64;
const NODES: usize = 16;

/// `rho_hat(t) = exp(1 - 1/(1 - (t/T)^2))` on `|t| < T`, with `rho` and its primitive tabulated.
#[derive(Clone, Debug)]
pub struct Mollifier {
    pub t_max: f64,
    /// Table spacing in `s`.
    pub spacing: f64,
    /// `P_rho(s) = int_{-inf}^s rho` on `s = 0, h, 2h, ..`.
    cumulative: Vec<f64>,
    /// `rho(s)` on the same grid.
    density: Vec<f64>,
    /// `rho'(s)` on the same grid.
    slope: Vec<f64>,
}

impl Mollifier {
    /// Tabulation out to `s T = 180`, where `|rho|` and `|1 - P_rho|` have fallen below about 1e-7.
    pub fn new(t_max: f64) -> Result<Self> {
        Self::with_reach(t_max, 180.0 / t_max)
    }

    /// Tabulation on `[0, reach]`; `P_rho` is rounded to 0 or 1 beyond it.
    pub fn with_reach(t_max: f64, reach: f64) -> Result<Self> {
        if !(t_max > 0.0 && t_max.is_finite()) {
            return Err(Error::InvalidArgument(format!("mollifier support must be positive, got {t_max}")));
        }
        if !(reach > 0.0 && reach.is_finite()) {
            return Err(Error::InvalidArgument(format!("mollifier reach must be positive, got {reach}")));
        }
        let spacing = 0.012 / t_max;
        let n = (reach / spacing).ceil() as usize + 1;
        let mut ts = Vec::with_capacity(PANELS * NODES);
        let mut ws = Vec::with_capacity(PANELS * NODES);
        for p in 0..PANELS {
            let a = t_max * p as f64 / PANELS as f64;
            let b = t_max * (p + 1) as f64 / PANELS as f64;
            let (x, w) = gauss_legendre_interval(NODES, a, b);
            for (xi, wi) in x.into_iter().zip(w) {
                let g = Self::bump(xi / t_max);
                if g > 0.0 {
                    ts.push(xi);
                    ws.push(wi * g);
                }
            }
        }
        let rows: Vec<(f64, f64, f64)> = (0..n)
            .into_par_iter()
            .map(|i| {
                let s = i as f64 * spacing;
                let mut sn = 0.0;
                let mut cs = 0.0;
                let mut ds = 0.0;
                for (t, w) in ts.iter().zip(&ws) {
                    let (si, co) = (t * s).sin_cos();
                    sn += w * si / t;
                    cs += w * co;
                    ds -= w * t * si;
                }
                (0.5 + sn / PI, cs / PI, ds / PI)
            })
            .collect();
        Ok(Self {
            t_max,
            spacing,
            cumulative: rows.iter().map(|r| r.0).collect(),
            density: rows.iter().map(|r| r.1).collect(),
            slope: rows.iter().map(|r| r.2).collect(),
        })
    }

    fn bump(u: f64) -> f64 {
        if u.abs() >= 1.0 {
            0.0
        } else {
            (1.0 - 1.0 / (1.0 - u * u)).exp()
        }
    }

    /// `rho_hat(t)`.
    pub fn rho_hat(&self, t: f64) -> f64 {
        Self::bump(t / self.t_max)
    }

    /// Half-width of the tabulated range; beyond it `P_rho` is taken as 0 or 1.
    pub fn reach(&self) -> f64 {
        (self.cumulative.len() - 1) as f64 * self.spacing
    }

    /// Cubic Hermite interpolation of a tabulated function with tabulated derivative.
    fn hermite(&self, values: &[f64], d: &[f64], s: f64) -> f64 {
        let u = s / self.spacing;
        let i = (u.floor() as usize).min(values.len() - 2);
        let t = u - i as f64;
        let h = self.spacing;
        let (h00, h10, h01, h11) =
            (2.0 * t * t * t - 3.0 * t * t + 1.0, t * t * t - 2.0 * t * t + t, -2.0 * t * t * t + 3.0 * t * t, t * t * t - t * t);
        h00 * values[i] + h10 * h * d[i] + h01 * values[i + 1] + h11 * h * d[i + 1]
    }

    /// `rho(s)`, even in `s`.
    pub fn rho(&self, s: f64) -> f64 {
        let a = s.abs();
        if a >= self.reach() {
            return 0.0;
        }
        self.hermite(&self.density, &self.slope, a)
    }

    /// `P_rho(s) = int_{-inf}^s rho`, using `P_rho(-s) = 1 - P_rho(s)`.
    pub fn cumulative(&self, s: f64) -> f64 {
        let a = s.abs();
        let v = if a >= self.reach() { 1.0 } else { self.hermite(&self.cumulative, &self.density, a) };
        if s >= 0.0 {
            v
        } else {
            1.0 - v
        }
    }

    /// Trapezoid value of `int rho` over the tabulated range.
    pub fn total_mass(&self) -> f64 {
        let inner: f64 = self.density[1..self.density.len() - 1].iter().sum();
        self.spacing * (self.density[0] + 2.0 * inner + self.density[self.density.len() - 1])
    }
}

/// `sum_{lambda_k > 0} P_rho(lambda - lambda_k)`.
pub fn mollified_counting(data: &SpectralData, moll: &Mollifier, lambda: f64) -> Result<f64> {
    let reach = moll.reach();
    if lambda + reach > data.window {
        return Err(Error::OutsideTrustWindow { lambda: lambda + reach, window: data.window });
    }
    Ok(mollified_counting_unchecked(data, moll, lambda))
}

/// As [`mollified_counting`] without the window check.
pub fn mollified_counting_unchecked(data: &SpectralData, moll: &Mollifier, lambda: f64) -> f64 {
    let reach = moll.reach();
    let lo = data.values.partition_point(|l| *l <= 0.0);
    let full = data.values.partition_point(|l| *l <= lambda - reach);
    let hi = data.values.partition_point(|l| *l < lambda + reach);
    let start = full.max(lo);
    let partial: Vec<f64> = data.values[start..hi.max(start)].iter().map(|l| moll.cumulative(lambda - l)).collect();
    full.saturating_sub(lo) as f64 + crate::linalg::pairwise_sum(&partial)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalization_and_symmetry() {
        let m = Mollifier::new(6.0).unwrap();
        assert_eq!(m.rho_hat(0.0), 1.0);
        assert_eq!(m.rho_hat(6.0), 0.0);
        assert!((m.rho_hat(1e-4) - m.rho_hat(-1e-4)).abs() < 1e-18);
        let wide = Mollifier::with_reach(6.0, 70.0).unwrap();
        assert!((wide.total_mass() - 1.0).abs() < 1e-10, "{}", wide.total_mass());
        assert!((m.total_mass() - 1.0).abs() < 1e-6);
        assert!((m.cumulative(0.0) - 0.5).abs() < 1e-15);
        assert!((m.cumulative(m.reach() * 0.999) - 1.0).abs() < 1e-7);
        assert!((wide.cumulative(69.0) - 1.0).abs() < 1e-9);
        assert!((m.rho(0.7) - m.rho(-0.7)).abs() < 1e-16);
        // second moment is -rho_hat''(0) = 2 / T^2
        let h = wide.spacing;
        let mut mom = 0.0;
        let mut s = 0.0;
        while s < wide.reach() {
            mom += 2.0 * h * s * s * wide.rho(s);
            s += h;
        }
        assert!((mom - 2.0 / 36.0).abs() < 1e-6, "{mom}");
        assert!(Mollifier::new(-1.0).is_err());
    }

    #[test]
    fn primitive_matches_density() {
        let m = Mollifier::new(4.0).unwrap();
        let h = 1e-4;
        for s in [0.05, 0.33, 1.7, 5.0] {
            let d = (m.cumulative(s + h) - m.cumulative(s - h)) / (2.0 * h);
            assert!((d - m.rho(s)).abs() < 1e-7, "{s}: {d} vs {}", m.rho(s));
        }
    }

    #[test]
    fn saturation() {
        let data = SpectralData::from_values(vec![-3.0, 1.0, 2.0, 2.0], 1, crate::trig::TWO_PI_PERIODS, 1000.0);
        let m = Mollifier::new(6.0).unwrap();
        assert!((mollified_counting(&data, &m, 300.0).unwrap() - 3.0).abs() < 1e-6);
        assert!(mollified_counting(&data, &m, -200.0).unwrap().abs() < 1e-6);
        let small = SpectralData::from_values(vec![1.0], 1, crate::trig::TWO_PI_PERIODS, 5.0);
        assert!(matches!(mollified_counting(&small, &m, 2.0), Err(Error::OutsideTrustWindow { .. })));
    }
}
