//! Exact spectra by per-mode diagonalization.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{eigh, r, CMat};
use crate::quadrature::SphereRule;
use crate::trig::TWO_PI_PERIODS;

use super::galerkin::SpectralData;

/// Operator families with an exact separation of variables.
#[derive(Clone, Debug)]
pub enum OracleFamily {
    /// `B^alpha (-i d_alpha) + A0` with constant matrices.
    ConstantCoefficient { b: [CMat; 3], a0: CMat, periods: [f64; 3] },
    /// Dirac operator of the twisted frame plus a constant diagonal potential `diag(d1, d2)`.
    K3Frame { k: i32, d: [f64; 2] },
}

impl OracleFamily {
    pub fn pauli(a0: CMat) -> Self {
        Self::ConstantCoefficient { b: crate::linalg::pauli(), a0, periods: TWO_PI_PERIODS }
    }

    pub fn m(&self) -> usize {
        match self {
            Self::ConstantCoefficient { a0, .. } => a0.nrows(),
            Self::K3Frame { .. } => 2,
        }
    }

    pub fn negated(&self) -> Self {
        match self {
            Self::ConstantCoefficient { b, a0, periods } => {
                Self::ConstantCoefficient { b: b.clone().map(|m| -m), a0: -a0, periods: *periods }
            }
            // conjugating by diag(1, -1) and relabelling m1 -> k - m1 maps -block(d) to block(-d)
            Self::K3Frame { k, d } => Self::K3Frame { k: *k, d: [-d[0], -d[1]] },
        }
    }
}

/// The twisted-frame block for transverse momentum `(xi1, xi2)` and first-component mode `m1`.
pub fn k3_block(k: i32, d: [f64; 2], xi1: f64, xi2: f64, m1: i32) -> CMat {
    let mu = m1 as f64 - 0.5 * k as f64;
    CMat::from_row_slice(2, 2, &[r(mu + d[0]), crate::linalg::c(xi1, -xi2), crate::linalg::c(xi1, xi2), r(-mu + d[1])])
}

/// Smallest `|eig(B . omega)|` over a dense sphere rule.
fn ellipticity_constant(b: &[CMat; 3]) -> f64 {
    let rule = SphereRule::new(3, 24, 48);
    rule.nodes
        .iter()
        .map(|w| {
            let m = &b[0] * r(w[0]) + &b[1] * r(w[1]) + &b[2] * r(w[2]);
            eigh(&m).0.iter().map(|v| v.abs()).fold(f64::INFINITY, f64::min)
        })
        .fold(f64::INFINITY, f64::min)
}

/// Every eigenvalue with `|lambda| < lambda_max`, with multiplicity.
pub fn lattice_oracle(family: &OracleFamily, lambda_max: f64) -> Result<SpectralData> {
    match family {
        OracleFamily::ConstantCoefficient { b, a0, periods } => {
            let m = a0.nrows();
            if b.iter().any(|x| x.nrows() != m || x.ncols() != m) {
                return Err(Error::DimensionMismatch("coefficients must share one size".into()));
            }
            let cmin = 0.95 * ellipticity_constant(b);
            if cmin <= 1e-12 {
                return Err(Error::UnsupportedFamily("principal symbol is not elliptic".into()));
            }
            let a_norm = a0.norm();
            let radius = (lambda_max + a_norm) / cmin;
            let kmax: [i32; 3] = std::array::from_fn(|a| (radius * periods[a] / (2.0 * std::f64::consts::PI)).ceil() as i32);
            let values: Vec<Vec<f64>> = (-kmax[0]..=kmax[0])
                .into_par_iter()
                .map(|k1| {
                    let mut out = Vec::new();
                    for k2 in -kmax[1]..=kmax[1] {
                        for k3 in -kmax[2]..=kmax[2] {
                            let xi: [f64; 3] = std::array::from_fn(|a| 2.0 * std::f64::consts::PI * [k1, k2, k3][a] as f64 / periods[a]);
                            let n = (xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]).sqrt();
                            if n > radius {
                                continue;
                            }
                            let blk = &b[0] * r(xi[0]) + &b[1] * r(xi[1]) + &b[2] * r(xi[2]) + a0;
                            out.extend(eigh(&blk).0.into_iter().filter(|l| l.abs() < lambda_max));
                        }
                    }
                    out
                })
                .collect();
            Ok(SpectralData::from_values(values.concat(), m, *periods, lambda_max))
        }
        OracleFamily::K3Frame { k, d } => {
            let shift = 0.5 * (d[0] - d[1]);
            let centre = 0.5 * (d[0] + d[1]);
            let radius = lambda_max + centre.abs();
            let n = radius.ceil() as i32 + 1;
            let mu_lo = (-radius - shift + 0.5 * *k as f64).floor() as i32 - 1;
            let mu_hi = (radius - shift + 0.5 * *k as f64).ceil() as i32 + 1;
            let values: Vec<Vec<f64>> = (-n..=n)
                .into_par_iter()
                .map(|k1| {
                    let mut out = Vec::new();
                    for k2 in -n..=n {
                        let t2 = (k1 * k1 + k2 * k2) as f64;
                        if t2.sqrt() > radius {
                            continue;
                        }
                        for m1 in mu_lo..=mu_hi {
                            let (vals, _) = eigh(&k3_block(*k, *d, k1 as f64, k2 as f64, m1));
                            out.extend(vals.into_iter().filter(|l| l.abs() < lambda_max));
                        }
                    }
                    out
                })
                .collect();
            Ok(SpectralData::from_values(values.concat(), 2, TWO_PI_PERIODS, lambda_max))
        }
    }
}

/// Eigenvalues of the twisted-frame family in closed form, `centre +- sqrt((mu + shift)^2 + |xi_perp|^2)`.
pub fn k3_closed_form(k: i32, d: [f64; 2], xi1: f64, xi2: f64, m1: i32) -> [f64; 2] {
    let mu = m1 as f64 - 0.5 * k as f64;
    let centre = 0.5 * (d[0] + d[1]);
    let rad = ((mu + 0.5 * (d[0] - d[1])).powi(2) + xi1 * xi1 + xi2 * xi2).sqrt();
    [centre - rad, centre + rad]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pauli_lattice() {
        let d = lattice_oracle(&OracleFamily::pauli(CMat::zeros(2, 2)), 1.5).unwrap();
        // 0 twice from xi = 0, then +-1 six times each
        assert_eq!(d.values.iter().filter(|v| **v == 0.0).count(), 2);
        assert_eq!(d.count_below(1.5), 18);
        assert_eq!(d.count_below(1.2), 6);
        assert_eq!(d.values.len(), 38);
    }

    #[test]
    fn perturbed_pauli_root() {
        let s = 0.2;
        let a0 = CMat::from_row_slice(2, 2, &[r(s), r(0.0), r(0.0), r(0.0)]);
        let d = lattice_oracle(&OracleFamily::pauli(a0), 1.5).unwrap();
        // block at xi = (0,0,1) is diag(1 + s, -1): larger root 1 + s
        assert!(d.values.iter().any(|v| (*v - (1.0 + s)).abs() < 1e-15));
    }

    #[test]
    fn spin_structures() {
        let d1 = lattice_oracle(&OracleFamily::K3Frame { k: 1, d: [0.0, 0.0] }, 10.0).unwrap();
        assert!(d1.values.contains(&0.5));
        assert!(d1.values.iter().any(|v| *v == -0.5));
        assert_eq!(k3_closed_form(1, [0.0, 0.0], 0.0, 0.0, 1), [-0.5, 0.5]);
        let d0 = lattice_oracle(&OracleFamily::K3Frame { k: 0, d: [0.0, 0.0] }, 10.0).unwrap();
        let p = lattice_oracle(&OracleFamily::pauli(CMat::zeros(2, 2)), 10.0).unwrap();
        assert_eq!(d0.values.len(), p.values.len());
        for (a, b) in d0.values.iter().zip(&p.values) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
