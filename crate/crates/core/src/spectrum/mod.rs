//! Spectra of first-order operators on the 3-torus.
//!
//! Exact oracles for separable families, Fourier–Galerkin otherwise;
//! counting and spectral functions, mollified counting, cubic fits.

mod fit;
mod galerkin;
mod mollifier;
mod oracle;

pub use fit::{
    asymmetry_report, fit_cubic, fit_mollified, lambda_grid, negated_spectrum, pairing_gap, AsymmetryReport, AsymmetryRow, CubicFit,
};
pub use galerkin::{
    assemble_galerkin, galerkin_spectrum, hermitian_eigensolve, BlockStructure, GalerkinBlock, GalerkinSystem, SpectralData, DENSE_CAP,
};
pub use mollifier::{mollified_counting, mollified_counting_unchecked, Mollifier};
pub use oracle::{k3_block, k3_closed_form, lattice_oracle, OracleFamily};

use crate::error::{Error, Result};

fn check_window(data: &SpectralData, lambda: f64) -> Result<()> {
    if lambda > data.window {
        return Err(Error::OutsideTrustWindow { lambda, window: data.window });
    }
    Ok(())
}

/// `N(lambda) = #{k : 0 < lambda_k < lambda}`.
pub fn counting_function(data: &SpectralData, lambda: f64) -> Result<usize> {
    check_window(data, lambda)?;
    Ok(data.count_below(lambda))
}

/// `e(lambda, x, x) = sum_{0 < lambda_k < lambda} |v_k(x)|^2` for orthonormal eigenfunctions.
pub fn spectral_function(data: &SpectralData, lambda: f64, x: &[f64; 3]) -> Result<f64> {
    check_window(data, lambda)?;
    if !data.has_vectors() {
        return Err(Error::InvalidArgument("spectral function needs eigenvectors".into()));
    }
    let vol: f64 = data.periods.iter().product();
    let lo = data.values.partition_point(|l| *l <= 0.0);
    let hi = data.values.partition_point(|l| *l < lambda);
    let terms: Vec<f64> = (lo..hi.max(lo))
        .map(|p| {
            let coeffs = data.eigenvector(p).expect("eigenvector present");
            let mut v = crate::linalg::CVec::zeros(data.m);
            for (w, c) in coeffs {
                let phase: f64 = (0..3).map(|a| 2.0 * std::f64::consts::PI * w[a] as f64 * x[a] / data.periods[a]).sum();
                v += c * crate::linalg::C64::from_polar(1.0, phase);
            }
            v.norm_squared() / vol
        })
        .collect();
    Ok(crate::linalg::pairwise_sum(&terms))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dirac::build_dirac;
    use crate::frame::FrameBundle;
    use crate::linalg::CMat;
    use crate::operator::OperatorSpec;
    use crate::quadrature::{torus_cell_volume, torus_grid};

    #[test]
    fn pauli_spectral_function() {
        let d = galerkin_spectrum(&OperatorSpec::pauli_plus(CMat::zeros(2, 2)), 4).unwrap();
        assert_eq!(counting_function(&d, 1.2).unwrap(), 6);
        assert_eq!(counting_function(&d, 1.5).unwrap(), 18);
        for x in [[0.0; 3], [0.3, 1.1, 5.0]] {
            let e = spectral_function(&d, 1.2, &x).unwrap();
            assert!((e - 6.0 / (2.0 * std::f64::consts::PI).powi(3)).abs() < 1e-15);
            let e = spectral_function(&d, 1.5, &x).unwrap();
            assert!((e - 18.0 / (2.0 * std::f64::consts::PI).powi(3)).abs() < 1e-15);
        }
        assert!(matches!(counting_function(&d, 2.5), Err(Error::OutsideTrustWindow { .. })));
    }

    #[test]
    fn twisted_spectral_function_is_uniform() {
        let d = galerkin_spectrum(&build_dirac(&FrameBundle::k3(1), true).unwrap(), 6).unwrap();
        let lam = 2.2;
        let e0 = spectral_function(&d, lam, &[0.0; 3]).unwrap();
        for x in [[0.4, 0.1, 2.0], [1.0, 3.0, 4.5]] {
            assert!((spectral_function(&d, lam, &x).unwrap() - e0).abs() < 1e-10);
        }
        let pts = torus_grid(d.periods, 4);
        let total: f64 = pts.iter().map(|x| spectral_function(&d, lam, x).unwrap()).sum::<f64>() * torus_cell_volume(d.periods, 4);
        assert!((total - counting_function(&d, lam).unwrap() as f64).abs() < 1e-10);
    }

    #[test]
    fn galerkin_matches_separation_oracle() {
        let d = galerkin_spectrum(&build_dirac(&FrameBundle::k3(1), true).unwrap(), 8).unwrap();
        let o = lattice_oracle(&OracleFamily::K3Frame { k: 1, d: [0.0, 0.0] }, 4.0).unwrap();
        let g: Vec<f64> = d.values.iter().cloned().filter(|l| l.abs() < 4.0).collect();
        assert_eq!(g.len(), o.values.len());
        for (a, b) in g.iter().zip(&o.values) {
            assert!((a - b).abs() < 1e-10);
        }
        assert!(d.max_residual < 1e-12 && d.max_orthonormality < 1e-10);
    }
}
