use crate::error::{Error, Result};
use crate::linalg::{check_hermitian, eigh, projector, CMat, CVec};

use super::{CotangentPoint, SymbolPair};

/// Relative eigenvalue separation below which the decomposition is refused.
pub const GAP_TOL: f64 = 1e-6;

/// Relative size below which an eigenvalue counts as zero.
pub const ELLIPTICITY_TOL: f64 = 1e-10;

/// Eigenvalues and normalized eigenvectors of the principal symbol.
///
/// Eigenvalues are addressed by signed index: `-m_minus..=-1` for the
/// negative ones and `1..=m_plus` for the positive ones, ordered so that
/// `h(-m_minus) < ... < h(-1) < 0 < h(1) < ... < h(m_plus)`.
/// Each eigenvector is fixed by making its largest-modulus component real and
/// positive (ties go to the lowest component index).
#[derive(Clone, Debug)]
pub struct EigenSystem {
    pub m_plus: usize,
    pub m_minus: usize,
    values: Vec<f64>,
    vectors: CMat,
}

impl EigenSystem {
    pub fn from_matrix(a1: &CMat) -> Result<Self> {
        check_hermitian(a1, 1e-10)?;
        let (values, mut vectors) = eigh(a1);
        let radius = values.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
        if radius == 0.0 {
            return Err(Error::EllipticityViolated { value: 0.0 });
        }
        if let Some(v) = values.iter().find(|v| v.abs() <= ELLIPTICITY_TOL * radius) {
            return Err(Error::EllipticityViolated { value: *v });
        }
        for w in values.windows(2) {
            let gap = (w[1] - w[0]) / radius;
            if gap < GAP_TOL {
                return Err(Error::DegenerateEigenvalue { gap, tol: GAP_TOL });
            }
        }
        for j in 0..vectors.ncols() {
            let mut col: CVec = vectors.column(j).into_owned();
            let nrm = col.norm();
            col /= crate::linalg::r(nrm);
            fix_gauge(&mut col);
            vectors.set_column(j, &col);
        }
        let m_minus = values.iter().filter(|v| **v < 0.0).count();
        let m_plus = values.len() - m_minus;
        Ok(Self { m_plus, m_minus, values, vectors })
    }

    pub fn m(&self) -> usize {
        self.values.len()
    }

    /// Position of a signed index in the ascending ordering.
    pub fn position(&self, j: i32) -> Result<usize> {
        if j > 0 && (j as usize) <= self.m_plus {
            Ok(self.m_minus + j as usize - 1)
        } else if j < 0 && (j.unsigned_abs() as usize) <= self.m_minus {
            Ok((self.m_minus as i32 + j) as usize)
        } else {
            Err(Error::InvalidArgument(format!("eigenvalue index {j} out of range (-{}..={})", self.m_minus, self.m_plus)))
        }
    }

    pub fn signed_index(&self, position: usize) -> i32 {
        if position < self.m_minus {
            position as i32 - self.m_minus as i32
        } else {
            (position - self.m_minus) as i32 + 1
        }
    }

    pub fn signed_indices(&self) -> Vec<i32> {
        (0..self.m()).map(|p| self.signed_index(p)).collect()
    }

    pub fn h(&self, j: i32) -> Result<f64> {
        Ok(self.values[self.position(j)?])
    }

    pub fn v(&self, j: i32) -> Result<CVec> {
        Ok(self.vectors.column(self.position(j)?).into_owned())
    }

    pub fn projector(&self, j: i32) -> Result<CMat> {
        Ok(projector(&self.v(j)?))
    }

    /// Ascending eigenvalues.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Eigenvectors as columns, matching [`EigenSystem::values`].
    pub fn vectors(&self) -> &CMat {
        &self.vectors
    }

    pub(crate) fn value_at(&self, pos: usize) -> f64 {
        self.values[pos]
    }

    pub(crate) fn projector_at(&self, pos: usize) -> CMat {
        projector(&self.vectors.column(pos).into_owned())
    }
}

/// Rotates the phase so the largest-modulus component is real and positive.
pub(crate) fn fix_gauge(v: &mut CVec) {
    let mut best = 0;
    let mut best_mod = -1.0;
    for (k, z) in v.iter().enumerate() {
        let m = z.norm();
        if m > best_mod * (1.0 + 1e-12) {
            best = k;
            best_mod = m;
        }
    }
    if best_mod > 0.0 {
        let phase = v[best] / crate::linalg::r(best_mod);
        *v /= phase;
        v[best].im = 0.0;
    }
}

/// Eigen-decomposition of `A1(x, xi)`.
pub fn principal_eigensystem(sym: &SymbolPair, pt: &CotangentPoint) -> Result<EigenSystem> {
    if pt.n() != sym.n() {
        return Err(Error::DimensionMismatch(format!("point dimension {} vs symbol dimension {}", pt.n(), sym.n())));
    }
    let a1 = sym.principal(&pt.x, &pt.xi);
    if a1.nrows() != sym.m() || a1.ncols() != sym.m() {
        return Err(Error::DimensionMismatch(format!("principal symbol is {}x{}, expected {}", a1.nrows(), a1.ncols(), sym.m())));
    }
    EigenSystem::from_matrix(&a1)
}
