//! Matrix-valued trigonometric polynomials on the 3-torus.
//!
//! A field is stored as a sparse map from integer wavevectors to complex
//! coefficient matrices, `F(x) = sum_k F_k exp(i <w(k), x>)` with
//! `w(k)_a = 2 pi k_a / period_a`. Products are exact convolutions and
//! derivatives act diagonally on the coefficients.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::linalg::{c, max_abs, r, CMat, C64, ZERO};

pub type Wave = [i32; 3];

pub const TWO_PI_PERIODS: [f64; 3] = [2.0 * PI, 2.0 * PI, 2.0 * PI];

/// Matrix-valued trigonometric polynomial.
#[derive(Clone, Debug, PartialEq)]
pub struct TrigPoly {
    rows: usize,
    cols: usize,
    periods: [f64; 3],
    terms: BTreeMap<Wave, CMat>,
}

/// One harmonic of a field, the unit used by the JSON input schema.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Harmonic {
    pub row: usize,
    pub col: usize,
    pub wave: Wave,
    pub re: f64,
    pub im: f64,
}

impl TrigPoly {
    pub fn zero(rows: usize, cols: usize, periods: [f64; 3]) -> Self {
        Self { rows, cols, periods, terms: BTreeMap::new() }
    }

    pub fn constant(value: CMat, periods: [f64; 3]) -> Self {
        let mut p = Self::zero(value.nrows(), value.ncols(), periods);
        p.add_term([0, 0, 0], value);
        p
    }

    /// Scalar trig polynomial times a fixed matrix.
    pub fn scalar_times(coeffs: &[(Wave, C64)], matrix: &CMat, periods: [f64; 3]) -> Self {
        let mut p = Self::zero(matrix.nrows(), matrix.ncols(), periods);
        for (w, z) in coeffs {
            p.add_term(*w, matrix * *z);
        }
        p
    }

    pub fn from_harmonics(rows: usize, cols: usize, periods: [f64; 3], hs: &[Harmonic]) -> Self {
        let mut p = Self::zero(rows, cols, periods);
        for h in hs {
            let mut m = CMat::zeros(rows, cols);
            m[(h.row, h.col)] = c(h.re, h.im);
            p.add_term(h.wave, m);
        }
        p
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn periods(&self) -> [f64; 3] {
        self.periods
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Wave, &CMat)> {
        self.terms.iter()
    }

    pub fn coeff(&self, w: &Wave) -> Option<&CMat> {
        self.terms.get(w)
    }

    pub fn add_term(&mut self, w: Wave, m: CMat) {
        assert_eq!((m.nrows(), m.ncols()), (self.rows, self.cols), "term shape mismatch");
        let entry = self.terms.entry(w).or_insert_with(|| CMat::zeros(m.nrows(), m.ncols()));
        *entry += m;
    }

    /// Drops coefficients whose entries are all below `tol`.
    pub fn pruned(mut self, tol: f64) -> Self {
        self.terms.retain(|_, m| max_abs(m) > tol);
        self
    }

    pub fn wavenumber(&self, w: &Wave) -> [f64; 3] {
        [2.0 * PI * w[0] as f64 / self.periods[0], 2.0 * PI * w[1] as f64 / self.periods[1], 2.0 * PI * w[2] as f64 / self.periods[2]]
    }

    /// Largest |k_a| over all stored harmonics.
    pub fn max_harmonic(&self) -> usize {
        self.terms.keys().flat_map(|w| w.iter().map(|k| k.unsigned_abs() as usize)).max().unwrap_or(0)
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|w| *w == [0, 0, 0])
    }

    /// Axes along which some harmonic is nonzero.
    pub fn active_axes(&self) -> [bool; 3] {
        let mut out = [false; 3];
        for w in self.terms.keys() {
            for a in 0..3 {
                out[a] |= w[a] != 0;
            }
        }
        out
    }

    pub fn eval(&self, x: &[f64; 3]) -> CMat {
        let mut out = CMat::zeros(self.rows, self.cols);
        for (w, m) in &self.terms {
            let k = self.wavenumber(w);
            let phase = k[0] * x[0] + k[1] * x[1] + k[2] * x[2];
            out += m * c(phase.cos(), phase.sin());
        }
        out
    }

    /// Value and the three first partial derivatives.
    pub fn eval_grad(&self, x: &[f64; 3]) -> (CMat, [CMat; 3]) {
        let z = || CMat::zeros(self.rows, self.cols);
        let mut val = z();
        let mut grad = [z(), z(), z()];
        for (w, m) in &self.terms {
            let k = self.wavenumber(w);
            let phase = k[0] * x[0] + k[1] * x[1] + k[2] * x[2];
            let e = m * c(phase.cos(), phase.sin());
            for a in 0..3 {
                if k[a] != 0.0 {
                    grad[a] += &e * c(0.0, k[a]);
                }
            }
            val += e;
        }
        (val, grad)
    }

    pub fn derivative(&self, axis: usize) -> Self {
        let mut out = Self::zero(self.rows, self.cols, self.periods);
        for (w, m) in &self.terms {
            let k = self.wavenumber(w)[axis];
            if k != 0.0 {
                out.terms.insert(*w, m * c(0.0, k));
            }
        }
        out
    }

    /// Exact product (matrix product of values, convolution of coefficients).
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "trig product shape mismatch");
        let mut out = Self::zero(self.rows, other.cols, self.periods);
        for (wa, ma) in &self.terms {
            for (wb, mb) in &other.terms {
                let w = [wa[0] + wb[0], wa[1] + wb[1], wa[2] + wb[2]];
                out.add_term(w, ma * mb);
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (w, m) in &other.terms {
            out.add_term(*w, m.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(r(-1.0)))
    }

    pub fn scale(&self, z: C64) -> Self {
        let mut out = self.clone();
        for m in out.terms.values_mut() {
            *m *= z;
        }
        out
    }

    /// Left multiplication by a constant matrix.
    pub fn left_mul(&self, a: &CMat) -> Self {
        let mut out = Self::zero(a.nrows(), self.cols, self.periods);
        for (w, m) in &self.terms {
            out.terms.insert(*w, a * m);
        }
        out
    }

    pub fn right_mul(&self, a: &CMat) -> Self {
        let mut out = Self::zero(self.rows, a.ncols(), self.periods);
        for (w, m) in &self.terms {
            out.terms.insert(*w, m * a);
        }
        out
    }

    /// Pointwise conjugate transpose: coefficient at k becomes F_{-k}^*.
    pub fn adjoint(&self) -> Self {
        let mut out = Self::zero(self.cols, self.rows, self.periods);
        for (w, m) in &self.terms {
            out.terms.insert([-w[0], -w[1], -w[2]], m.adjoint());
        }
        out
    }

    /// Pointwise complex conjugate (no transpose).
    pub fn conj(&self) -> Self {
        let mut out = Self::zero(self.rows, self.cols, self.periods);
        for (w, m) in &self.terms {
            out.terms.insert([-w[0], -w[1], -w[2]], m.map(|z| z.conj()));
        }
        out
    }

    /// Pointwise real part.
    pub fn real_part(&self) -> Self {
        self.add(&self.conj()).scale(r(0.5))
    }

    /// Pointwise imaginary part.
    pub fn imag_part(&self) -> Self {
        self.sub(&self.conj()).scale(c(0.0, -0.5))
    }

    /// Scalar entry (i, j) as a 1x1 field.
    pub fn entry(&self, i: usize, j: usize) -> Self {
        let mut out = Self::zero(1, 1, self.periods);
        for (w, m) in &self.terms {
            let z = m[(i, j)];
            if z != ZERO {
                out.terms.insert(*w, CMat::from_element(1, 1, z));
            }
        }
        out
    }

    /// A scalar (1x1) field times a constant matrix.
    pub fn scalar_field_times(&self, matrix: &CMat) -> Self {
        assert_eq!((self.rows, self.cols), (1, 1), "expected a scalar field");
        let mut out = Self::zero(matrix.nrows(), matrix.ncols(), self.periods);
        for (w, m) in &self.terms {
            out.terms.insert(*w, matrix * m[(0, 0)]);
        }
        out
    }

    /// Places a scalar field at entry (i, j) of a `rows x cols` field.
    pub fn embed(&self, rows: usize, cols: usize, i: usize, j: usize) -> Self {
        let mut unit = CMat::zeros(rows, cols);
        unit[(i, j)] = c(1.0, 0.0);
        self.scalar_field_times(&unit)
    }

    /// Pointwise trace as a scalar field.
    pub fn trace(&self) -> Self {
        let mut out = Self::zero(1, 1, self.periods);
        for (w, m) in &self.terms {
            let t: C64 = m.diagonal().iter().sum();
            out.terms.insert(*w, CMat::from_element(1, 1, t));
        }
        out
    }

    /// Pointwise transpose.
    pub fn transpose(&self) -> Self {
        let mut out = Self::zero(self.cols, self.rows, self.periods);
        for (w, m) in &self.terms {
            out.terms.insert(*w, m.transpose());
        }
        out
    }

    /// Largest coefficient entry.
    pub fn max_coeff(&self) -> f64 {
        self.terms.values().fold(0.0, |acc, m| acc.max(max_abs(m)))
    }

    /// Max coefficient-wise distance; absent coefficients count as zero.
    pub fn distance(&self, other: &Self) -> f64 {
        let mut d: f64 = 0.0;
        for (w, m) in &self.terms {
            match other.terms.get(w) {
                Some(o) => d = d.max(max_abs(&(m - o))),
                None => d = d.max(max_abs(m)),
            }
        }
        for (w, m) in &other.terms {
            if !self.terms.contains_key(w) {
                d = d.max(max_abs(m));
            }
        }
        d
    }

    /// Residual of the Hermitian-field reality condition F_{-k} = F_k^*.
    pub fn hermitian_residual(&self) -> f64 {
        self.distance(&self.adjoint())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{norm, pauli};

    #[test]
    fn product_matches_pointwise() {
        let s = pauli();
        let p = TrigPoly::scalar_times(&[([0, 0, 1], c(0.5, 0.0)), ([0, 0, -1], c(0.5, 0.0))], &s[0], TWO_PI_PERIODS);
        let q = TrigPoly::scalar_times(&[([1, 0, 0], c(0.0, 1.0)), ([0, 0, 0], r(2.0))], &s[1], TWO_PI_PERIODS);
        let x = [0.3, -1.2, 2.1];
        let prod = p.mul(&q);
        assert!(norm(&(prod.eval(&x) - p.eval(&x) * q.eval(&x))) < 1e-14);
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let s = pauli();
        let p = TrigPoly::scalar_times(&[([1, 2, 0], c(0.3, 0.1)), ([0, -1, 1], c(0.0, -0.4))], &s[2], TWO_PI_PERIODS);
        let x = [0.1, 0.2, 0.3];
        let (_, g) = p.eval_grad(&x);
        for a in 0..3 {
            let h = 1e-6;
            let mut xp = x;
            let mut xm = x;
            xp[a] += h;
            xm[a] -= h;
            let fd = (p.eval(&xp) - p.eval(&xm)) / r(2.0 * h);
            assert!(norm(&(fd - &g[a])) < 1e-8);
            assert!(norm(&(p.derivative(a).eval(&x) - &g[a])) < 1e-14);
        }
    }

    #[test]
    fn real_and_imaginary_parts() {
        let one = CMat::from_element(1, 1, r(1.0));
        let p = TrigPoly::scalar_times(&[([0, 0, 1], c(0.2, 0.7))], &one, TWO_PI_PERIODS);
        let x = [0.0, 0.0, 0.9];
        let v = p.eval(&x)[(0, 0)];
        assert!((p.real_part().eval(&x)[(0, 0)] - r(v.re)).norm() < 1e-15);
        assert!((p.imag_part().eval(&x)[(0, 0)] - r(v.im)).norm() < 1e-15);
    }
}
