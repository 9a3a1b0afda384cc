//! Small dense complex linear algebra helpers shared by every module.

use nalgebra::{DMatrix, DVector, Matrix3};
use num_complex::Complex;

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;
pub type RMat3 = Matrix3<f64>;

pub const I: C64 = C64::new(0.0, 1.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const ZERO: C64 = C64::new(0.0, 0.0);

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn r(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Standard Pauli matrices s^1, s^2, s^3.
pub fn pauli() -> [CMat; 3] {
    [
        CMat::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]),
        CMat::from_row_slice(2, 2, &[ZERO, -I, I, ZERO]),
        CMat::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]),
    ]
}

/// The metric spinor, antisymmetric with square -I.
pub fn metric_spinor() -> CMat {
    CMat::from_row_slice(2, 2, &[ZERO, -ONE, ONE, ZERO])
}

pub fn identity(m: usize) -> CMat {
    CMat::identity(m, m)
}

pub fn zeros(m: usize) -> CMat {
    CMat::zeros(m, m)
}

/// Frobenius norm.
pub fn norm(a: &CMat) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_abs(a: &CMat) -> f64 {
    a.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn trace(a: &CMat) -> C64 {
    a.diagonal().iter().sum()
}

/// Frobenius norm of the anti-Hermitian part.
pub fn anti_hermitian_residual(a: &CMat) -> f64 {
    norm(&((a - a.adjoint()) * r(0.5)))
}

pub fn hermitian_part(a: &CMat) -> CMat {
    (a + a.adjoint()) * r(0.5)
}

/// Returns `Err(NotHermitian)` when the anti-Hermitian part exceeds `tol * (1 + |a|)`.
pub fn check_hermitian(a: &CMat, tol: f64) -> Result<()> {
    let res = anti_hermitian_residual(a);
    if res > tol * (1.0 + norm(a)) {
        return Err(Error::NotHermitian { residual: res });
    }
    Ok(())
}

pub fn unitarity_residual(u: &CMat) -> f64 {
    let n = u.nrows();
    norm(&(u.adjoint() * u - identity(n)))
}

pub fn det2(a: &CMat) -> C64 {
    a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(1, 0)]
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
///
/// The input is symmetrised before the call so that roundoff-level
/// anti-Hermitian noise does not leak into the eigenvectors.
pub fn eigh(a: &CMat) -> (Vec<f64>, CMat) {
    let n = a.nrows();
    if n == 2 {
        return eigh2(a);
    }
    let eig = hermitian_part(a).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMat::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        vectors.set_column(col, &eig.eigenvectors.column(i));
    }
    (values, vectors)
}

/// Closed-form 2x2 Hermitian eigen-decomposition.
fn eigh2(a: &CMat) -> (Vec<f64>, CMat) {
    let p = a[(0, 0)].re;
    let q = a[(1, 1)].re;
    let off = (a[(0, 1)] + a[(1, 0)].conj()) * 0.5;
    let mean = 0.5 * (p + q);
    let half = 0.5 * (p - q);
    let rad = half.hypot(off.norm());
    let values = vec![mean - rad, mean + rad];
    let mut vectors = CMat::zeros(2, 2);
    if rad == 0.0 {
        vectors[(0, 0)] = ONE;
        vectors[(1, 1)] = ONE;
        return (values, vectors);
    }
    for (col, &lam) in values.iter().enumerate() {
        // Rows of (A - lam I) are orthogonal to the eigenvector; use the larger one.
        let r0 = (r(p - lam), off);
        let r1 = (off.conj(), r(q - lam));
        let (u, w) = if r0.0.norm_sqr() + r0.1.norm_sqr() >= r1.0.norm_sqr() + r1.1.norm_sqr() { r0 } else { r1 };
        // (u, w) . (x, y) = 0  =>  (x, y) = (-w, u)
        let x = -w;
        let y = u;
        let nrm = (x.norm_sqr() + y.norm_sqr()).sqrt();
        vectors[(0, col)] = x / nrm;
        vectors[(1, col)] = y / nrm;
    }
    (values, vectors)
}

/// Rank-one projector v v*.
pub fn projector(v: &CVec) -> CMat {
    v * v.adjoint()
}

/// Inner product u* v.
pub fn dot(u: &CVec, v: &CVec) -> C64 {
    u.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum()
}

/// Matrix exponential of `i * theta * g` for an involution `g` (g^2 = I).
pub fn exp_i_involution(theta: f64, g: &CMat) -> CMat {
    identity(g.nrows()) * r(theta.cos()) + g * c(0.0, theta.sin())
}

/// Pairwise (cascade) summation in a fixed order, independent of thread scheduling.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        n if n <= 8 => values.iter().sum(),
        n => {
            let (a, b) = values.split_at(n / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}

pub fn to_complex3(m: &RMat3) -> CMat {
    CMat::from_fn(3, 3, |i, j| r(m[(i, j)]))
}
