//! Frames, metrics, the teleparallel connection and its torsion (`m = 2`, `n = 3`).
//!
//! A frame is a 3x3 real trigonometric polynomial `V[j][alpha]` (row `j`
//! enumerates the vector fields, column `alpha` their coordinate components).
//! The Pauli field is `sigma^alpha = s^j V_j^alpha`, and the metric is the one
//! in which the frame is orthonormal, `g^{alpha beta} = sum_j V_j^alpha V_j^beta`.
//! Inverse quantities (coframe, lower metric, Christoffel symbols) are not
//! trigonometric polynomials in general, so they are evaluated pointwise from
//! the exact values and derivatives of `V`.

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::linalg::{c, det2, pauli, r, trace, unitarity_residual, CMat, RMat3};
use crate::quadrature::torus_grid;
use crate::symbol::{CotangentPoint, SymbolPair};
use crate::trig::{TrigPoly, TWO_PI_PERIODS};

/// Levi-Civita symbol.
pub fn levi_civita(a: usize, b: usize, c: usize) -> f64 {
    match (a, b, c) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}

/// An orthonormal frame on the 3-torus together with its orientation.
#[derive(Clone, Debug)]
pub struct FrameBundle {
    frame: TrigPoly,
    /// Sign of `det V`, constant over the torus.
    pub c: f64,
    /// Always false: the metric is induced by the frame, which is therefore orthonormal by construction.
    pub gram_schmidt_applied: bool,
}

/// Pointwise geometry of a frame.
#[derive(Clone, Debug)]
pub struct FramePoint {
    pub x: [f64; 3],
    /// `v[(j, alpha)] = V_j^alpha`.
    pub v: RMat3,
    /// `dv[mu] = d V / d x^mu`.
    pub dv: [RMat3; 3],
    /// `coframe[(j, alpha)]`, dual to the frame: `V cof^T = I`.
    pub coframe: RMat3,
    pub dcoframe: [RMat3; 3],
    pub g_up: RMat3,
    pub g_down: RMat3,
    pub dg_up: [RMat3; 3],
    pub dg_down: [RMat3; 3],
    pub det_v: f64,
    /// `sqrt(det g_{alpha beta})`.
    pub sqrt_det_g: f64,
}

/// Teleparallel connection, torsion and related tensors at a point.
#[derive(Clone, Debug)]
pub struct TeleparallelData {
    /// `gamma[alpha][mu][beta] = V_k^alpha d_mu cof_{k beta}`.
    pub gamma: [[[f64; 3]; 3]; 3],
    /// `torsion[alpha][beta][gamma] = Gamma^alpha_{beta gamma} - Gamma^alpha_{gamma beta}`.
    pub torsion: [[[f64; 3]; 3]; 3],
    /// Mixed dual torsion `*T^alpha_beta`.
    pub star_t: RMat3,
    /// Contravariant dual torsion `*T^{alpha beta}`.
    pub star_t_up: RMat3,
    pub trace_star_t: f64,
    /// `christoffel[beta][alpha][gamma]` of the Levi-Civita connection.
    pub christoffel: [[[f64; 3]; 3]; 3],
}

/// Result of teleparallel transport of a covector.
#[derive(Clone, Debug)]
pub struct Transport {
    pub xi: [f64; 3],
    /// 2-norm condition number of the 3x3 system solved at the target point.
    pub condition: f64,
}

fn to_real3(m: &CMat) -> RMat3 {
    Matrix3::from_fn(|i, j| m[(i, j)].re)
}

impl FrameBundle {
    /// Validates a real 3x3 trigonometric frame.
    pub fn new(frame: TrigPoly) -> Result<Self> {
        if frame.rows() != 3 || frame.cols() != 3 {
            return Err(Error::DimensionMismatch(format!("frame must be 3x3, got {}x{}", frame.rows(), frame.cols())));
        }
        let imag = frame.imag_part().max_coeff();
        if imag > 1e-12 {
            return Err(Error::InvalidArgument(format!("frame components must be real (imaginary part {imag:.3e})")));
        }
        let frame = frame.real_part().pruned(0.0);
        let mut sign = 0.0;
        let mut min_det = f64::INFINITY;
        for x in torus_grid(frame.periods(), 8) {
            let d = to_real3(&frame.eval(&x)).determinant();
            if d.abs() < min_det {
                min_det = d.abs();
            }
            if d.abs() < 1e-10 {
                return Err(Error::LinearlyDependentFrame { det: d });
            }
            if sign == 0.0 {
                sign = d.signum();
            } else if d.signum() != sign {
                return Err(Error::LinearlyDependentFrame { det: 0.0 });
            }
        }
        Ok(Self { frame, c: sign, gram_schmidt_applied: false })
    }

    pub fn constant(v: RMat3) -> Result<Self> {
        Self::new(TrigPoly::constant(CMat::from_fn(3, 3, |i, j| r(v[(i, j)])), TWO_PI_PERIODS))
    }

    pub fn identity() -> Self {
        Self::constant(RMat3::identity()).expect("identity frame")
    }

    /// Frame rotating about the third axis at rate `k` along `x^3`.
    pub fn k3(k: i32) -> Self {
        let p = TWO_PI_PERIODS;
        let cos = TrigPoly::scalar_times(&[([0, 0, k], r(0.5)), ([0, 0, -k], r(0.5))], &CMat::identity(1, 1), p);
        let sin = TrigPoly::scalar_times(&[([0, 0, k], c(0.0, -0.5)), ([0, 0, -k], c(0.0, 0.5))], &CMat::identity(1, 1), p);
        let one = TrigPoly::constant(CMat::identity(1, 1), p);
        let frame = cos
            .embed(3, 3, 0, 0)
            .add(&sin.embed(3, 3, 0, 1))
            .add(&sin.scale(r(-1.0)).embed(3, 3, 1, 0))
            .add(&cos.embed(3, 3, 1, 1))
            .add(&one.embed(3, 3, 2, 2));
        Self::new(frame.pruned(1e-15)).expect("twisted frame is valid")
    }

    pub fn frame(&self) -> &TrigPoly {
        &self.frame
    }

    pub fn periods(&self) -> [f64; 3] {
        self.frame.periods()
    }

    /// Frame with `V_1` and `V_2` exchanged.
    pub fn swapped12(&self) -> Result<Self> {
        let mut p = RMat3::zeros();
        p[(0, 1)] = 1.0;
        p[(1, 0)] = 1.0;
        p[(2, 2)] = 1.0;
        self.rotated(&p)
    }

    /// Inverted frame `V -> -V`.
    pub fn inverted(&self) -> Result<Self> {
        Self::new(self.frame.scale(r(-1.0)))
    }

    /// `V' = O V` for a constant orthogonal `O`.
    pub fn rotated(&self, o: &RMat3) -> Result<Self> {
        let oc = CMat::from_fn(3, 3, |i, j| r(o[(i, j)]));
        Self::new(self.frame.left_mul(&oc))
    }

    /// `V' = O(x) V(x)` for an orthogonal trigonometric field `O`.
    pub fn rotated_by_field(&self, o: &TrigPoly) -> Result<Self> {
        Self::new(o.mul(&self.frame).pruned(1e-14))
    }

    /// Pointwise frame geometry.
    pub fn at(&self, x: &[f64; 3]) -> FramePoint {
        let (val, grad) = self.frame.eval_grad(x);
        let v = to_real3(&val);
        let dv = [to_real3(&grad[0]), to_real3(&grad[1]), to_real3(&grad[2])];
        let vinv = v.try_inverse().expect("frame validated as invertible");
        let coframe = vinv.transpose();
        let dcoframe = dv.map(|d| -coframe * d.transpose() * coframe);
        let g_up = v.transpose() * v;
        let g_down = coframe.transpose() * coframe;
        let dg_up = dv.map(|d| d.transpose() * v + v.transpose() * d);
        let dg_down = dg_up.map(|d| -g_down * d * g_down);
        let det_v = v.determinant();
        FramePoint { x: *x, v, dv, coframe, dcoframe, g_up, g_down, dg_up, dg_down, det_v, sqrt_det_g: 1.0 / det_v.abs() }
    }

    /// Pauli field `sigma^alpha = s^j V_j^alpha` as three 2x2 trigonometric fields.
    pub fn pauli_field(&self) -> [TrigPoly; 3] {
        let s = pauli();
        let p = self.periods();
        std::array::from_fn(|alpha| {
            (0..3).fold(TrigPoly::zero(2, 2, p), |acc, j| acc.add(&self.frame.entry(j, alpha).scalar_field_times(&s[j])))
        })
    }

    /// Principal symbol `sigma^alpha(x) xi_alpha` with exact derivatives; zero-order part 0.
    pub fn principal_symbol(&self) -> SymbolPair {
        crate::operator::OperatorSpec::from_principal(self.pauli_field()).to_symbol()
    }

    /// Pauli matrices `sigma^alpha` at `x`.
    pub fn pauli_at(&self, x: &[f64; 3]) -> [CMat; 3] {
        let pt = self.at(x);
        let s = pauli();
        std::array::from_fn(|alpha| (0..3).fold(CMat::zeros(2, 2), |acc, j| acc + &s[j] * r(pt.v[(j, alpha)])))
    }

    /// Pauli matrices and their derivatives `d_mu sigma^alpha` at `x`.
    pub fn pauli_jet_at(&self, pt: &FramePoint) -> ([CMat; 3], [[CMat; 3]; 3]) {
        let s = pauli();
        let sig = std::array::from_fn(|alpha| (0..3).fold(CMat::zeros(2, 2), |acc, j| acc + &s[j] * r(pt.v[(j, alpha)])));
        let dsig = std::array::from_fn(|mu| {
            std::array::from_fn(|alpha| (0..3).fold(CMat::zeros(2, 2), |acc, j| acc + &s[j] * r(pt.dv[mu][(j, alpha)])))
        });
        (sig, dsig)
    }

    /// Largest violation of `g_{alpha beta} V_j^alpha V_k^beta = delta_jk` on a grid.
    pub fn orthonormality_residual(&self) -> f64 {
        torus_grid(self.periods(), 6)
            .iter()
            .map(|x| {
                let pt = self.at(x);
                (pt.v * pt.g_down * pt.v.transpose() - RMat3::identity()).abs().max()
            })
            .fold(0.0, f64::max)
    }
}

/// `g^{alpha beta}(x)` recovered from `det A1` by polarization.
pub fn metric_from_symbol(sym: &SymbolPair, x: &[f64]) -> Result<RMat3> {
    if sym.m() != 2 || sym.n() != 3 {
        return Err(Error::DimensionMismatch("metric_from_symbol needs m = 2, n = 3".into()));
    }
    let e = |v: [f64; 3]| sym.principal(x, &v);
    let basis = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    for b in &basis {
        let t = trace(&e(*b));
        if t.norm() > 1e-12 {
            return Err(Error::NotTraceFree { trace: t.norm() });
        }
    }
    let mut g = RMat3::zeros();
    for a in 0..3 {
        g[(a, a)] = -det2(&e(basis[a])).re;
    }
    for a in 0..3 {
        for b in (a + 1)..3 {
            let mut v = [0.0; 3];
            v[a] = 1.0;
            v[b] = 1.0;
            let q = -det2(&e(v)).re;
            g[(a, b)] = 0.5 * (q - g[(a, a)] - g[(b, b)]);
            g[(b, a)] = g[(a, b)];
        }
    }
    if g.cholesky().is_none() {
        return Err(Error::NotPositiveDefinite);
    }
    Ok(g)
}

/// Frame recovered from a trace-free Hermitian Pauli field.
pub fn frame_from_symbol(sigma: &[TrigPoly; 3]) -> Result<FrameBundle> {
    let p = sigma[0].periods();
    let mut frame = TrigPoly::zero(3, 3, p);
    for (alpha, s) in sigma.iter().enumerate() {
        if s.rows() != 2 || s.cols() != 2 {
            return Err(Error::DimensionMismatch("Pauli field must be 2x2".into()));
        }
        let tr = s.trace().max_coeff();
        if tr > 1e-12 {
            return Err(Error::NotTraceFree { trace: tr });
        }
        let herm = s.hermitian_residual();
        if herm > 1e-12 {
            return Err(Error::NotHermitian { residual: herm });
        }
        let off = s.entry(0, 1);
        frame = frame
            .add(&off.real_part().embed(3, 3, 0, alpha))
            .add(&off.imag_part().scale(r(-1.0)).embed(3, 3, 1, alpha))
            .add(&s.entry(0, 0).real_part().embed(3, 3, 2, alpha));
    }
    FrameBundle::new(frame.pruned(1e-15))
}

/// Inverse of [`frame_from_symbol`].
pub fn symbol_from_frame(bundle: &FrameBundle) -> [TrigPoly; 3] {
    bundle.pauli_field()
}

/// Orientation from the symbol at a set of points; must agree with the frame determinant.
pub fn orientation_invariant(bundle: &FrameBundle) -> Result<f64> {
    let sym = bundle.principal_symbol();
    for x in torus_grid(bundle.periods(), 4) {
        let from_symbol = orientation_from_symbol(&sym, &x)?;
        if (from_symbol - bundle.c).abs() > 1e-10 {
            return Err(Error::InconsistentOrientation { from_symbol, from_frame: bundle.c });
        }
    }
    Ok(bundle.c)
}

/// `-(i/2) sqrt(det g_{alpha beta}) tr(B^1 B^2 B^3)` with `B^alpha = (A1)_{xi_alpha}`.
///
/// Also checks `det g^{alpha beta} = -(1/4) tr(B^1 B^2 B^3)^2`.
pub fn orientation_from_symbol(sym: &SymbolPair, x: &[f64]) -> Result<f64> {
    let g = metric_from_symbol(sym, x)?;
    let b = |a: usize| {
        let mut e = [0.0; 3];
        e[a] = 1.0;
        sym.principal(x, &e)
    };
    let t = trace(&(b(0) * b(1) * b(2)));
    let det_up = g.determinant();
    let ident = det_up + 0.25 * (t * t).re;
    if ident.abs() > 1e-10 * det_up.abs().max(1.0) {
        return Err(Error::InconsistentOrientation { from_symbol: ident, from_frame: det_up });
    }
    let val = (c(0.0, -0.5) * t * (1.0 / det_up.sqrt())).re;
    Ok(val)
}

/// Solves `A1(x, xi) = A1(y, eta)` for `xi`.
pub fn teleparallel_transport(sym: &SymbolPair, y: &[f64], eta: &[f64; 3], x: &[f64]) -> Result<Transport> {
    let s = pauli();
    let frame_matrix = |z: &[f64]| -> RMat3 {
        Matrix3::from_fn(|j, alpha| {
            let mut e = [0.0; 3];
            e[alpha] = 1.0;
            0.5 * trace(&(&s[j] * sym.principal(z, &e))).re
        })
    };
    let my = frame_matrix(y);
    let mx = frame_matrix(x);
    let rhs = my * Vector3::from_column_slice(eta);
    let svd = mx.svd(false, false);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if !(condition < 1e12) {
        return Err(Error::SingularSystem { condition });
    }
    let sol = mx.lu().solve(&rhs).ok_or(Error::SingularSystem { condition })?;
    Ok(Transport { xi: [sol[0], sol[1], sol[2]], condition })
}

/// Connection, torsion and dual torsion at `x`.
pub fn teleparallel_tensors(bundle: &FrameBundle, x: &[f64; 3]) -> TeleparallelData {
    let pt = bundle.at(x);
    let mut gamma = [[[0.0; 3]; 3]; 3];
    for a in 0..3 {
        for mu in 0..3 {
            for b in 0..3 {
                gamma[a][mu][b] = (0..3).map(|k| pt.v[(k, a)] * pt.dcoframe[mu][(k, b)]).sum();
            }
        }
    }
    let mut torsion = [[[0.0; 3]; 3]; 3];
    for a in 0..3 {
        for b in 0..3 {
            for g in 0..3 {
                torsion[a][b][g] = gamma[a][b][g] - gamma[a][g][b];
            }
        }
    }
    let gu = &pt.g_up;
    let mut star_t = RMat3::zeros();
    for a in 0..3 {
        for b in 0..3 {
            let mut acc = 0.0;
            for g in 0..3 {
                for d in 0..3 {
                    let eps = levi_civita(g, d, b);
                    if eps == 0.0 {
                        continue;
                    }
                    let mut t_up = 0.0;
                    for p in 0..3 {
                        for q in 0..3 {
                            t_up += torsion[a][p][q] * gu[(p, g)] * gu[(q, d)];
                        }
                    }
                    acc += t_up * eps;
                }
            }
            star_t[(a, b)] = 0.5 * pt.sqrt_det_g * acc;
        }
    }
    let star_t_up = star_t * gu;
    let trace_star_t = star_t.trace();
    TeleparallelData { gamma, torsion, star_t, star_t_up, trace_star_t, christoffel: christoffel(&pt) }
}

/// Levi-Civita Christoffel symbols `{beta alpha gamma}` at a frame point.
pub fn christoffel(pt: &FramePoint) -> [[[f64; 3]; 3]; 3] {
    let mut out = [[[0.0; 3]; 3]; 3];
    let dg = &pt.dg_down;
    for b in 0..3 {
        for a in 0..3 {
            for g in 0..3 {
                out[b][a][g] = 0.5 * (0..3).map(|d| pt.g_up[(b, d)] * (dg[a][(g, d)] + dg[g][(a, d)] - dg[d][(a, g)])).sum::<f64>();
            }
        }
    }
    out
}

/// `tr *T` from the explicit six-term expression in the coframe.
pub fn trace_star_t_explicit(bundle: &FrameBundle, x: &[f64; 3]) -> f64 {
    let pt = bundle.at(x);
    let mut acc = 0.0;
    for j in 0..3 {
        for mu in 0..3 {
            for nu in 0..3 {
                for rho in 0..3 {
                    let e = levi_civita(mu, nu, rho);
                    if e != 0.0 {
                        acc += e * pt.coframe[(j, rho)] * pt.dcoframe[mu][(j, nu)];
                    }
                }
            }
        }
    }
    pt.g_up.determinant().sqrt() * acc
}

/// `| -i{[v+]*, v+} - (c/2) *T^{ab} xi_a xi_b / |xi|_g^3 |`.
pub fn curvature_torsion_residual(bundle: &FrameBundle, pt: &CotangentPoint) -> Result<f64> {
    let (lhs, rhs) = curvature_torsion_sides(bundle, pt)?;
    Ok((lhs - rhs).abs())
}

/// Both sides of the curvature–torsion identity.
pub fn curvature_torsion_sides(bundle: &FrameBundle, pt: &CotangentPoint) -> Result<(f64, f64)> {
    if pt.n() != 3 {
        return Err(Error::DimensionMismatch("curvature-torsion identity needs n = 3".into()));
    }
    let sym = bundle.principal_symbol();
    let lhs = crate::symbol::u1_curvature(&sym, 1, pt)?.scalar;
    let x = [pt.x[0], pt.x[1], pt.x[2]];
    let tele = teleparallel_tensors(bundle, &x);
    let fp = bundle.at(&x);
    let xi = Vector3::from_column_slice(&pt.xi);
    let norm2 = (xi.transpose() * fp.g_up * xi)[0];
    let quad = (xi.transpose() * tele.star_t_up * xi)[0];
    Ok((lhs, 0.5 * bundle.c * quad / norm2.powf(1.5)))
}

/// `O_j^k = (1/2) tr(s_j R s^k R*)` for special unitary `R`.
pub fn su2_to_so3(rm: &CMat) -> Result<RMat3> {
    let res = unitarity_residual(rm).max((det2(rm) - c(1.0, 0.0)).norm());
    if rm.nrows() != 2 || res > 1e-10 {
        return Err(Error::NotSpecialUnitary { residual: res });
    }
    let s = pauli();
    let ra = rm.adjoint();
    Ok(Matrix3::from_fn(|j, k| 0.5 * trace(&(&s[j] * rm * &s[k] * &ra)).re))
}

/// [`su2_to_so3`] applied to a trigonometric field, exactly in coefficient space.
pub fn su2_field_to_so3(rf: &TrigPoly) -> TrigPoly {
    let s = pauli();
    let ra = rf.adjoint();
    let mut out = TrigPoly::zero(3, 3, rf.periods());
    for j in 0..3 {
        for k in 0..3 {
            let f = rf.right_mul(&s[k]).mul(&ra).left_mul(&s[j]).trace().scale(r(0.5)).real_part();
            out = out.add(&f.embed(3, 3, j, k));
        }
    }
    out.pruned(1e-15)
}

/// Defect of covector transport around a coordinate square of side `h` in the `(a, b)` plane.
///
/// The transport ODE `d xi_beta / dt = Gamma^alpha_{mu beta} xdot^mu xi_alpha` is integrated
/// with one midpoint step per edge; the connection is flat, so the defect is pure
/// discretization error of order `h^3`.
pub fn transport_loop_defect(bundle: &FrameBundle, x0: &[f64; 3], eta: &[f64; 3], h: f64, axes: (usize, usize)) -> f64 {
    let step = |x: &[f64; 3], xi: &Vector3<f64>, dir: &[f64; 3]| -> Vector3<f64> {
        let g = teleparallel_tensors(bundle, x).gamma;
        Vector3::from_fn(|b, _| {
            let mut acc = 0.0;
            for a in 0..3 {
                for mu in 0..3 {
                    acc += g[a][mu][b] * dir[mu] * xi[a];
                }
            }
            acc
        })
    };
    let mut dirs = [[0.0; 3]; 4];
    dirs[0][axes.0] = h;
    dirs[1][axes.1] = h;
    dirs[2][axes.0] = -h;
    dirs[3][axes.1] = -h;
    let mut x = *x0;
    let mut xi = Vector3::from_column_slice(eta);
    for d in &dirs {
        let mid = [x[0] + 0.5 * d[0], x[1] + 0.5 * d[1], x[2] + 0.5 * d[2]];
        let k1 = step(&x, &xi, d);
        let half = xi + 0.5 * k1;
        xi += step(&mid, &half, d);
        x = [x[0] + d[0], x[1] + d[1], x[2] + d[2]];
    }
    (xi - Vector3::from_column_slice(eta)).norm()
}

/// `max |nabla_mu g_{beta gamma}|` with the metric derivative taken by finite differences.
pub fn metric_compatibility_residual(bundle: &FrameBundle, x: &[f64; 3]) -> f64 {
    let tele = teleparallel_tensors(bundle, x);
    let g = bundle.at(x).g_down;
    let h = 1e-3;
    let mut worst: f64 = 0.0;
    for mu in 0..3 {
        let at = |t: f64| {
            let mut y = *x;
            y[mu] += t;
            bundle.at(&y).g_down
        };
        let dg = (8.0 * (at(h) - at(-h)) - (at(2.0 * h) - at(-2.0 * h))) / (12.0 * h);
        for b in 0..3 {
            for gg in 0..3 {
                let mut v = dg[(b, gg)];
                for a in 0..3 {
                    v -= tele.gamma[a][mu][b] * g[(a, gg)] + tele.gamma[a][mu][gg] * g[(b, a)];
                }
                worst = worst.max(v.abs());
            }
        }
    }
    worst
}
