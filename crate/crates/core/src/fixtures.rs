//! Reproducible operators, frames and symbols used by tests, benches and the verify suite.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::frame::FrameBundle;
use crate::linalg::{c, pauli, r, CMat, ZERO};
use crate::operator::OperatorSpec;
use crate::symbol::{CotangentPoint, SymbolPair};
use crate::trig::{TrigPoly, Wave, TWO_PI_PERIODS};

/// `s^a xi_a` with the standard Pauli matrices.
pub fn sigma_dot(xi: &[f64]) -> CMat {
    let s = pauli();
    &s[0] * c(xi[0], 0.0) + &s[1] * c(xi[1], 0.0) + &s[2] * c(xi[2], 0.0)
}

/// Principal symbol of the twisted frame with twist rate `k` along `x^3`.
pub fn k3_principal(k: f64, x: &[f64], xi: &[f64]) -> CMat {
    let e = c(0.0, k * x[2]).exp();
    let off = e * c(xi[0], -xi[1]);
    CMat::from_row_slice(2, 2, &[c(xi[2], 0.0), off, off.conj(), c(-xi[2], 0.0)])
}

/// Full symbol of the massless Dirac operator of the twisted frame.
pub fn k3_symbol(k: f64) -> SymbolPair {
    SymbolPair::new(3, 2, move |x, xi| k3_principal(k, x, xi), move |_, _| CMat::identity(2, 2) * c(-0.5 * k, 0.0))
}

pub fn zero2() -> CMat {
    CMat::from_element(2, 2, ZERO)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_wave(rng: &mut ChaCha8Rng, max_h: i32) -> Wave {
    loop {
        let w = [rng.gen_range(-max_h..=max_h), rng.gen_range(-max_h..=max_h), rng.gen_range(-max_h..=max_h)];
        if w != [0, 0, 0] {
            return w;
        }
    }
}

/// Real scalar field with a few random harmonics of size up to `amp`.
fn random_real_scalar(rng: &mut ChaCha8Rng, max_h: i32, amp: f64, count: usize) -> TrigPoly {
    let mut p = TrigPoly::zero(1, 1, TWO_PI_PERIODS);
    for _ in 0..count {
        let w = random_wave(rng, max_h);
        let z = c(rng.gen_range(-amp..amp), rng.gen_range(-amp..amp));
        p.add_term(w, CMat::from_element(1, 1, z));
        p.add_term([-w[0], -w[1], -w[2]], CMat::from_element(1, 1, z.conj()));
    }
    p
}

/// Random Hermitian field of size `m` with harmonics up to `max_h`.
pub fn random_hermitian_field(rng: &mut ChaCha8Rng, m: usize, max_h: i32, amp: f64) -> TrigPoly {
    let mut p = TrigPoly::zero(m, m, TWO_PI_PERIODS);
    for _ in 0..2 {
        let w = random_wave(rng, max_h);
        let mat = CMat::from_fn(m, m, |_, _| c(rng.gen_range(-amp..amp), rng.gen_range(-amp..amp)));
        p.add_term(w, mat.clone());
        p.add_term([-w[0], -w[1], -w[2]], mat.adjoint());
    }
    let h0 = CMat::from_fn(m, m, |_, _| c(rng.gen_range(-amp..amp), rng.gen_range(-amp..amp)));
    p.add_term([0, 0, 0], (&h0 + h0.adjoint()) * r(0.5));
    p
}

/// Frame `I + eps * (random real harmonics)`, positively oriented for small `eps`.
pub fn random_frame(seed: u64, max_h: i32, eps: f64) -> FrameBundle {
    let mut rng = rng(seed.wrapping_mul(0x9e37_79b9) ^ 0x51);
    let mut frame = TrigPoly::constant(CMat::identity(3, 3), TWO_PI_PERIODS);
    for j in 0..3 {
        for a in 0..3 {
            frame = frame.add(&random_real_scalar(&mut rng, max_h, eps, 1).embed(3, 3, j, a));
        }
    }
    FrameBundle::new(frame.pruned(0.0)).expect("small perturbation of the identity frame")
}

fn rotation_field(axis: usize, wave: Wave) -> TrigPoly {
    let one = CMat::identity(1, 1);
    let cos = TrigPoly::scalar_times(&[(wave, r(0.5)), ([-wave[0], -wave[1], -wave[2]], r(0.5))], &one, TWO_PI_PERIODS);
    let sin = TrigPoly::scalar_times(&[(wave, c(0.0, -0.5)), ([-wave[0], -wave[1], -wave[2]], c(0.0, 0.5))], &one, TWO_PI_PERIODS);
    let (p, q) = ((axis + 1) % 3, (axis + 2) % 3);
    TrigPoly::constant(CMat::from_fn(1, 1, |_, _| r(1.0)), TWO_PI_PERIODS)
        .embed(3, 3, axis, axis)
        .add(&cos.embed(3, 3, p, p))
        .add(&cos.embed(3, 3, q, q))
        .add(&sin.scale(r(-1.0)).embed(3, 3, p, q))
        .add(&sin.embed(3, 3, q, p))
}

/// Frame `O(x) L` with `O` a product of two rotations with integer wavevectors and `L`
/// a constant matrix near the identity. The induced metric is constant.
pub fn random_rotation_frame(seed: u64, max_h: i32) -> FrameBundle {
    let mut rng = rng(seed.wrapping_mul(0x2545_f491) ^ 0x77);
    let a1 = rng.gen_range(0..3);
    let a2 = (a1 + rng.gen_range(1..3)) % 3;
    let o = rotation_field(a1, random_wave(&mut rng, max_h)).mul(&rotation_field(a2, random_wave(&mut rng, max_h)));
    let l = CMat::from_fn(3, 3, |i, j| r(if i == j { 1.0 } else { 0.0 } + rng.gen_range(-0.15..0.15)));
    FrameBundle::new(o.right_mul(&l).pruned(1e-15)).expect("rotation frame is valid")
}

/// Random symmetric first-order operator on half-densities.
///
/// The derivative coefficients are `base^alpha + eps * (random Hermitian field)`;
/// the zero-order term is a random Hermitian field minus `(i/2) d_alpha B^alpha`,
/// so the subprincipal symbol is Hermitian.
pub fn random_operator(seed: u64, m: usize, max_h: i32, eps: f64) -> OperatorSpec {
    let mut rng = rng(seed.wrapping_mul(0x1656_67b1) ^ 0x33);
    let base: [CMat; 3] = if m == 2 {
        pauli()
    } else {
        std::array::from_fn(|a| {
            let h = CMat::from_fn(m, m, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
            let h = (&h + h.adjoint()) * r(0.5);
            let mut d = CMat::zeros(m, m);
            for i in 0..m {
                d[(i, i)] = r(((i + a) % m) as f64 + 0.5);
            }
            h + d
        })
    };
    let coeffs: [TrigPoly; 3] =
        std::array::from_fn(|a| TrigPoly::constant(base[a].clone(), TWO_PI_PERIODS).add(&random_hermitian_field(&mut rng, m, max_h, eps)));
    let div = (0..3).fold(TrigPoly::zero(m, m, TWO_PI_PERIODS), |acc, a| acc.add(&coeffs[a].derivative(a)));
    let zero = random_hermitian_field(&mut rng, m, max_h, 0.3).sub(&div.scale(c(0.0, 0.5)));
    OperatorSpec::new(coeffs, zero, true).expect("random operator is well formed")
}

/// Random point with `x` in the torus and `xi` on a shell of radius in [0.5, 2].
pub fn random_point(rng: &mut ChaCha8Rng) -> CotangentPoint {
    let x = (0..3).map(|_| rng.gen_range(0.0..std::f64::consts::TAU)).collect();
    let mut xi: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let n = xi.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-3);
    let rad = rng.gen_range(0.5..2.0);
    xi.iter_mut().for_each(|v| *v *= rad / n);
    CotangentPoint::new(x, xi).expect("nonzero covector")
}

/// Random elliptic symbol with simple eigenvalues and Hermitian subprincipal part, with analytic jets.
///
/// `A1 = B^a(x) xi_a + |xi| D`: for `m = 2`, `B` is a perturbed Pauli field and `D = 0`;
/// for `m = 3`, `B` is small and `D = diag(4, 3/2, -5/2)` keeps the eigenvalues apart
/// (a purely linear 3x3 symbol always has a zero eigenvalue somewhere on the sphere).
pub fn random_symbol(seed: u64, m: usize) -> SymbolPair {
    let mut rng = rng(seed.wrapping_mul(0x85eb_ca6b) ^ 0x1d);
    let (base, amp, d): ([CMat; 3], f64, CMat) = if m == 2 {
        (pauli(), 0.12, CMat::zeros(2, 2))
    } else {
        let b = std::array::from_fn(|_| {
            let h = CMat::from_fn(m, m, |_, _| c(rng.gen_range(-0.12..0.12), rng.gen_range(-0.12..0.12)));
            (&h + h.adjoint()) * r(0.5)
        });
        let mut d = CMat::zeros(m, m);
        for (i, v) in [4.0, 1.5, -2.5].iter().enumerate().take(m) {
            d[(i, i)] = r(*v);
        }
        (b, 0.04, d)
    };
    let b: [TrigPoly; 3] =
        std::array::from_fn(|a| TrigPoly::constant(base[a].clone(), TWO_PI_PERIODS).add(&random_hermitian_field(&mut rng, m, 1, amp)));
    let db: [[TrigPoly; 3]; 3] = std::array::from_fn(|a| std::array::from_fn(|bb| b[bb].derivative(a)));
    let div = (0..3).fold(TrigPoly::zero(m, m, TWO_PI_PERIODS), |acc, a| acc.add(&db[a][a]));
    let zero = random_hermitian_field(&mut rng, m, 1, 0.3).sub(&div.scale(c(0.0, 0.5)));
    let x3 = |x: &[f64]| -> [f64; 3] { [x[0], x[1], x[2]] };
    let nrm = |xi: &[f64]| xi.iter().map(|v| v * v).sum::<f64>().sqrt();
    let (b1, d1) = (b.clone(), d.clone());
    let (b2, d2) = (b.clone(), d.clone());
    let (db1, db2) = (db.clone(), db.clone());
    SymbolPair::new(
        3,
        m,
        move |x, xi| (0..3).fold(&d1 * r(nrm(xi)), |acc, a| acc + b1[a].eval(&x3(x)) * r(xi[a])),
        move |x, _| zero.eval(&x3(x)),
    )
    .with_principal_derivatives(
        move |x, xi| (0..3).map(|a| (0..3).fold(CMat::zeros(m, m), |acc, bb| acc + db1[a][bb].eval(&x3(x)) * r(xi[bb]))).collect(),
        move |x, xi| (0..3).map(|a| b2[a].eval(&x3(x)) + &d2 * r(xi[a] / nrm(xi))).collect(),
    )
    .with_mixed_derivatives(move |x, _| (0..3).map(|a| (0..3).map(|bb| db2[a][bb].eval(&x3(x))).collect()).collect())
}

/// Smooth unitary field `exp(i H(x))` with `H` a random Hermitian trigonometric field.
pub fn random_unitary_field(seed: u64, m: usize, amp: f64) -> crate::symbol::UnitaryField {
    let mut rng = rng(seed.wrapping_mul(0xc2b2_ae35) ^ 0x5f);
    let h = random_hermitian_field(&mut rng, m, 1, amp);
    crate::symbol::UnitaryField::new(3, move |x| {
        let (vals, vecs) = crate::linalg::eigh(&h.eval(&[x[0], x[1], x[2]]));
        let phases = CMat::from_diagonal(&crate::linalg::CVec::from_iterator(m, vals.iter().map(|l| c(0.0, *l).exp())));
        &vecs * phases * vecs.adjoint()
    })
}

/// Random `m x 1` trigonometric field with three harmonics up to 2, for weak-form checks.
pub fn random_trial_field(seed: u64, m: usize, periods: [f64; 3]) -> TrigPoly {
    let mut rng = rng(seed.wrapping_mul(0x27d4_eb2f) ^ 0x65);
    let mut v = TrigPoly::zero(m, 1, periods);
    for _ in 0..3 {
        let w = [rng.gen_range(-2..=2), rng.gen_range(-2..=2), rng.gen_range(-2..=2)];
        v.add_term(w, CMat::from_fn(m, 1, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))));
    }
    v
}
