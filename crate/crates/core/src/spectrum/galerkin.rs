//! Fourier–Galerkin discretization on the 3-torus and the Hermitian eigensolve.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{eigh, norm, CMat, CVec};
use crate::operator::OperatorSpec;
use crate::trig::Wave;

/// Largest truncation for operators coupled in more than one direction.
pub const DENSE_CAP: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub enum BlockStructure {
    /// Constant coefficients: one `m x m` block per mode.
    PerMode,
    /// Coefficients depend on a single coordinate: one block per transverse mode.
    SingleAxis(usize),
    /// General coefficients: one dense matrix.
    Dense,
}

/// A Hermitian block; basis vector `i * m + s` is `e_s e^{i<kappa_i, x>}` with `kappa_i = modes[i]`.
#[derive(Clone, Debug)]
pub struct GalerkinBlock {
    pub modes: Vec<Wave>,
    pub matrix: CMat,
}

#[derive(Clone, Debug)]
pub struct GalerkinSystem {
    pub k: usize,
    pub m: usize,
    pub periods: [f64; 3],
    pub structure: BlockStructure,
    pub blocks: Vec<GalerkinBlock>,
}

impl GalerkinSystem {
    pub fn dimension(&self) -> usize {
        self.blocks.iter().map(|b| b.matrix.nrows()).sum()
    }

    /// `|lambda| <= K / 2`, in units of the smallest wavenumber.
    pub fn trust_window(&self) -> f64 {
        let p = self.periods.iter().cloned().fold(0.0, f64::max);
        0.5 * self.k as f64 * 2.0 * std::f64::consts::PI / p
    }

    pub fn hermitian_residual(&self) -> f64 {
        self.blocks.iter().map(|b| norm(&(&b.matrix - b.matrix.adjoint()))).fold(0.0, f64::max)
    }
}

fn range(k: usize) -> std::ops::RangeInclusive<i32> {
    -(k as i32)..=k as i32
}

fn assemble_block(op: &OperatorSpec, modes: Vec<Wave>) -> GalerkinBlock {
    let m = op.m;
    let dim = modes.len() * m;
    let p = op.periods;
    let wn = |w: &Wave| -> [f64; 3] { std::array::from_fn(|a| 2.0 * std::f64::consts::PI * w[a] as f64 / p[a]) };
    let mut mat = CMat::zeros(dim, dim);
    for (i, ki) in modes.iter().enumerate() {
        for (j, kj) in modes.iter().enumerate() {
            let d: Wave = std::array::from_fn(|a| ki[a] - kj[a]);
            let xi = wn(kj);
            let mut entry = CMat::zeros(m, m);
            let mut hit = false;
            for a in 0..3 {
                if xi[a] != 0.0 {
                    if let Some(b) = op.derivative_coeffs[a].coeff(&d) {
                        entry += b * crate::linalg::r(xi[a]);
                        hit = true;
                    }
                }
            }
            if let Some(z) = op.zero_order.coeff(&d) {
                entry += z;
                hit = true;
            }
            if hit {
                mat.view_mut((i * m, j * m), (m, m)).copy_from(&entry);
            }
        }
    }
    GalerkinBlock { modes, matrix: mat }
}

/// Exact projection of `op` onto the modes `|kappa|_inf <= K`.
pub fn assemble_galerkin(op: &OperatorSpec, k: usize) -> Result<GalerkinSystem> {
    if !op.is_polynomial() {
        return Err(Error::NonPolynomialCoefficient("Galerkin assembly needs trigonometric-polynomial coefficients".into()));
    }
    let needed = op.max_harmonic();
    if k < needed.max(1) {
        return Err(Error::TruncationTooSmall { k, needed: needed.max(1) });
    }
    let active = op.active_axes();
    let n_active = active.iter().filter(|a| **a).count();
    let structure = match n_active {
        0 => BlockStructure::PerMode,
        1 => BlockStructure::SingleAxis(active.iter().position(|a| *a).unwrap_or(0)),
        _ => BlockStructure::Dense,
    };
    let mode_sets: Vec<Vec<Wave>> = match structure {
        BlockStructure::PerMode => {
            let mut out = Vec::new();
            for a in range(k) {
                for b in range(k) {
                    for c in range(k) {
                        out.push(vec![[a, b, c]]);
                    }
                }
            }
            out
        }
        BlockStructure::SingleAxis(axis) => {
            let (u, v) = match axis {
                0 => (1, 2),
                1 => (0, 2),
                _ => (0, 1),
            };
            let mut out = Vec::new();
            for a in range(k) {
                for b in range(k) {
                    out.push(
                        range(k)
                            .map(|t| {
                                let mut w = [0; 3];
                                w[u] = a;
                                w[v] = b;
                                w[axis] = t;
                                w
                            })
                            .collect(),
                    );
                }
            }
            out
        }
        BlockStructure::Dense => {
            if k > DENSE_CAP {
                return Err(Error::TruncationTooLarge { k, cap: DENSE_CAP });
            }
            let mut all = Vec::new();
            for a in range(k) {
                for b in range(k) {
                    for c in range(k) {
                        all.push([a, b, c]);
                    }
                }
            }
            vec![all]
        }
    };
    let blocks: Vec<GalerkinBlock> = mode_sets.into_par_iter().map(|modes| assemble_block(op, modes)).collect();
    let sys = GalerkinSystem { k, m: op.m, periods: op.periods, structure, blocks };
    let scale = sys.blocks.iter().map(|b| norm(&b.matrix)).fold(1.0, f64::max);
    let res = sys.hermitian_residual();
    if res > 1e-12 * scale {
        return Err(Error::NotSelfAdjoint { residual: res });
    }
    Ok(sys)
}

/// Eigenpairs of a Galerkin system, or an exact oracle spectrum without vectors.
#[derive(Clone, Debug)]
pub struct SpectralData {
    /// All eigenvalues in increasing order with multiplicity.
    pub values: Vec<f64>,
    /// `(block, column)` of each eigenvalue when eigenvectors are kept.
    pub origin: Vec<(usize, usize)>,
    /// Block modes and eigenvector matrices, aligned with `origin`.
    pub blocks: Vec<(Vec<Wave>, CMat)>,
    pub m: usize,
    pub periods: [f64; 3],
    /// `|lambda|` up to which the list is trusted.
    pub window: f64,
    pub max_residual: f64,
    pub max_orthonormality: f64,
}

impl SpectralData {
    /// Spectrum known exactly below `window` (lattice and separation oracles).
    pub fn from_values(mut values: Vec<f64>, m: usize, periods: [f64; 3], window: f64) -> Self {
        values.sort_by(f64::total_cmp);
        Self { values, origin: Vec::new(), blocks: Vec::new(), m, periods, window, max_residual: 0.0, max_orthonormality: 0.0 }
    }

    pub fn has_vectors(&self) -> bool {
        !self.blocks.is_empty()
    }

    /// Eigenvalues within the trust window.
    pub fn trusted(&self) -> impl Iterator<Item = f64> + '_ {
        self.values.iter().cloned().filter(move |l| l.abs() <= self.window)
    }

    /// Signed index: `1, 2, ...` for positive eigenvalues, `0, -1, ...` for nonpositive ones.
    pub fn signed_indices(&self) -> Vec<i64> {
        let first_pos = self.values.partition_point(|l| *l <= 0.0) as i64;
        (0..self.values.len() as i64).map(|p| p - first_pos + 1).collect()
    }

    /// Eigenvalue with signed index `k`.
    pub fn by_index(&self, k: i64) -> Option<f64> {
        let first_pos = self.values.partition_point(|l| *l <= 0.0) as i64;
        let p = first_pos + k - 1;
        (p >= 0).then(|| self.values.get(p as usize).cloned()).flatten()
    }

    /// Number of positive eigenvalues below `lambda`, without a window check.
    pub fn count_below(&self, lambda: f64) -> usize {
        let lo = self.values.partition_point(|l| *l <= 0.0);
        let hi = self.values.partition_point(|l| *l < lambda);
        hi.saturating_sub(lo)
    }

    /// Fourier coefficients (mode, `m`-vector) of the eigenfunction at sorted position `p`.
    pub fn eigenvector(&self, p: usize) -> Option<Vec<(Wave, CVec)>> {
        let (b, col) = *self.origin.get(p)?;
        let (modes, vecs) = self.blocks.get(b)?;
        let v = vecs.column(col);
        Some(modes.iter().enumerate().map(|(i, w)| (*w, v.rows(i * self.m, self.m).into_owned())).collect())
    }
}

/// Full eigen-decomposition, block by block.
pub fn hermitian_eigensolve(sys: &GalerkinSystem) -> Result<SpectralData> {
    let solved: Vec<(Vec<f64>, CMat, f64, f64)> = sys
        .blocks
        .par_iter()
        .map(|b| {
            let (vals, vecs) = eigh(&b.matrix);
            let scale = norm(&b.matrix).max(1.0);
            let mut res: f64 = 0.0;
            for (i, l) in vals.iter().enumerate() {
                let v = vecs.column(i);
                res = res.max((&b.matrix * v - v * crate::linalg::r(*l)).norm() / scale);
            }
            let orth = norm(&(vecs.adjoint() * &vecs - CMat::identity(vecs.ncols(), vecs.ncols())));
            (vals, vecs, res, orth)
        })
        .collect();
    let mut entries: Vec<(f64, usize, usize)> = Vec::with_capacity(sys.dimension());
    let mut max_residual: f64 = 0.0;
    let mut max_orth: f64 = 0.0;
    for (bi, (vals, _, res, orth)) in solved.iter().enumerate() {
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(Error::ConvergenceFailure);
        }
        max_residual = max_residual.max(*res);
        max_orth = max_orth.max(*orth);
        entries.extend(vals.iter().enumerate().map(|(i, v)| (*v, bi, i)));
    }
    // stable tie-break by block index keeps the merged order deterministic
    entries.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let blocks = sys.blocks.iter().zip(solved).map(|(b, s)| (b.modes.clone(), s.1)).collect();
    Ok(SpectralData {
        values: entries.iter().map(|e| e.0).collect(),
        origin: entries.iter().map(|e| (e.1, e.2)).collect(),
        blocks,
        m: sys.m,
        periods: sys.periods,
        window: sys.trust_window(),
        max_residual,
        max_orthonormality: max_orth,
    })
}

/// Assemble and solve in one call.
pub fn galerkin_spectrum(op: &OperatorSpec, k: usize) -> Result<SpectralData> {
    hermitian_eigensolve(&assemble_galerkin(op, k)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dirac::build_dirac;
    use crate::frame::FrameBundle;
    use crate::linalg::{c, pauli, r};

    #[test]
    fn pauli_blocks() {
        let op = OperatorSpec::pauli_plus(CMat::zeros(2, 2));
        let sys = assemble_galerkin(&op, 1).unwrap();
        assert_eq!(sys.structure, BlockStructure::PerMode);
        assert_eq!(sys.blocks.len(), 27);
        let s = pauli();
        for b in &sys.blocks {
            let w = b.modes[0];
            let expect = &s[0] * r(w[0] as f64) + &s[1] * r(w[1] as f64) + &s[2] * r(w[2] as f64);
            assert!(norm(&(&b.matrix - expect)) < 1e-15);
        }
        let d = hermitian_eigensolve(&sys).unwrap();
        assert_eq!(d.values.len(), 54);
        assert_eq!(d.count_below(0.5), 0);
        assert_eq!(d.count_below(1.0), 0);
        assert_eq!(d.count_below(1.4), 6);
        // norm-sqrt(2) lattice vectors also lie below 1.5
        assert_eq!(d.count_below(1.5), 18);
    }

    #[test]
    fn perturbed_pauli_blocks() {
        let s = 0.2;
        let a0 = CMat::from_row_slice(2, 2, &[r(s), r(0.0), r(0.0), r(0.0)]);
        let sys = assemble_galerkin(&OperatorSpec::pauli_plus(a0.clone()), 1).unwrap();
        let b = sys.blocks.iter().find(|b| b.modes[0] == [0, 0, 1]).unwrap();
        assert!(norm(&(&b.matrix - (&pauli()[2] + a0))) < 1e-15);
    }

    #[test]
    fn twisted_dirac_couples_neighbouring_modes() {
        let op = build_dirac(&FrameBundle::k3(1), true).unwrap();
        let sys = assemble_galerkin(&op, 3).unwrap();
        assert_eq!(sys.structure, BlockStructure::SingleAxis(2));
        assert_eq!(sys.blocks.len(), 49);
        let b = sys.blocks.iter().find(|b| b.modes[0][0] == 1 && b.modes[0][1] == 0).unwrap();
        // mode m3 = 1 of component 0 couples to m3 = 0 of component 1
        let i = b.modes.iter().position(|w| w[2] == 1).unwrap();
        let j = b.modes.iter().position(|w| w[2] == 0).unwrap();
        assert!((b.matrix[(2 * i, 2 * j + 1)] - c(1.0, 0.0)).norm() < 1e-15);
        assert!(b.matrix[(2 * i, 2 * i + 1)].norm() < 1e-15);
        assert!(matches!(assemble_galerkin(&op, 0), Err(Error::TruncationTooSmall { .. })));
    }

    #[test]
    fn small_matrices() {
        let d = hermitian_eigensolve(&GalerkinSystem {
            k: 1,
            m: 2,
            periods: crate::trig::TWO_PI_PERIODS,
            structure: BlockStructure::Dense,
            blocks: vec![GalerkinBlock { modes: vec![[0, 0, 0]], matrix: pauli()[0].clone() }],
        })
        .unwrap();
        assert_eq!(d.values, vec![-1.0, 1.0]);
        let diag = CMat::from_diagonal(&CVec::from_vec(vec![r(2.0), r(1.0), r(3.0)]));
        let (v, _) = eigh(&diag);
        assert_eq!(v, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn random_hermitian_200() {
        use rand::Rng;
        let mut rng = crate::fixtures::rng(7);
        let a = CMat::from_fn(200, 200, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        let h = (&a + a.adjoint()) * r(0.5);
        let sys = GalerkinSystem {
            k: 1,
            m: 1,
            periods: crate::trig::TWO_PI_PERIODS,
            structure: BlockStructure::Dense,
            blocks: vec![GalerkinBlock { modes: vec![[0, 0, 0]; 200], matrix: h.clone() }],
        };
        let d = hermitian_eigensolve(&sys).unwrap();
        assert!(d.max_residual < 1e-10 && d.max_orthonormality < 1e-10);
        let tr: f64 = d.values.iter().sum();
        assert!((tr - h.trace().re).abs() < 1e-9);
    }

    #[test]
    fn signed_enumeration() {
        let d = SpectralData::from_values(vec![-2.0, 0.0, 1.0, -1.0, 3.0], 1, crate::trig::TWO_PI_PERIODS, 10.0);
        assert_eq!(d.signed_indices(), vec![-2, -1, 0, 1, 2]);
        assert_eq!(d.by_index(1), Some(1.0));
        assert_eq!(d.by_index(0), Some(0.0));
        assert_eq!(d.by_index(-2), Some(-2.0));
        assert_eq!(d.by_index(-3), None);
    }
}
