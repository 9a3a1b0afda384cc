//! Gauss–Legendre nodes, product rules on the unit sphere and uniform torus grids.

use std::f64::consts::PI;

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, 0.0);
            for k in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * k + 1) as f64 * z * p1 - k as f64 * p2) / (k + 1) as f64;
            }
            dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Gauss–Legendre rule mapped to `[a, b]`.
pub fn gauss_legendre_interval(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (z, w) = gauss_legendre(n);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    (z.iter().map(|t| mid + half * t).collect(), w.iter().map(|v| v * half).collect())
}

/// Quadrature rule on the Euclidean unit sphere `S^{n-1}`, `n` in {2, 3}.
#[derive(Clone, Debug)]
pub struct SphereRule {
    pub dim: usize,
    pub nodes: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl SphereRule {
    /// Product rule: Gauss–Legendre in `cos(theta)` times uniform azimuth (n = 3),
    /// or uniform on the circle (n = 2, `polar` ignored).
    pub fn new(dim: usize, polar: usize, azimuthal: usize) -> Self {
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        let dphi = 2.0 * PI / azimuthal as f64;
        if dim == 2 {
            for k in 0..azimuthal {
                let phi = (k as f64 + 0.5) * dphi;
                nodes.push(vec![phi.cos(), phi.sin()]);
                weights.push(dphi);
            }
        } else {
            let (z, w) = gauss_legendre(polar);
            for (zi, wi) in z.iter().zip(&w) {
                let rho = (1.0 - zi * zi).sqrt();
                for k in 0..azimuthal {
                    let phi = (k as f64 + 0.5) * dphi;
                    nodes.push(vec![rho * phi.cos(), rho * phi.sin(), *zi]);
                    weights.push(wi * dphi);
                }
            }
        }
        Self { dim, nodes, weights }
    }

    pub fn default_for(dim: usize) -> Self {
        Self::new(dim, 32, 64)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Uniform grid on a torus with the given periods, `per_axis` points per axis.
pub fn torus_grid(periods: [f64; 3], per_axis: usize) -> Vec<[f64; 3]> {
    let mut out = Vec::with_capacity(per_axis.pow(3));
    for i in 0..per_axis {
        for j in 0..per_axis {
            for k in 0..per_axis {
                out.push([
                    periods[0] * i as f64 / per_axis as f64,
                    periods[1] * j as f64 / per_axis as f64,
                    periods[2] * k as f64 / per_axis as f64,
                ]);
            }
        }
    }
    out
}

/// Weight of each point of [`torus_grid`] for the trapezoid rule.
pub fn torus_cell_volume(periods: [f64; 3], per_axis: usize) -> f64 {
    periods.iter().product::<f64>() / (per_axis.pow(3) as f64)
}
