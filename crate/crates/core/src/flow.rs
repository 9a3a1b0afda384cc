//! Hamiltonian trajectories of an eigenvalue of the principal symbol, the
//! principal symbol of the propagator and a scan for returning trajectories.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{c, projector, trace, CMat, CVec};
use crate::symbol::{principal_eigensystem, subprincipal_symbol, CotangentPoint, SymbolPair};

/// Default time step for trajectory integration.
pub const DEFAULT_DT: f64 = 1e-2;

#[derive(Clone, Debug, Serialize)]
pub struct TrajectorySample {
    pub t: f64,
    pub x: Vec<f64>,
    pub xi: Vec<f64>,
    pub h: f64,
    /// `int_0^t q dtau`, real for Hermitian subprincipal symbols.
    pub phase: f64,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub j: i32,
    pub samples: Vec<TrajectorySample>,
    /// Eigenvector transported with `i w* w' = 0`, one per sample.
    pub transported: Vec<CVec>,
}

impl Trajectory {
    pub fn last(&self) -> &TrajectorySample {
        self.samples.last().expect("trajectory has samples")
    }

    /// Largest `|h(t) - h(0)| / |h(0)|`.
    pub fn energy_drift(&self) -> f64 {
        let h0 = self.samples[0].h;
        self.samples.iter().map(|s| (s.h - h0).abs() / h0.abs()).fold(0.0, f64::max)
    }
}

/// Velocity `(h_xi, -h_x)` of eigenvalue `j`; with `phase` also `q = tr(A_sub P) - (i/2) G`.
fn vector_field(sym: &SymbolPair, j: i32, x: &[f64], xi: &[f64], phase: bool) -> Result<(Vec<f64>, Vec<f64>, f64, f64)> {
    let pt = CotangentPoint { x: x.to_vec(), xi: xi.to_vec() };
    let es = principal_eigensystem(sym, &pt)?;
    let pos = es.position(j)?;
    let p = es.projector_at(pos);
    let jet = crate::symbol::jet_for_flow(sym, &pt)?;
    let hx: Vec<f64> = jet.dx.iter().map(|d| trace(&(&p * d)).re).collect();
    let hxi: Vec<f64> = jet.dxi.iter().map(|d| trace(&(&p * d)).re).collect();
    let q = if phase {
        let terms = crate::symbol::terms_for_flow(&es, &jet)?;
        let sub = subprincipal_symbol(sym, &pt)?;
        (trace(&(&sub * &p)) - c(0.0, 0.5) * terms[pos].generalized).re
    } else {
        0.0
    };
    Ok((hxi, hx.into_iter().map(|v| -v).collect(), q, es.value_at(pos)))
}

struct State {
    x: Vec<f64>,
    xi: Vec<f64>,
    phase: f64,
}

fn rk4_step(sym: &SymbolPair, j: i32, s: &State, dt: f64, phase: bool) -> Result<State> {
    let add = |a: &[f64], b: &[f64], h: f64| -> Vec<f64> { a.iter().zip(b).map(|(u, v)| u + h * v).collect() };
    let (k1x, k1p, q1, _) = vector_field(sym, j, &s.x, &s.xi, phase)?;
    let (k2x, k2p, q2, _) = vector_field(sym, j, &add(&s.x, &k1x, dt / 2.0), &add(&s.xi, &k1p, dt / 2.0), phase)?;
    let (k3x, k3p, q3, _) = vector_field(sym, j, &add(&s.x, &k2x, dt / 2.0), &add(&s.xi, &k2p, dt / 2.0), phase)?;
    let (k4x, k4p, q4, _) = vector_field(sym, j, &add(&s.x, &k3x, dt), &add(&s.xi, &k3p, dt), phase)?;
    let comb = |y: &[f64], a: &[f64], b: &[f64], cc: &[f64], d: &[f64]| -> Vec<f64> {
        (0..y.len()).map(|i| y[i] + dt / 6.0 * (a[i] + 2.0 * b[i] + 2.0 * cc[i] + d[i])).collect()
    };
    Ok(State {
        x: comb(&s.x, &k1x, &k2x, &k3x, &k4x),
        xi: comb(&s.xi, &k1p, &k2p, &k3p, &k4p),
        phase: s.phase + dt / 6.0 * (q1 + 2.0 * q2 + 2.0 * q3 + q4),
    })
}

#[derive(Clone, Debug)]
pub struct FlowOptions {
    /// Integrate `q` along the path.
    pub phase: bool,
    /// Multiply the initial eigenvector by `exp(i theta)`.
    pub initial_phase: f64,
}

impl Default for FlowOptions {
    fn default() -> Self {
        Self { phase: true, initial_phase: 0.0 }
    }
}

/// Classical RK4 integration of `x' = h_xi`, `xi' = -h_x` from `(y, eta)` over `[0, t_end]`.
pub fn integrate_trajectory(sym: &SymbolPair, j: i32, y: &[f64], eta: &[f64], t_end: f64, steps: usize) -> Result<Trajectory> {
    integrate_trajectory_with(sym, j, y, eta, t_end, steps, &FlowOptions::default())
}

pub fn integrate_trajectory_with(
    sym: &SymbolPair,
    j: i32,
    y: &[f64],
    eta: &[f64],
    t_end: f64,
    steps: usize,
    opts: &FlowOptions,
) -> Result<Trajectory> {
    if steps == 0 {
        return Err(Error::InvalidArgument("at least one step is required".into()));
    }
    let start = CotangentPoint::new(y.to_vec(), eta.to_vec())?;
    if start.n() != sym.n() {
        return Err(Error::DimensionMismatch(format!("point dimension {} vs symbol dimension {}", start.n(), sym.n())));
    }
    let es = principal_eigensystem(sym, &start)?;
    let mut w = es.v(j)? * crate::linalg::C64::from_polar(1.0, opts.initial_phase);
    let dt = t_end / steps as f64;
    let mut state = State { x: y.to_vec(), xi: eta.to_vec(), phase: 0.0 };
    let mut samples = vec![TrajectorySample { t: 0.0, x: state.x.clone(), xi: state.xi.clone(), h: es.h(j)?, phase: 0.0 }];
    let mut transported = vec![w.clone()];
    for k in 1..=steps {
        state = rk4_step(sym, j, &state, dt, opts.phase)?;
        let pt = CotangentPoint { x: state.x.clone(), xi: state.xi.clone() };
        let es = principal_eigensystem(sym, &pt)?;
        let v = es.v(j)?;
        // projecting onto the new eigenline keeps w* w' = 0 step by step
        let next = projector(&v) * &w;
        let nrm = next.norm();
        if nrm < 1e-8 {
            return Err(Error::ConvergenceFailure);
        }
        w = next / c(nrm, 0.0);
        samples.push(TrajectorySample { t: k as f64 * dt, x: state.x.clone(), xi: state.xi.clone(), h: es.h(j)?, phase: state.phase });
        transported.push(w.clone());
    }
    Ok(Trajectory { j, samples, transported })
}

fn steps_for(t: f64) -> usize {
    ((t.abs() / DEFAULT_DT).ceil() as usize).max(1)
}

/// `u0(t; y, eta) = w(t) w(0)* exp(-i int_0^t q)` along the transported eigenvector.
pub fn propagator_principal_symbol(sym: &SymbolPair, j: i32, t: f64, y: &[f64], eta: &[f64]) -> Result<CMat> {
    propagator_with(sym, j, t, y, eta, steps_for(t), 0.0)
}

/// As [`propagator_principal_symbol`] with an explicit step count and initial gauge phase.
pub fn propagator_with(sym: &SymbolPair, j: i32, t: f64, y: &[f64], eta: &[f64], steps: usize, initial_phase: f64) -> Result<CMat> {
    if t == 0.0 {
        let pt = CotangentPoint::new(y.to_vec(), eta.to_vec())?;
        return principal_eigensystem(sym, &pt)?.projector(j);
    }
    let tr = integrate_trajectory_with(sym, j, y, eta, t, steps, &FlowOptions { phase: true, initial_phase })?;
    let w0 = &tr.transported[0];
    let wt = tr.transported.last().expect("samples");
    Ok(wt * w0.adjoint() * crate::linalg::C64::from_polar(1.0, -tr.last().phase))
}

#[derive(Clone, Debug, Serialize)]
pub struct LoopHit {
    pub direction: Vec<f64>,
    pub t: f64,
    pub distance: f64,
}

/// Returning trajectories found by a forward scan; `lower_bound` is only a scanned candidate.
#[derive(Clone, Debug, Serialize)]
pub struct LoopReport {
    pub base: Vec<f64>,
    pub directions: Vec<Vec<f64>>,
    pub loops: Vec<LoopHit>,
    pub tolerance: f64,
    pub t_max: f64,
    /// Smallest loop time found, or `t_max` when none.
    pub lower_bound: f64,
}

/// Distance on the torus with the given periods.
pub fn torus_distance(a: &[f64], b: &[f64], periods: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .zip(periods)
        .map(|((u, v), p)| {
            let d = (u - v).rem_euclid(*p);
            d.min(p - d).powi(2)
        })
        .sum::<f64>()
        .sqrt()
}

/// Options of [`loop_scan`].
#[derive(Clone, Debug)]
pub struct LoopScanOptions {
    pub periods: Vec<f64>,
    pub tolerance: f64,
    pub dt: f64,
}

impl Default for LoopScanOptions {
    fn default() -> Self {
        Self { periods: vec![2.0 * std::f64::consts::PI; 3], tolerance: 1e-3, dt: 2e-2 }
    }
}

fn state_at(sym: &SymbolPair, j: i32, from: &State, tau: f64) -> Result<State> {
    let n = ((tau.abs() / 1e-2).ceil() as usize).max(1);
    let dt = tau / n as f64;
    let mut s = State { x: from.x.clone(), xi: from.xi.clone(), phase: 0.0 };
    for _ in 0..n {
        s = rk4_step(sym, j, &s, dt, false)?;
    }
    Ok(s)
}

fn scan_direction(sym: &SymbolPair, j: i32, y: &[f64], eta: &[f64], t_max: f64, opts: &LoopScanOptions) -> Result<Vec<LoopHit>> {
    let steps = ((t_max / opts.dt).ceil() as usize).max(2);
    let dt = t_max / steps as f64;
    let mut states = Vec::with_capacity(steps + 1);
    states.push(State { x: y.to_vec(), xi: eta.to_vec(), phase: 0.0 });
    for k in 0..steps {
        let next = rk4_step(sym, j, &states[k], dt, false)?;
        states.push(next);
    }
    let dist: Vec<f64> = states.iter().map(|s| torus_distance(&s.x, y, &opts.periods)).collect();
    let speed = {
        let (v, _, _, _) = vector_field(sym, j, y, eta, false)?;
        v.iter().map(|u| u * u).sum::<f64>().sqrt()
    };
    let mut hits = Vec::new();
    for k in 1..steps {
        if !(dist[k] <= dist[k - 1] && dist[k] <= dist[k + 1]) || dist[k] > 2.0 * speed * dt + opts.tolerance {
            continue;
        }
        // golden-section refinement on [t_{k-1}, t_{k+1}]
        let base = &states[k - 1];
        let f = |tau: f64| -> Result<f64> { Ok(torus_distance(&state_at(sym, j, base, tau)?.x, y, &opts.periods)) };
        let g = 0.5 * (5f64.sqrt() - 1.0);
        let (mut a, mut b) = (0.0, 2.0 * dt);
        let mut c1 = b - g * (b - a);
        let mut c2 = a + g * (b - a);
        let (mut f1, mut f2) = (f(c1)?, f(c2)?);
        for _ in 0..60 {
            if f1 < f2 {
                b = c2;
                c2 = c1;
                f2 = f1;
                c1 = b - g * (b - a);
                f1 = f(c1)?;
            } else {
                a = c1;
                c1 = c2;
                f1 = f2;
                c2 = a + g * (b - a);
                f2 = f(c2)?;
            }
            if b - a < 1e-12 {
                break;
            }
        }
        let tau = 0.5 * (a + b);
        let d = f(tau)?;
        let t = (k - 1) as f64 * dt + tau;
        if d < opts.tolerance && t > 0.5 * dt {
            hits.push(LoopHit { direction: eta.to_vec(), t, distance: d });
        }
    }
    Ok(hits)
}

/// Forward scan (`t > 0`) of the trajectories from `y` in each direction for returns to `y`.
pub fn loop_scan(sym: &SymbolPair, j: i32, y: &[f64], t_max: f64, directions: &[Vec<f64>], opts: &LoopScanOptions) -> Result<LoopReport> {
    if !(t_max > 0.0) {
        return Err(Error::InvalidArgument("scan horizon must be positive".into()));
    }
    let per_dir = directions.par_iter().map(|eta| scan_direction(sym, j, y, eta, t_max, opts)).collect::<Result<Vec<_>>>()?;
    let loops: Vec<LoopHit> = per_dir.into_iter().flatten().collect();
    let lower_bound = loops.iter().map(|l| l.t).fold(t_max, f64::min);
    Ok(LoopReport { base: y.to_vec(), directions: directions.to_vec(), loops, tolerance: opts.tolerance, t_max, lower_bound })
}
