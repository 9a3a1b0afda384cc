use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;
use weyl_core::asymptotics::{a_density_closed, b_density_closed, densities};
use weyl_core::frame::teleparallel_tensors;
use weyl_core::linalg::{norm, pairwise_sum, trace, CMat};
use weyl_core::quadrature::{torus_cell_volume, torus_grid, SphereRule};

use super::{RunConfig, Stats};
use crate::error::CliError;
use crate::output::{float, OutDir};

#[derive(Serialize)]
struct SubprincipalStats {
    /// Largest `|A_sub - (tr A_sub / 2) I|` on the grid.
    max_off_identity: f64,
    trace: Stats,
}

#[derive(Serialize)]
struct Geometry {
    orientation_c: f64,
    periods: [f64; 3],
    grid: usize,
    half_density: bool,
    trace_star_t: Stats,
    subprincipal: SubprincipalStats,
    sqrt_det_g: Stats,
    /// `g^{alpha beta}` at the origin.
    metric_at_origin: [[f64; 3]; 3],
    /// Largest entry of `g^{alpha beta}(x) - g^{alpha beta}(0)` on the grid.
    metric_variation: f64,
}

#[derive(Serialize)]
struct Coefficients {
    a: f64,
    b: f64,
    b_quadrature: f64,
    /// `|b - b_quadrature|`: the closed form against the cosphere quadrature of the general formula.
    b_discrepancy: f64,
    /// Euclidean reference `4 pi / 3` scaled by the torus volume over `(2 pi)^3`.
    a_euclidean: f64,
    grid: usize,
    quadrature: [usize; 2],
}

struct Row {
    x: [f64; 3],
    a: f64,
    b: f64,
    b_closed: f64,
    a_closed: f64,
    tr_star_t: f64,
    sub: CMat,
    sqrt_g: f64,
    g_up: [[f64; 3]; 3],
}

pub fn run(cfg: &RunConfig) -> Result<(), CliError> {
    let spec = cfg.require_spec()?;
    let bundle = spec.bundle()?;
    let op = spec.operator()?;
    let sym = op.to_symbol();
    let rule = SphereRule::new(3, cfg.quadrature.0, cfg.quadrature.1);
    let pts = torus_grid(spec.periods, cfg.grid);
    let rows = pts
        .par_iter()
        .map(|x| {
            let d = densities(&sym, x, &rule)?;
            let sub = op.subprincipal_at(x);
            let fp = bundle.at(x);
            Ok(Row {
                x: *x,
                a: d.a_x,
                b: d.b_x,
                b_closed: b_density_closed(&bundle, &sub, x),
                a_closed: a_density_closed(&bundle, x),
                tr_star_t: teleparallel_tensors(&bundle, x).trace_star_t,
                sub,
                sqrt_g: fp.sqrt_det_g,
                g_up: std::array::from_fn(|i| std::array::from_fn(|j| fp.g_up[(i, j)])),
            })
        })
        .collect::<Result<Vec<Row>, weyl_core::Error>>()?;

    let out = OutDir::create(&cfg.out)?;
    let col = |f: &dyn Fn(&Row) -> f64| rows.iter().map(f).collect::<Vec<f64>>();
    let g0 = rows[0].g_up;
    let metric_variation =
        rows.iter().flat_map(|r| (0..9).map(move |k| (r.g_up[k / 3][k % 3] - g0[k / 3][k % 3]).abs())).fold(0.0, f64::max);
    let geometry = Geometry {
        orientation_c: bundle.c,
        periods: spec.periods,
        grid: cfg.grid,
        half_density: spec.half_density,
        trace_star_t: Stats::of(&col(&|r| r.tr_star_t)),
        subprincipal: SubprincipalStats {
            max_off_identity: rows.iter().map(|r| norm(&(&r.sub - CMat::identity(2, 2) * (trace(&r.sub) * 0.5)))).fold(0.0, f64::max),
            trace: Stats::of(&col(&|r| trace(&r.sub).re)),
        },
        sqrt_det_g: Stats::of(&col(&|r| r.sqrt_g)),
        metric_at_origin: g0,
        metric_variation,
    };
    out.json("geometry.json", &geometry)?;

    out.csv(
        "densities.csv",
        &["x1", "x2", "x3", "a", "b", "b_closed"],
        rows.iter().map(|r| vec![float(r.x[0]), float(r.x[1]), float(r.x[2]), float(r.a), float(r.b), float(r.b_closed)]),
    )?;

    let cell = torus_cell_volume(spec.periods, cfg.grid);
    let b = pairwise_sum(&col(&|r| r.b_closed)) * cell;
    let b_quadrature = pairwise_sum(&col(&|r| r.b)) * cell;
    let coefficients = Coefficients {
        a: pairwise_sum(&col(&|r| r.a_closed)) * cell,
        b,
        b_quadrature,
        b_discrepancy: (b - b_quadrature).abs(),
        a_euclidean: 4.0 * PI / 3.0 * spec.periods.iter().product::<f64>() / (2.0 * PI).powi(3),
        grid: cfg.grid,
        quadrature: [cfg.quadrature.0, cfg.quadrature.1],
    };
    out.json("coefficients.json", &coefficients)?;
    Ok(())
}
