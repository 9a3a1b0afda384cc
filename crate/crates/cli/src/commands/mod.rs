mod analyze;
mod example;
mod spectrum;
mod verify;

use std::path::PathBuf;

use serde::Serialize;
use weyl_core::linalg::{max_abs, CMat};
use weyl_core::spectrum::OracleFamily;
use weyl_core::OperatorSpec;

use crate::config::{FrameInput, InputSpec};
use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Auto,
    Oracle,
    Galerkin,
}

/// Everything a command needs, after merging flags with the input document.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub command: &'static str,
    pub spec: Option<InputSpec>,
    pub k: Option<usize>,
    pub lambda_max: Option<f64>,
    pub mollifier_t: f64,
    pub quadrature: (usize, usize),
    pub workers: usize,
    pub mode: Mode,
    pub grid: usize,
    pub samples: usize,
    pub asymmetry: bool,
    pub out: PathBuf,
}

impl RunConfig {
    pub fn require_spec(&self) -> Result<&InputSpec, CliError> {
        self.spec.as_ref().ok_or_else(|| CliError::Input(format!("{} needs --input or --preset", self.command)))
    }
}

pub fn dispatch(cfg: &RunConfig) -> Result<(), CliError> {
    match cfg.command {
        "analyze" => analyze::run(cfg),
        "spectrum" => spectrum::run(cfg),
        "verify" => verify::run(cfg),
        _ => example::run(cfg),
    }
}

/// The exactly solvable family matching the input, if there is one.
pub fn oracle_family(spec: &InputSpec, op: &OperatorSpec) -> Option<OracleFamily> {
    let a0 = spec.constant_potential()?;
    match spec.frame {
        FrameInput::K3(k) if k != 0 => {
            // the separation needs a real diagonal constant potential
            let off = a0[(0, 1)].norm().max(a0[(1, 0)].norm()).max(a0[(0, 0)].im.abs()).max(a0[(1, 1)].im.abs());
            (off == 0.0).then(|| OracleFamily::K3Frame { k, d: [a0[(0, 0)].re, a0[(1, 1)].re] })
        }
        _ if spec.constant_frame() && op.is_polynomial() => {
            let b: [CMat; 3] = std::array::from_fn(|a| op.derivative_coeffs[a].eval(&[0.0; 3]));
            let zero = op.zero_order.eval(&[0.0; 3]);
            (max_abs(&(&zero - zero.adjoint())) == 0.0).then_some(OracleFamily::ConstantCoefficient { b, a0: zero, periods: spec.periods })
        }
        _ => None,
    }
}

#[derive(Serialize)]
pub struct Stats {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
}

impl Stats {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len().max(1) as f64;
        Self {
            min: values.iter().copied().fold(f64::INFINITY, f64::min),
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            mean: weyl_core::linalg::pairwise_sum(values) / n,
        }
    }
}
