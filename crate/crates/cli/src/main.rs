mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::commands::{Mode, RunConfig};
use crate::error::CliError;

#[derive(Parser)]
#[command(name = "weyl", version, about = "Weyl coefficients, spectra and identity checks for Dirac-type operators on the 3-torus")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Geometry, densities a(x), b(x) and global coefficients.
    Analyze(Common),
    /// Eigenvalues, counting function and two-term fit.
    Spectrum(Common),
    /// Identity suite with pass/fail per check.
    Verify(Common),
    /// The twisted-frame example: half-integer eigenvalues.
    #[command(name = "example-k3")]
    ExampleK3(Common),
}

#[derive(Args, Clone)]
struct Common {
    /// Operator specification (JSON).
    #[arg(long)]
    input: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Galerkin truncation (modes per axis up to |kappa| <= K).
    #[arg(short = 'K')]
    k: Option<usize>,
    #[arg(long = "lambda-max")]
    lambda_max: Option<f64>,
    #[arg(long = "mollifier-T")]
    mollifier_t: Option<f64>,
    /// Worker threads; results do not depend on this.
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Built-in operator, e.g. k3=1.
    #[arg(long, value_parser = config::parse_preset)]
    preset: Option<i32>,
    #[arg(long, conflicts_with = "galerkin")]
    oracle: bool,
    #[arg(long)]
    galerkin: bool,
    /// Grid points per axis for densities and checks.
    #[arg(long, default_value_t = 4)]
    grid: usize,
    /// Number of lambda samples in the fit range.
    #[arg(long, default_value_t = 101)]
    samples: usize,
    /// Also write asymmetry.csv.
    #[arg(long)]
    asymmetry: bool,
}

impl Common {
    fn resolve(&self, command: &'static str) -> Result<RunConfig, CliError> {
        let spec = match (&self.input, self.preset) {
            (Some(_), Some(_)) => return Err(CliError::Input("give either --input or --preset, not both".into())),
            (Some(p), None) => {
                let text = std::fs::read_to_string(p).map_err(|e| CliError::Input(format!("cannot read {}: {e}", p.display())))?;
                Some(config::InputSpec::parse(&text)?)
            }
            (None, Some(k)) => Some(config::InputSpec::k3_preset(k)),
            (None, None) => None,
        };
        let mode = match (self.oracle, self.galerkin) {
            (true, _) => Mode::Oracle,
            (_, true) => Mode::Galerkin,
            _ => Mode::Auto,
        };
        if self.workers == 0 || self.grid == 0 || self.samples < 4 {
            return Err(CliError::Input("--workers and --grid must be positive, --samples at least 4".into()));
        }
        if let Some(t) = self.mollifier_t.filter(|t| t.is_nan() || *t <= 0.0) {
            return Err(CliError::Input(format!("--mollifier-T must be positive, got {t}")));
        }
        if let Some(l) = self.lambda_max.filter(|l| l.is_nan() || *l <= 0.0) {
            return Err(CliError::Input(format!("--lambda-max must be positive, got {l}")));
        }
        if self.k == Some(0) {
            return Err(CliError::Input("-K must be at least 1".into()));
        }
        let k = self.k.or(spec.as_ref().and_then(|s| s.truncation));
        let mollifier_t = self.mollifier_t.or(spec.as_ref().and_then(|s| s.mollifier_t)).unwrap_or(6.0);
        let quadrature = spec.as_ref().and_then(|s| s.quadrature).unwrap_or((16, 32));
        Ok(RunConfig {
            command,
            spec,
            k,
            lambda_max: self.lambda_max,
            mollifier_t,
            quadrature,
            workers: self.workers,
            mode,
            grid: self.grid,
            samples: self.samples,
            asymmetry: self.asymmetry,
            out: self.out.clone(),
        })
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (name, common) = match &cli.command {
        Command::Analyze(c) => ("analyze", c),
        Command::Spectrum(c) => ("spectrum", c),
        Command::Verify(c) => ("verify", c),
        Command::ExampleK3(c) => ("example-k3", c),
    };
    let cfg = common.resolve(name)?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(cfg.workers).build().map_err(|e| CliError::Input(e.to_string()))?;
    pool.install(|| commands::dispatch(&cfg))
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("weyl: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
