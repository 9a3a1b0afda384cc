//! Two-term Weyl asymptotics for first-order elliptic systems.
//!
//! The crate is organised bottom-up:
//!
//! * [`symbol`]: matrix symbols, eigen-decompositions, brackets, subprincipal symbols and U(1) curvature.
//! * [`asymptotics`]: the Weyl densities `a(x)`, `b(x)` and their integrals.
//! * [`frame`]: frames, metrics, teleparallel transport and torsion for `m = 2`, `n = 3`.
//! * [`dirac`]: massless Dirac operators built from frames and their characterization.
//! * [`spectrum`]: Fourier–Galerkin eigenvalues on the 3-torus, counting functions and fits.
//! * [`flow`]: Hamiltonian trajectories and the principal symbol of the propagator.

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod dirac;
pub mod error;
pub mod fixtures;
pub mod flow;
pub mod frame;
pub mod linalg;
pub mod operator;
pub mod quadrature;
pub mod spectrum;
pub mod symbol;
pub mod trig;

pub use error::{Error, Result};
pub use frame::FrameBundle;
pub use linalg::{CMat, CVec, C64};
pub use operator::OperatorSpec;
pub use symbol::{CotangentPoint, EigenSystem, SymbolJet, SymbolPair, U1CurvatureData};
pub use trig::TrigPoly;
