use thiserror::Error;

/// Errors raised by the symbol calculus, the geometric layer and the spectral solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("eigenvalues too close: relative gap {gap:.3e} below {tol:.1e}")]
    DegenerateEigenvalue { gap: f64, tol: f64 },

    #[error("ellipticity violated: eigenvalue {value:.3e} is numerically zero")]
    EllipticityViolated { value: f64 },

    #[error("finite-difference step {step:.3e} is below the noise floor")]
    StepUnderflow { step: f64 },

    #[error("matrix is not Hermitian (anti-Hermitian part {residual:.3e})")]
    NotHermitian { residual: f64 },

    #[error("matrix is not unitary (residual {residual:.3e})")]
    NotUnitary { residual: f64 },

    #[error("matrix is not special unitary (residual {residual:.3e})")]
    NotSpecialUnitary { residual: f64 },

    #[error("principal symbol is not trace-free (trace {trace:.3e})")]
    NotTraceFree { trace: f64 },

    #[error("quadratic form is not positive definite")]
    NotPositiveDefinite,

    #[error("frame vectors are linearly dependent (det {det:.3e})")]
    LinearlyDependentFrame { det: f64 },

    #[error("frame is not orthonormal (residual {residual:.3e})")]
    NotOrthonormal { residual: f64 },

    #[error("orientation definitions disagree: {from_symbol:.6} vs {from_frame}")]
    InconsistentOrientation { from_symbol: f64, from_frame: f64 },

    #[error("singular transport system (condition number {condition:.3e})")]
    SingularSystem { condition: f64 },

    #[error("assumption {which} violated: {detail}")]
    AssumptionViolated { which: u8, detail: String },

    #[error("truncation K={k} is smaller than the coefficient harmonic {needed}")]
    TruncationTooSmall { k: usize, needed: usize },

    #[error("dense Galerkin path is capped at K={cap}, requested K={k}")]
    TruncationTooLarge { k: usize, cap: usize },

    #[error("coefficient field is not a trigonometric polynomial: {0}")]
    NonPolynomialCoefficient(String),

    #[error("operator is not formally self-adjoint (residual {residual:.3e})")]
    NotSelfAdjoint { residual: f64 },

    #[error("eigensolver failed to converge")]
    ConvergenceFailure,

    #[error("spectral parameter {lambda} outside trust window {window}")]
    OutsideTrustWindow { lambda: f64, window: f64 },

    #[error("operator family not supported by the exact oracle: {0}")]
    UnsupportedFamily(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
