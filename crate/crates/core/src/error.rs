//! Error type shared across the crate.

pub type Result<T> = std::result::Result<T, Error>;

/// Coarse classification used by callers that map errors to process exit
/// codes: configuration problems, shape problems, state-validation problems,
/// and numerical failures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Config,
    Dimension,
    Validation,
    Numerical,
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {context} (expected {expected}, got {got})")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("subsystem dimensions {dims:?} do not factor a matrix of size {size}")]
    BadSubsystemDims { dims: Vec<usize>, size: usize },

    #[error("matrix is not Hermitian: relative deviation {deviation:.3e} exceeds {tol:.1e}")]
    NotHermitian { deviation: f64, tol: f64 },

    #[error("invalid density matrix: {reason}")]
    InvalidDensity { reason: String },

    #[error("state vector is not normalized: |norm - 1| = {deviation:.3e}")]
    NotNormalized { deviation: f64 },

    #[error("matrix is not positive semidefinite: min eigenvalue {min_eigenvalue:.3e}")]
    NotPsd { min_eigenvalue: f64 },

    #[error("charge family members do not commute: commutator norm {norm:.3e}")]
    NonCommutingFamily { norm: f64 },

    #[error("charge spectrum is not integer-valued: eigenvalue {value} off by {deviation:.3e}")]
    NonIntegerSpectrum { value: f64, deviation: f64 },

    #[error("local charges must be diagonal here: off-diagonal norm {norm:.3e}")]
    NonDiagonalCharge { norm: f64 },

    #[error("Kraus set is not trace preserving: deviation {deviation:.3e}")]
    NotTracePreserving { deviation: f64 },

    #[error("too few samples: need at least {needed}, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("degenerate sample set: variance is zero")]
    DegenerateSamples,

    #[error("non-positive sample beyond tolerance: {value:.3e}")]
    NonPositiveSample { value: f64 },

    #[error("{what} did not converge")]
    NoConvergence { what: &'static str },

    #[error("unknown ensemble kind {kind:?}; registered kinds: {known}")]
    UnknownEnsembleKind { kind: String, known: String },

    #[error("ensemble spec for kind {kind:?} is missing parameter {param:?}")]
    MissingParam { kind: String, param: &'static str },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

impl Error {
    /// Which coarse class this error belongs to.
    pub fn class(&self) -> ErrorClass {
        use Error::*;
        match self {
            UnknownEnsembleKind { .. } | MissingParam { .. } | InvalidConfig(_) => {
                ErrorClass::Config
            }
            DimensionMismatch { .. } | NotSquare { .. } | BadSubsystemDims { .. } => {
                ErrorClass::Dimension
            }
            NotHermitian { .. }
            | InvalidDensity { .. }
            | NotNormalized { .. }
            | NotPsd { .. }
            | NonCommutingFamily { .. }
            | NonIntegerSpectrum { .. }
            | NonDiagonalCharge { .. }
            | NotTracePreserving { .. } => ErrorClass::Validation,
            TooFewSamples { .. }
            | DegenerateSamples
            | NonPositiveSample { .. }
            | NoConvergence { .. } => ErrorClass::Numerical,
        }
    }
}
