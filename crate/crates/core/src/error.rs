use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum NogpError {
    #[error("matrix is not Hermitian (residual {residual:.3e} > {tol:.3e})")]
    NonHermitianInput { residual: f64, tol: f64 },

    #[error("Hamiltonian sample at t = {time} is not Hermitian (residual {residual:.3e})")]
    NonHermitianSample { time: f64, residual: f64 },

    #[error("matrix is not unitary (residual {residual:.3e} > {tol:.3e})")]
    NotUnitary { residual: f64, tol: f64 },

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("empty matrix")]
    EmptyMatrix,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("grid too coarse: need at least {needed} samples, got {got}")]
    GridTooCoarse { needed: usize, got: usize },

    #[error(
        "ambiguous eigenvalue clustering: chain spans {span:.3e} with cluster tolerance {tol:.3e}"
    )]
    DegenerateClustering { span: f64, tol: f64 },

    #[error("observable evolution is not cyclic (residual {residual:.3e} > {threshold:.3e})")]
    NotCyclic { residual: f64, threshold: f64 },

    #[error("subspace is not mapped onto itself after one period (residual {residual:.3e})")]
    NotCyclicSubspace { residual: f64 },

    #[error("loop basis is not closed (end-point mismatch {mismatch:.3e})")]
    NotClosed { mismatch: f64 },

    #[error("base curve is not closed: L(0)^-1 L(T) leaves the gauge group")]
    NotClosedBase,

    #[error("{path}: {message}")]
    Io { path: String, message: String },

    #[error("cannot parse {what}: {message}")]
    Parse { what: String, message: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("xi error bound {err_bound:.3e} exceeds tolerance {tol:.3e} at {panels} panels")]
    ToleranceNotMet {
        err_bound: f64,
        tol: f64,
        panels: usize,
    },
}

pub type Result<T, E = NogpError> = std::result::Result<T, E>;
