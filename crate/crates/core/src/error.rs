use thiserror::Error;

/// Errors produced by constructors, samplers and counting kernels.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix entry ({row},{col}) breaks symmetry by {delta:e} (tolerance {tol:e})")]
    NotSymmetric {
        row: usize,
        col: usize,
        delta: f64,
        tol: f64,
    },

    #[error("form is degenerate: eigenvalue {value:e} below threshold {threshold:e}")]
    DegenerateForm { value: f64, threshold: f64 },

    #[error("signature ({p},{q}) is invalid: {reason}")]
    BadSignature {
        p: usize,
        q: usize,
        reason: &'static str,
    },

    #[error("form of signature ({p},{q}) is definite; an indefinite form is required")]
    DefiniteForm { p: usize, q: usize },

    #[error("matrix is singular (|det| = {det:e})")]
    SingularMatrix { det: f64 },

    #[error("matrix is not unimodular (det = {det})")]
    NotUnimodular { det: f64 },

    #[error("modulus {q} rejected: need a prime q >= 101")]
    BadModulus { q: u64 },

    #[error("sampler failed to produce a usable draw after {retries} retries")]
    SamplerExhausted { retries: usize },

    #[error("enumeration infeasible: {0}")]
    Infeasible(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
