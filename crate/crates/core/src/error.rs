use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch in {op}: {left:?} vs {right:?}")]
    DimensionMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("{op} requires a square matrix, got {rows}x{cols}")]
    NonSquare {
        op: &'static str,
        rows: usize,
        cols: usize,
    },

    #[error("matrix is not in the complex-adjoint image (max deviation {deviation:e})")]
    NotInChiImage { deviation: f64 },

    #[error("matrix is not hermitian (max |M - M^dagger| entry {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("generator is not anti-hermitian (max |H + H^dagger| entry {deviation:e})")]
    NotAntiHermitian { deviation: f64 },

    #[error("eigenvalues of the complex adjoint do not pair up (gap {gap:e} at index {index})")]
    PairingFailure { index: usize, gap: f64 },

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("trace is not one (Re Tr = {trace}, deviation {deviation:e})")]
    TraceNotOne { trace: f64, deviation: f64 },

    #[error("vectors are not orthogonal (|<u|v>| = {overlap:e})")]
    NotOrthogonal { overlap: f64 },

    #[error("target rank {requested} out of range: rank {m} admits {min}..={m}")]
    RankOutOfRange { m: usize, requested: usize, min: usize },

    #[error("rank-one complex density has no quaternionic lift of lower rank (needs rank > 1)")]
    RankOne,

    #[error("rank {rank} complex density cannot be the projection of a pure quaternionic state (needs rank <= 2)")]
    NotPurifiable { rank: usize },

    #[error("propagator is not unitary (max |U^dagger U - I| entry {deviation:e})")]
    NotUnitary { deviation: f64 },

    #[error("integration drift {correction:e} at step {step} exceeds {limit:e}")]
    DriftExceeded {
        step: usize,
        correction: f64,
        limit: f64,
    },

    #[error("no partition-breaking witness found in {attempts} attempts")]
    WitnessNotFound { attempts: usize },

    #[error("state is not normalized (squared norm {norm_sqr})")]
    NotNormalized { norm_sqr: f64 },

    #[error("projector family is invalid: {reason} (deviation {deviation:e})")]
    InvalidProjectorFamily { reason: &'static str, deviation: f64 },

    #[error("proposition {proposition} violated in trial {trial} (seed {seed}): {detail}")]
    PropositionViolated {
        proposition: u8,
        trial: usize,
        seed: u64,
        detail: String,
    },

    #[error("schema error at '{pointer}': {message}")]
    Schema { pointer: String, message: String },

    #[error("{0}")]
    InvalidArgument(String),
}
