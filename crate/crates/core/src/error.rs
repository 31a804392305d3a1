//! Error type shared by all modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid chain parameters: {0}")]
    InvalidParams(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("unknown subsystem tag `{0}`")]
    UnknownTag(String),

    #[error("excitation count {0} not supported (only 1 or 2)")]
    UnsupportedSector(usize),

    #[error("site index {site} out of range for chain of length {length}")]
    SiteOutOfRange { site: usize, length: usize },

    #[error("closed form is singular at D = 0; use the dense path instead")]
    DegenerateDm,

    #[error("Bethe root iteration did not converge for (I1, I2) = ({i1}, {i2}); residual {residual:.3e} (likely a bound-state pair outside the real-k ansatz)")]
    NonConvergence { i1: i64, i2: i64, residual: f64 },

    #[error("Bethe method requires J2 = 0, got J2 = {0}")]
    BetheUnavailable(f64),

    #[error("density matrix is not a valid state: {0}")]
    InvalidState(String),

    #[error("empty dataset")]
    EmptyDataset,

    #[error("malformed model file: {0}")]
    MalformedModel(String),

    #[error("model file version {got} not supported (expected {expected})")]
    ModelVersion { expected: u32, got: u32 },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
