use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("mean direction undefined (zero mean vector); use the isotropic covariance I/M")]
    ZeroMean,

    #[error("invalid covariance: {0}")]
    InvalidCovariance(String),

    #[error("deterministic channel (alpha = 0): ordering trivial")]
    DeterministicChannel,

    #[error("comparison requires a matched first-eigenvalue weight (k1 = {k1:e}, k2 = {k2:e})")]
    UnmatchedComparison { k1: f64, k2: f64 },

    #[error("instance belongs to the optimal family: basis column {column} is aligned with the mean")]
    AlignedBasis { column: usize },

    #[error("quadrature did not converge: achieved {achieved:e}, requested {requested:e}")]
    Quadrature { achieved: f64, requested: f64 },

    #[error("beamforming optimal (or suboptimal) throughout bracket: f({lo}) = {f_lo:e}, f({hi}) = {f_hi:e}")]
    NoSignChange { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    #[error("config: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
