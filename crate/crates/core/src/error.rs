use thiserror::Error;

/// Errors raised by the simulation library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("register state is not normalized (sum of |c|^2 = {0})")]
    NotNormalized(f64),

    #[error("register state has no nonzero amplitude")]
    EmptyState,

    #[error("spectral weight vanishes on every mode; no normalizable distribution")]
    DegenerateWeight,

    #[error("no pairing with residual <= {tol} for m <= {m_max}")]
    NoPairing { m_max: usize, tol: f64 },

    #[error("decode mismatch: pair members of logical qubit {0} disagree with the code")]
    DecodeMismatch(usize),

    #[error("truncation insufficient: top occupation level of mode {mode} holds probability {leakage:e}")]
    TruncationLeakage { mode: usize, leakage: f64 },

    #[error("joint state norm drifted to {0}")]
    NormDrift(f64),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
