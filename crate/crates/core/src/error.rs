use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape error: {0}")]
    Shape(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("singular matrix in {0}")]
    Singular(String),

    #[error("overflow in {0}")]
    Overflow(String),

    #[error("{what} is not {expected} (defect {defect:.3e})")]
    NotInSet {
        what: String,
        expected: &'static str,
        defect: f64,
    },

    #[error("fixed-point iteration did not converge after {iterations} sweeps (last residual {residual:.3e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("stage at vertex '{vertex}' left the manifold (distance {distance:.3e})")]
    LeftManifold { vertex: String, distance: f64 },

    #[error("unknown {kind} '{name}'; valid: {valid}")]
    UnknownName {
        kind: &'static str,
        name: String,
        valid: String,
    },

    #[error("invalid {kind}: {reason}")]
    Invalid { kind: &'static str, reason: String },

    #[error("{0}")]
    Unsupported(String),

    /// Wraps a failure inside a multi-step integration; the message carries
    /// the inner error so it reads in full on its own.
    #[error("step {step}: {error}")]
    AtStep { step: usize, error: Box<Error> },
}

impl Error {
    pub(crate) fn invalid(kind: &'static str, reason: impl Into<String>) -> Self {
        Error::Invalid {
            kind,
            reason: reason.into(),
        }
    }

    pub(crate) fn unknown(kind: &'static str, name: &str, valid: &[&str]) -> Self {
        Error::UnknownName {
            kind,
            name: name.to_string(),
            valid: valid.join(", "),
        }
    }
}
