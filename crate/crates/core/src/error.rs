use thiserror::Error;

/// Errors raised by the numerics, network, initializer, training and data layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch in {op}: {lhs:?} vs {rhs:?}")]
    Shape {
        op: &'static str,
        lhs: (usize, usize),
        rhs: (usize, usize),
    },

    #[error("svd did not converge after {sweeps} sweeps")]
    NoConvergence { sweeps: usize },

    #[error("non-finite value produced by {0}")]
    NonFinite(&'static str),

    #[error("pre-activation of layer {layer} has zero variance")]
    ZeroVariance { layer: usize },

    #[error("objective diverged at epoch {epoch}")]
    Diverged { epoch: usize },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("data error{}: {message}", line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    Data { line: Option<u64>, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub(crate) fn data(line: Option<u64>, msg: impl Into<String>) -> Self {
        Error::Data {
            line,
            message: msg.into(),
        }
    }

    /// True for failures of the numeric kind (convergence, overflow, degenerate statistics).
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::NoConvergence { .. } | Error::NonFinite(_) | Error::ZeroVariance { .. } | Error::Diverged { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
