use alloc::boxed::Box;
use alloc::string::String;

/// Errors raised by the solver and its building blocks.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("unsupported strain derivative order {0} (expected 1, 2 or 3)")]
    UnsupportedOrder(u8),

    /// The tangent compliance `f'(sigma)` is not strictly positive, so the
    /// stress equation is no longer hyperbolic.
    #[error("hyperbolicity lost: f'({sigma}) = {slope}{}", location(*.x))]
    HyperbolicityLost { sigma: f64, slope: f64, x: Option<f64> },

    #[error("zero pivot in banded factorization at row {0}")]
    SingularMatrix(usize),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("dirichlet constraint on interior dof {0}")]
    InteriorConstraint(usize),

    #[error("newton iteration did not converge in {iterations} iterations at t = {time} (residual {residual:e}, reference {reference:e})")]
    NewtonDiverged {
        time: f64,
        iterations: usize,
        residual: f64,
        reference: f64,
    },

    #[error("step to t = {time} failed: {source}")]
    StepFailed {
        time: f64,
        #[source]
        source: Box<Error>,
    },
}

fn location(x: Option<f64>) -> String {
    match x {
        Some(x) => alloc::format!(" at x = {x}"),
        None => String::new(),
    }
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    /// Attach a spatial location to a hyperbolicity failure.
    pub(crate) fn at_position(self, pos: f64) -> Self {
        match self {
            Error::HyperbolicityLost { sigma, slope, .. } => Error::HyperbolicityLost {
                sigma,
                slope,
                x: Some(pos),
            },
            other => other,
        }
    }

    /// The innermost error, unwrapping step context.
    pub fn root(&self) -> &Error {
        match self {
            Error::StepFailed { source, .. } => source.root(),
            other => other,
        }
    }
}
