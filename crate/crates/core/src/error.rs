use thiserror::Error;

/// Errors raised by the geometric and embedding routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("rank deficient input: vector {index} vanishes after orthogonalization")]
    RankDeficient { index: usize },

    #[error("requested {requested} components but the tangent set has numerical rank {max} (use L <= {max})")]
    Rank { requested: usize, max: usize },

    #[error("projection did not converge after {iterations} iterations (residual {residual:.3e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("constraint jacobian is singular")]
    SingularJacobian,

    #[error("transport step too large: cond(A) = {cond:.3e}{}", segment.map(|s| format!(" on segment {s}")).unwrap_or_default())]
    StepTooLarge { cond: f64, segment: Option<usize> },

    #[error("eigensolver did not converge after {iterations} iterations (residual {residual:.3e})")]
    EigenNonConvergence { iterations: usize, residual: f64 },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("step {index}: {source}")]
    AtStep { index: usize, source: Box<Error> },
}

impl Error {
    pub(crate) fn at_step(self, index: usize) -> Error {
        Error::AtStep {
            index,
            source: Box::new(self),
        }
    }

    /// The innermost error, with step annotations stripped.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtStep { source, .. } => source.root(),
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
