use std::fmt;

use thiserror::Error;

/// Why a vector was refused membership in the fixed-point wedge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RejectReason {
    /// Some entry is not strictly positive.
    NotStrictlyPositive,
    /// `(Sf)_i > f_i` beyond tolerance.
    NotSuperharmonic,
}

/// First violated index (zero-based) and the size of the violation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rejection {
    pub index: usize,
    pub violation: f64,
    pub reason: RejectReason,
}

impl fmt::Display for Rejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.reason {
            RejectReason::NotStrictlyPositive => write!(
                f,
                "entry {} is not strictly positive (value {:e})",
                self.index + 1,
                -self.violation
            ),
            RejectReason::NotSuperharmonic => write!(
                f,
                "entry {} violates Sf <= f by {:e}",
                self.index + 1,
                self.violation
            ),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("operands live in different weighted spaces")]
    SpaceMismatch,
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("not in cone: {0}")]
    Rejected(Rejection),
    #[error("certificate was issued for a different operator")]
    OperatorMismatch,
    #[error("operator is stochastic up to tolerance (lambda = {lambda:e}); completion undefined")]
    StochasticOperator { lambda: f64 },
    #[error("numeric overflow: {0}")]
    Overflow(String),
    #[error("spectral radius estimate {rho:e} is not below {bound:e}")]
    SpectralRadius { rho: f64, bound: f64 },
    #[error("convergence failure: {0}")]
    Convergence(String),
    #[error("infimum is not attained (x or y is zero)")]
    InfimumNotAttained,
    #[error("internal consistency check failed: violation {violation:e}")]
    InternalConsistency { violation: f64 },
    #[error("{source_name}:{line}: {message}")]
    Parse {
        source_name: String,
        line: usize,
        message: String,
    },
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
