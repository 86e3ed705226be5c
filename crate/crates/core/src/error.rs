use alloc::string::String;

/// Failures reported by the numerical routines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum KreinError {
    #[error("Gamma matrix is numerically singular (condition number {cond:.3e})")]
    SingularGamma { cond: f64 },
    #[error("spectral parameter {lambda} is not admissible: {reason}")]
    InadmissibleLambda { lambda: f64, reason: &'static str },
    #[error("spectral parameters must differ (got {lambda} twice)")]
    EqualSpectralParams { lambda: f64 },
    #[error("inner product is not positive definite: {0}")]
    NotPositiveDefinite(&'static str),
    #[error("grid too coarse or too short: {0}")]
    GridTooCoarse(String),
    #[error("state violates the domain condition (residual {residual:.3e} > {threshold:.3e})")]
    DomainViolation { residual: f64, threshold: f64 },
    #[error("quadrature did not converge (error estimate {estimate:.3e})")]
    QuadratureNotConverged { estimate: f64 },
    #[error("sphere radius {radius} below the minimum {min} for this field")]
    RTooSmall { radius: f64, min: f64 },
    #[error("field is not in the domain of the trace: {0}")]
    NotInDomain(&'static str),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = core::result::Result<T, KreinError>;

pub(crate) fn invalid(msg: impl Into<String>) -> KreinError {
    KreinError::InvalidInput(msg.into())
}
