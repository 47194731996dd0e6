use thiserror::Error;

/// Errors raised by body oracles, estimators and constructions.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid body: {0}")]
    InvalidBody(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("linear maximization diverges: the body is unbounded")]
    UnboundedBody,
    #[error("halfspace system is infeasible")]
    Infeasible,
    #[error("linear program is unbounded")]
    Unbounded,
    #[error("{what} did not converge within {steps} steps")]
    ConvergenceFailure { what: &'static str, steps: usize },
    #[error("operation not supported for {0} bodies")]
    Unsupported(&'static str),
    #[error("degenerate body: {0}")]
    DegenerateBody(String),
    #[error("vertex enumeration exceeded the cap of {cap} vertices")]
    VertexEnumerationOverflow { cap: usize },
    #[error("candidate density radius {gamma:.3e} exceeds delta/10 = {limit:.3e}")]
    DensityViolation { gamma: f64, limit: f64 },
    #[error("only {hits} shell samples hit the cap (need at least {required})")]
    InsufficientHits { hits: usize, required: usize },
    #[error("bound violated: {0}")]
    BoundViolation(String),
    #[error("normals do not positively span the space")]
    UnboundedCircumscription,
    #[error("polytope does not contain the body: h_P(u) - h_K(u) = {gap:.3e}")]
    ContainmentViolation { gap: f64 },
    #[error("Hausdorff target {target} not reached after {attempts} attempts (best {best})")]
    RetryExhausted { target: f64, attempts: usize, best: f64 },
    #[error("n = {n} does not exceed the threshold {threshold}")]
    ThresholdNotMet { n: f64, threshold: f64 },
    #[error("parameter l = {l} does not exceed c12bisbis = {threshold}")]
    ParameterBelowThreshold { l: f64, threshold: f64 },
    #[error("index pair ({i}, {j}) outside 1 <= i < j <= {j0}")]
    InvalidIndexPair { i: usize, j: usize, j0: usize },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
