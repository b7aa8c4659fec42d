use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KernelError {
    #[error("angle {x} is outside the guarded kernel domain [{lower}, {upper}]")]
    Domain { x: f64, lower: f64, upper: f64 },
    #[error("derivative order {0} is not supported (expected 1, 2 or 3)")]
    DerivativeOrder(u8),
    #[error("collision guard {0} must lie in (0, π)")]
    InvalidGuard(f64),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("a configuration needs at least 2 angles, got {0}")]
    TooFewAngles(usize),
    #[error("angle {index} is not positive ({value})")]
    NonPositiveAngle { index: usize, value: f64 },
    #[error("angles sum to {0}, expected 2π")]
    SumNotTwoPi(f64),
    #[error("expected {expected} masses, got {actual}")]
    MassCount { expected: usize, actual: usize },
    #[error("mass {index} is not positive ({value})")]
    NonPositiveMass { index: usize, value: f64 },
    #[error("row {row}: partial sum of {terms} angles is {sum}, too close to a collision")]
    PartialSum {
        row: usize,
        terms: usize,
        sum: f64,
        #[source]
        source: KernelError,
    },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RootError {
    #[error("invalid scan interval ({lo}, {hi}) with step {step}")]
    InvalidInterval { lo: f64, hi: f64, step: f64 },
    #[error(
        "third derivative is not positive on the grid (minimum {min_third} at {at}); \
         the scan found {sign_changes} sign change(s)"
    )]
    UncertifiedConvexity {
        min_third: f64,
        at: f64,
        sign_changes: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("Newton iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("iterate left the guarded simplex at iteration {iteration}")]
    DomainEscape { iteration: usize },
    #[error("enumeration supports 2 <= n <= 6, got {0}")]
    UnsupportedSize(usize),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StackingError {
    #[error("invalid insertion: {0}")]
    InvalidSpec(String),
    #[error("stacking search supports 2 <= n <= 6, got {0}")]
    UnsupportedSize(usize),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AlgebraError {
    #[error("polynomial is zero in the eliminated variable")]
    ZeroPolynomial,
    #[error("polynomial degree mismatch: {0}")]
    Degree(String),
    #[error("certificate check failed: {0}")]
    CertificateFailure(String),
}

/// Umbrella error for the command-line and C interfaces.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Root(#[from] RootError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Stacking(#[from] StackingError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}
