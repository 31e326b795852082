//! Error type shared across the crate.

/// Errors produced by shape validation, solvers, and differentiation.
#[derive(thiserror::Error, Debug)]
pub enum Error {
    /// Two bodies (or a body and a point) live in different dimensions.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// A shape violates its own invariants (non-positive radius, unbounded
    /// polytope, ...).
    #[error("invalid shape: {0}")]
    InvalidShape(String),

    /// A pose violates its invariants (non-unit quaternion, non-finite entry).
    #[error("invalid pose: {0}")]
    InvalidPose(String),

    /// A Hessian was requested for a shape whose scaling function is not
    /// twice differentiable (capsule, polytope).
    #[error("Hessian unavailable for {shape}: scaling function is not smooth")]
    UnsupportedOrder { shape: &'static str },

    /// The requested solve/differentiation method does not apply to this
    /// shape pair.
    #[error("method `{method}` unsupported here: {reason}")]
    UnsupportedMethod {
        method: &'static str,
        reason: String,
    },

    /// The linearized KKT system is numerically singular (degenerate
    /// contact); carries a condition-number estimate.
    #[error("singular KKT system (condition estimate {cond:.3e})")]
    SingularKkt { cond: f64 },

    /// An iterative solver broke down in a way that is not representable as
    /// a status (NaN residuals, empty problem, ...).
    #[error("solver failure: {0}")]
    SolverFailure(String),

    /// The QP constraint set admits no feasible point; carries per-row
    /// margins `a_i^T u - b_i` at the last iterate.
    #[error("infeasible constraint set ({} rows)", margins.len())]
    QpInfeasible { margins: Vec<f64> },

    /// A scenario or pair configuration failed validation.
    #[error("invalid config: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
