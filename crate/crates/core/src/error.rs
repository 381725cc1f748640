use thiserror::Error;

/// Errors raised by validation, evaluation, solvers, and time integration.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum VortexError {
    /// Two covering vortices came closer than the collision radius.
    /// `time` is `None` when the offending pair was already present in the
    /// input rather than produced during integration.
    #[error(
        "collision{}: lifted vortices {a} and {b} are {dist:.6e} apart (radius {radius:.6e})",
        time.map(|t| format!(" at t = {t}")).unwrap_or_default()
    )]
    Collision {
        time: Option<f64>,
        a: String,
        b: String,
        dist: f64,
        radius: f64,
    },

    /// Parameters lie outside the operation's domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// Malformed or inconsistent input data.
    #[error("validation error: {0}")]
    Validation(String),

    /// The requested state coincides (numerically) with an excluded
    /// singular point of the reduced system.
    #[error("singular state: {0}")]
    SingularState(String),

    /// An iterative solver exhausted its iteration budget.
    #[error("no convergence after {iterations} iterations (residual {residual:.6e})")]
    Convergence { iterations: usize, residual: f64 },

    /// A Newton iterate left the ordered-position domain of the equatorial
    /// solver.
    #[error("ordering violated at iteration {iteration}: positions must stay strictly increasing inside the chart")]
    OrderingViolation { iteration: usize },

    /// The adaptive step size shrank below the resolvable scale.
    #[error("step size underflow at t = {t} (h = {h:.6e})")]
    StepSizeUnderflow { t: f64, h: f64 },

    /// The integrator exhausted its step budget before reaching the end time.
    #[error("step budget exhausted after {steps} steps at t = {t}")]
    StepBudgetExhausted { steps: usize, t: f64 },

    /// No first return was found within the allotted time span: the orbit is
    /// unbounded or hugs a separatrix.
    #[error("no orbit closure within t_max = {t_max}: near-separatrix or unbounded motion")]
    SeparatrixTimeout { t_max: f64 },
}
