use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter set violates one of its invariants; the payload names it.
    #[error("invalid parameters: {0}")]
    InvalidParams(&'static str),

    #[error("invalid gait: {0}")]
    InvalidGait(&'static str),

    #[error("invalid path: {0}")]
    InvalidPath(&'static str),

    #[error("invalid controller: {0}")]
    InvalidController(&'static str),

    /// The three contacts are (nearly) collinear so the normal loads are undetermined.
    #[error("contact configuration is degenerate (condition number {condition:e})")]
    ContactDegenerate { condition: f64 },

    #[error("integrator step size underflow at t = {t} s (h = {step:e} s)")]
    StepFailure { t: f64, step: f64 },

    #[error("gait map is not strictly monotone for mu = {mu} between alpha = {alpha_lo} and {alpha_hi} deg")]
    MapNotMonotone { mu: f64, alpha_lo: f64, alpha_hi: f64 },

    #[error("gait map orientation check failed: {0}")]
    MapOrientation(String),

    #[error("target coincides with the robot position")]
    TargetCoincident,

    #[error("path segment {0} has coincident endpoints")]
    DegenerateSegment(usize),

    #[error("final waypoint captured")]
    PathComplete,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
