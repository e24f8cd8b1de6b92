//! Simulation and control of a radially symmetric, friction-driven
//! tripedal robot.
//!
//! The numeric core is generic over [`Scalar`] (`f32` or `f64`); the
//! `*F64`/`*F32` aliases below fix the precision for callers that do not
//! need the generality.
//!
//! * [`model`]: robot constants, state, gait and wind types.
//! * [`dynamics`]: contact kinematics, normal/friction/drag forces and
//!   integration of the planar equations of motion.
//! * [`ode`]: the embedded Runge-Kutta solver behind [`dynamics::integrate`].
//! * [`gait`]: limb actuation, the six-zone omnidirectional gait and the
//!   alpha-to-heading gait map.
//! * [`control`]: PI path following on top of the gait map.

pub mod control;
pub mod dynamics;
pub mod error;
pub mod gait;
pub mod model;
pub mod ode;
pub mod scalar;

pub use control::{FollowOptions, FollowRun, PIController, Path, PathState};
pub use dynamics::{NormalForces, Sample, StateDerivative, TraceSegment};
pub use error::{Error, Result};
pub use gait::{CanonicalGait, GaitMap, MapBuildOptions};
pub use model::{ContactSet, GaitParams, RobotParams, RobotState, WindField};
pub use ode::SolverOptions;
pub use scalar::Scalar;

pub type RobotParamsF64 = RobotParams<f64>;
pub type RobotStateF64 = RobotState<f64>;
pub type GaitParamsF64 = GaitParams<f64>;
pub type WindFieldF64 = WindField<f64>;
pub type GaitMapF64 = GaitMap<f64>;
pub type PathF64 = Path<f64>;
pub type PIControllerF64 = PIController<f64>;
pub type SolverOptionsF64 = SolverOptions<f64>;

pub type RobotParamsF32 = RobotParams<f32>;
pub type RobotStateF32 = RobotState<f32>;
pub type GaitParamsF32 = GaitParams<f32>;
pub type WindFieldF32 = WindField<f32>;
pub type GaitMapF32 = GaitMap<f32>;
pub type PathF32 = Path<f32>;
pub type PIControllerF32 = PIController<f32>;
pub type SolverOptionsF32 = SolverOptions<f32>;
