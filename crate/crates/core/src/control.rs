//! Per-cycle path-following loop: heading to the current target, signed
//! cross-track error, discrete PI correction and gait selection.
//!
//! Errors are in centimetres and angles in degrees, matching the units of
//! the controller gains.

use serde::{Deserialize, Serialize};

use crate::dynamics::{integrate, Sample};
use crate::error::{Error, Result};
use crate::gait::GaitMap;
use crate::model::{GaitParams, RobotParams, RobotState, WindField};
use crate::ode::SolverOptions;
use crate::scalar::{cross, wrap_deg, Scalar};

/// Waypoint list followed segment by segment. The robot starts at the first
/// waypoint; a closed path returns to it at the end.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Path<T> {
    /// m
    pub waypoints: Vec<[T; 2]>,
    /// m
    pub capture_radius: T,
    pub closed: bool,
}

impl<T: Scalar> Path<T> {
    pub const DEFAULT_CAPTURE_RADIUS: f64 = 0.02;

    pub fn new(waypoints: Vec<[T; 2]>, closed: bool) -> Self {
        Self { waypoints, capture_radius: T::lit(Self::DEFAULT_CAPTURE_RADIUS), closed }
    }

    /// Axis-aligned rectangle traversed counterclockwise from `origin`.
    pub fn rectangle(origin: [T; 2], width: T, height: T) -> Self {
        let [x, y] = origin;
        Self::new(vec![[x, y], [x + width, y], [x + width, y + height], [x, y + height]], true)
    }

    pub fn validate(&self) -> Result<()> {
        if self.waypoints.len() < 2 {
            return Err(Error::InvalidPath("fewer than two waypoints"));
        }
        if !self.waypoints.iter().flatten().all(|v| v.is_finite()) {
            return Err(Error::InvalidPath("non-finite waypoint"));
        }
        if !(self.capture_radius > T::zero()) {
            return Err(Error::InvalidPath("non-positive capture radius"));
        }
        Ok(())
    }

    pub fn segment_count(&self) -> usize {
        if self.closed {
            self.waypoints.len()
        } else {
            self.waypoints.len() - 1
        }
    }

    /// Start and end of segment `k`.
    pub fn segment(&self, k: usize) -> ([T; 2], [T; 2]) {
        let n = self.waypoints.len();
        (self.waypoints[k % n], self.waypoints[(k + 1) % n])
    }

    /// Target waypoint of segment `k`.
    pub fn target(&self, k: usize) -> [T; 2] {
        self.segment(k).1
    }
}

/// Progress along a [`Path`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PathState {
    pub segment: usize,
    /// The current target was reached since the last control step.
    pub captured: bool,
}

impl PathState {
    /// Latches a capture if `position` is within the capture radius of the
    /// current target. Returns whether the target is (now) captured.
    pub fn observe<T: Scalar>(&mut self, path: &Path<T>, position: [T; 2]) -> bool {
        if !self.captured && self.segment < path.segment_count() {
            let t = path.target(self.segment);
            self.captured = (position[0] - t[0]).hypot(position[1] - t[1]) < path.capture_radius;
        }
        self.captured
    }

    pub fn is_complete<T>(&self, path: &Path<T>) -> bool
    where
        T: Scalar,
    {
        self.segment >= path.segment_count()
    }
}

/// Discrete PI law `theta_PI = theta_D - (K_P e + K_I sum(e T_s))` with the
/// integral contribution clamped to `windup_limit`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PIController<T> {
    /// deg/cm
    pub kp: T,
    /// deg/(cm s)
    pub ki: T,
    /// Update period, s.
    pub ts: T,
    /// Running sum of `e T_s`, cm s.
    pub integral_accum: T,
    /// deg
    pub windup_limit: T,
}

impl<T: Scalar> Default for PIController<T> {
    fn default() -> Self {
        Self::new(T::lit(15.0), T::one())
    }
}

impl<T: Scalar> PIController<T> {
    pub fn new(kp: T, ki: T) -> Self {
        Self { kp, ki, ts: T::one(), integral_accum: T::zero(), windup_limit: T::lit(60.0) }
    }

    /// Feed-forward only: the heading to the target is used unmodified.
    pub fn disabled() -> Self {
        Self::new(T::zero(), T::zero())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.ts.is_finite() && self.ts > T::zero()) {
            return Err(Error::InvalidController("non-positive sample period"));
        }
        if !(self.kp.is_finite() && self.ki.is_finite()) {
            return Err(Error::InvalidController("non-finite gain"));
        }
        if !(self.windup_limit >= T::zero()) {
            return Err(Error::InvalidController("negative windup limit"));
        }
        Ok(())
    }

    /// Current integral contribution, deg.
    pub fn integral_term(&self) -> T {
        self.ki * self.integral_accum
    }

    /// One controller update. Positive error (robot left of the path) turns
    /// the commanded heading clockwise, towards the path.
    pub fn update(mut self, e_cm: T, theta_d: T) -> (T, Self) {
        self.integral_accum = self.integral_accum + e_cm * self.ts;
        if self.ki != T::zero() {
            let max_accum = self.windup_limit / self.ki.abs();
            self.integral_accum = self.integral_accum.max(-max_accum).min(max_accum);
        }
        let correction = self.kp * e_cm + self.integral_term();
        (wrap_deg(theta_d - correction), self)
    }

    pub fn reset(&mut self) {
        self.integral_accum = T::zero();
    }
}

/// Functional form of [`PIController::update`].
pub fn pi_update<T: Scalar>(ctrl: PIController<T>, e_cm: T, theta_d: T) -> (T, PIController<T>) {
    ctrl.update(e_cm, theta_d)
}

/// Body-frame heading from the robot to `target`, deg in `(0, 360]`.
pub fn desired_heading<T: Scalar>(state: &RobotState<T>, target: [T; 2]) -> Result<T> {
    let dx = target[0] - state.x;
    let dy = target[1] - state.y;
    if dx.hypot(dy) < T::lit(1e-9) {
        return Err(Error::TargetCoincident);
    }
    Ok(wrap_deg(dy.atan2(dx).to_degrees() - state.xi.to_degrees()))
}

/// Signed distance from `position` to the line through segment `k`, cm.
/// Positive to the left of the directed segment.
pub fn path_error<T: Scalar>(path: &Path<T>, k: usize, position: [T; 2]) -> Result<T> {
    let (a, b) = path.segment(k);
    let d = [b[0] - a[0], b[1] - a[1]];
    let len = d[0].hypot(d[1]);
    if len == T::zero() {
        return Err(Error::DegenerateSegment(k));
    }
    let r = [position[0] - a[0], position[1] - a[1]];
    Ok(cross(d, r) / len * T::lit(100.0))
}

/// Everything a control step decided, for logging.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlOutput<T> {
    pub gait: GaitParams<T>,
    /// Segment being followed after any waypoint advance.
    pub segment: usize,
    /// cm
    pub error: T,
    /// deg
    pub theta_d: T,
    /// deg
    pub theta_pi: T,
    pub zone: u8,
    /// deg
    pub alpha: T,
    pub clamped: bool,
}

/// One pass of the feedback pipeline, run once per gait cycle.
///
/// Advances to the next waypoint (clearing the integral) when the current
/// one has been captured, then computes the target heading, cross-track
/// error and PI correction and selects a gait. `heading_bias` (deg) is added
/// to the heading handed to gait selection and models a systematic
/// actuation drift.
pub fn control_step<T: Scalar>(
    robot: &RobotState<T>,
    path: &Path<T>,
    mut progress: PathState,
    mut ctrl: PIController<T>,
    map: &GaitMap<T>,
    heading_bias: T,
) -> Result<(ControlOutput<T>, PathState, PIController<T>)> {
    if progress.is_complete(path) {
        return Err(Error::PathComplete);
    }
    if progress.observe(path, robot.position()) {
        progress.segment += 1;
        progress.captured = false;
        ctrl.reset();
        if progress.is_complete(path) {
            return Err(Error::PathComplete);
        }
    }
    let k = progress.segment;
    let theta_d = desired_heading(robot, path.target(k))?;
    let error = path_error(path, k, robot.position())?;
    let (theta_pi, ctrl) = ctrl.update(error, theta_d);
    let sel = map.select(theta_pi + heading_bias);
    let out = ControlOutput {
        gait: sel.gait,
        segment: k,
        error,
        theta_d,
        theta_pi,
        zone: sel.zone,
        alpha: sel.alpha,
        clamped: sel.clamped,
    };
    Ok((out, progress, ctrl))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FollowOptions<T> {
    pub max_cycles: usize,
    /// deg, see [`control_step`].
    pub heading_bias: T,
    pub solver: SolverOptions<T>,
}

impl<T: Scalar> Default for FollowOptions<T> {
    fn default() -> Self {
        Self { max_cycles: 400, heading_bias: T::zero(), solver: SolverOptions::default() }
    }
}

/// Controller decision and outcome of one gait cycle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CycleRecord<T> {
    /// Cycle index, 0-based.
    pub k: usize,
    pub start: RobotState<T>,
    pub output: ControlOutput<T>,
}

/// A closed-loop run.
#[derive(Debug, Clone, PartialEq)]
pub struct FollowRun<T> {
    pub cycles: Vec<CycleRecord<T>>,
    /// Output samples tagged with their cycle. The sample at a cycle
    /// boundary is stored once and belongs to the cycle it starts. Recording
    /// stops at the capture of the final waypoint.
    pub samples: Vec<(usize, Sample<T>)>,
    /// Time at which the final waypoint was captured, s.
    pub completion_time: Option<T>,
    /// State at completion, or at the end of the last cycle.
    pub final_state: RobotState<T>,
}

impl<T: Scalar> FollowRun<T> {
    /// Sum of `|e|` over control cycles, m.
    pub fn cumulative_error(&self) -> T {
        self.cycles.iter().fold(T::zero(), |a, c| a + c.output.error.abs()) / T::lit(100.0)
    }

    pub fn max_abs_error(&self) -> T {
        self.cycles.iter().fold(T::zero(), |a, c| a.max(c.output.error.abs())) / T::lit(100.0)
    }
}

/// Closed-loop path following: one control step per gait cycle, the chosen
/// gait held for the whole cycle. Waypoint captures are checked at every
/// output sample so a target passed mid-cycle still counts.
#[allow(clippy::too_many_arguments)]
pub fn follow_path<T: Scalar>(
    start: &RobotState<T>,
    params: &RobotParams<T>,
    map: &GaitMap<T>,
    path: &Path<T>,
    controller: PIController<T>,
    wind: Option<&WindField<T>>,
    opts: &FollowOptions<T>,
) -> Result<FollowRun<T>> {
    path.validate()?;
    controller.validate()?;
    let mut state = *start;
    let mut progress = PathState::default();
    let mut ctrl = controller;
    let mut cycles = Vec::new();
    let mut samples: Vec<(usize, Sample<T>)> = Vec::new();
    let mut completion_time = None;

    for k in 0..opts.max_cycles {
        let (output, next_progress, next_ctrl) =
            match control_step(&state, path, progress, ctrl, map, opts.heading_bias) {
                Ok(v) => v,
                Err(Error::PathComplete) => break,
                Err(e) => return Err(e),
            };
        progress = next_progress;
        ctrl = next_ctrl;
        cycles.push(CycleRecord { k, start: state, output });

        let seg = integrate(&state, &output.gait, wind, params, output.gait.period(), &opts.solver)?;
        let mut new_samples = seg.samples.iter();
        // The boundary sample closes the previous cycle and opens this one.
        if let Some(last) = samples.last_mut() {
            last.0 = k;
            new_samples.next();
        }
        for s in new_samples {
            samples.push((k, *s));
            let last_target = progress.segment + 1 == path.segment_count();
            if progress.observe(path, s.state.position()) && last_target {
                completion_time = Some(s.state.t);
                break;
            }
        }
        state = seg.final_state;
        if let Some(t) = completion_time {
            state = samples.last().map(|(_, s)| s.state).unwrap_or(state);
            debug_assert!(state.t == t);
            break;
        }
    }
    Ok(FollowRun { cycles, samples, completion_time, final_state: state })
}
