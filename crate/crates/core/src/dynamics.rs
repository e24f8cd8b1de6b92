//! Contact kinematics, normal and friction forces, aerodynamic drag and the
//! planar equations of motion of the central body.
//!
//! The limbs are massless: they only enter through the position and velocity
//! of their tips. Each tip carries a normal load from the static force and
//! torque balance and a sliding friction force opposing its slip velocity.

use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::gait::limb_angles;
use crate::model::{ContactSet, GaitParams, RobotParams, RobotState, WindField};
use crate::ode::{self, SolverOptions, SolverStats};
use crate::scalar::{cross, small_sin_cos, Scalar};

/// Condition number above which the normal-force system is treated as singular.
pub const MAX_CONDITION: f64 = 1e12;

/// Base angle of limb `i` (0-based) around the body, rad.
#[inline]
pub fn base_angle<T: Scalar>(i: usize) -> T {
    T::lit(TAU * i as f64 / 3.0)
}

/// Normal load carried by each contact, N.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalForces<T> {
    pub n: [T; 3],
    pub condition: T,
}

impl<T: Scalar> NormalForces<T> {
    pub fn total(&self) -> T {
        self.n[0] + self.n[1] + self.n[2]
    }

    pub fn min(&self) -> T {
        self.n[0].min(self.n[1]).min(self.n[2])
    }
}

/// Time derivative of [`RobotState`] together with the forces that produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateDerivative<T> {
    pub dx: T,
    pub dy: T,
    pub dxi: T,
    pub ax: T,
    pub ay: T,
    pub alpha: T,
    pub friction: [[T; 2]; 3],
    pub drag: [T; 2],
    pub normals: NormalForces<T>,
}

impl<T: Scalar> StateDerivative<T> {
    /// Integrator layout matching [`RobotState::to_vector`].
    pub fn to_vector(&self) -> [T; 6] {
        [self.dx, self.dy, self.dxi, self.ax, self.ay, self.alpha]
    }

    pub fn is_finite(&self) -> bool {
        self.to_vector().iter().all(|v| v.is_finite())
    }
}

/// Hinge and tip positions and velocities of the three limbs.
pub fn contact_kinematics<T: Scalar>(
    state: &RobotState<T>,
    gait: &GaitParams<T>,
    params: &RobotParams<T>,
    t: T,
) -> ContactSet<T> {
    let (angles, rates) = limb_angles(gait, t);
    contacts_from_angles(state, angles, rates, params)
}

/// Contact geometry for explicitly given limb angles and rates.
pub fn contacts_from_angles<T: Scalar>(
    state: &RobotState<T>,
    limb_angles: [T; 3],
    limb_rates: [T; 3],
    params: &RobotParams<T>,
) -> ContactSet<T> {
    let big_r = params.hinge_radius;
    let l = params.limb_length;
    let mut hinges = [[T::zero(); 2]; 3];
    let mut positions = [[T::zero(); 2]; 3];
    let mut velocities = [[T::zero(); 2]; 3];
    // Hinge directions of limbs 2 and 3 are the limb-1 direction rotated by
    // 120 and 240 degrees.
    let (s0, c0) = state.xi.sin_cos();
    let (s120, c120) = (T::lit(0.75f64.sqrt()), T::lit(-0.5));
    let hinge_dirs = [
        (s0, c0),
        (s0 * c120 + c0 * s120, c0 * c120 - s0 * s120),
        (s0 * c120 - c0 * s120, c0 * c120 + s0 * s120),
    ];
    let hinge_speed = big_r * state.xi_dot;
    for i in 0..3 {
        let (hs, hc) = hinge_dirs[i];
        let (ps, pc) = small_sin_cos(limb_angles[i]);
        let (ls, lc) = (hs * pc + hc * ps, hc * pc - hs * ps);
        hinges[i] = [state.x + big_r * hc, state.y + big_r * hs];
        positions[i] = [hinges[i][0] + l * lc, hinges[i][1] + l * ls];
        let limb_speed = l * (state.xi_dot + limb_rates[i]);
        velocities[i] = [
            state.vx - hinge_speed * hs - limb_speed * ls,
            state.vy + hinge_speed * hc + limb_speed * lc,
        ];
    }
    ContactSet { hinges, positions, velocities, limb_angles, limb_rates }
}

/// Solves the vertical force balance together with the two torque balances
/// about the centre of mass for the three normal loads.
///
/// Negative loads (centre of mass outside the contact triangle) are returned
/// as computed.
pub fn solve_normal_forces<T: Scalar>(
    contacts: &ContactSet<T>,
    com: [T; 2],
    params: &RobotParams<T>,
) -> Result<NormalForces<T>> {
    let one = T::one();
    let p = &contacts.positions;
    let a = [
        [one, one, one],
        [p[0][0] - com[0], p[1][0] - com[0], p[2][0] - com[0]],
        [p[0][1] - com[1], p[1][1] - com[1], p[2][1] - com[1]],
    ];

    // Adjugate inverse; the first column of the cofactor matrix gives N directly.
    let cof = |r0: usize, r1: usize, c0: usize, c1: usize| a[r0][c0] * a[r1][c1] - a[r0][c1] * a[r1][c0];
    let c = [
        [cof(1, 2, 1, 2), -cof(1, 2, 0, 2), cof(1, 2, 0, 1)],
        [-cof(0, 2, 1, 2), cof(0, 2, 0, 2), -cof(0, 2, 0, 1)],
        [cof(0, 1, 1, 2), -cof(0, 1, 0, 2), cof(0, 1, 0, 1)],
    ];
    let det = a[0][0] * c[0][0] + a[0][1] * c[0][1] + a[0][2] * c[0][2];

    let norm1 = |m: &[[T; 3]; 3], scale: T| {
        (0..3)
            .map(|j| (0..3).fold(T::zero(), |s, i| s + m[i][j].abs()) * scale)
            .fold(T::zero(), T::max)
    };
    // inv[i][j] = c[j][i] / det
    let ct = [
        [c[0][0], c[1][0], c[2][0]],
        [c[0][1], c[1][1], c[2][1]],
        [c[0][2], c[1][2], c[2][2]],
    ];
    let condition = if det == T::zero() {
        T::infinity()
    } else {
        norm1(&a, one) * norm1(&ct, one / det.abs())
    };
    if !(condition.is_finite() && condition.to_f64_lossless() <= MAX_CONDITION) {
        return Err(Error::ContactDegenerate { condition: condition.to_f64_lossless() });
    }

    let w = params.weight();
    let n = [w * c[0][0] / det, w * c[0][1] / det, w * c[0][2] / det];
    Ok(NormalForces { n, condition })
}

/// Coulomb friction at each tip, regularized below the creep speed by a
/// linear law that is continuous at the threshold.
pub fn friction_forces<T: Scalar>(
    contacts: &ContactSet<T>,
    normals: &NormalForces<T>,
    params: &RobotParams<T>,
) -> [[T; 2]; 3] {
    let mut out = [[T::zero(); 2]; 3];
    for i in 0..3 {
        let v = contacts.velocities[i];
        let speed = (v[0] * v[0] + v[1] * v[1]).sqrt();
        let denom = speed.max(params.creep_velocity);
        let k = -params.friction_mu * normals.n[i] / denom;
        out[i] = [k * v[0], k * v[1]];
    }
    out
}

/// Quadratic drag `rho C_d A_d v^2 / 2` along the wind direction.
pub fn drag_force<T: Scalar>(wind: &WindField<T>) -> [T; 2] {
    let mag = T::lit(0.5) * wind.air_density * wind.drag_coeff * wind.frontal_area * wind.speed * wind.speed;
    let (s, c) = wind.direction.sin_cos();
    [mag * c, mag * s]
}

/// Linear and angular accelerations of the body. Drag acts at the centre of
/// mass and contributes no torque.
pub fn state_derivative<T: Scalar>(
    state: &RobotState<T>,
    gait: &GaitParams<T>,
    wind: Option<&WindField<T>>,
    params: &RobotParams<T>,
) -> Result<StateDerivative<T>> {
    let contacts = contact_kinematics(state, gait, params, state.t);
    derivative_from_contacts(state, &contacts, wind, params)
}

pub fn derivative_from_contacts<T: Scalar>(
    state: &RobotState<T>,
    contacts: &ContactSet<T>,
    wind: Option<&WindField<T>>,
    params: &RobotParams<T>,
) -> Result<StateDerivative<T>> {
    let com = state.position();
    let normals = solve_normal_forces(contacts, com, params)?;
    let friction = friction_forces(contacts, &normals, params);
    let drag = wind.map(drag_force).unwrap_or([T::zero(); 2]);

    let mut fx = drag[0];
    let mut fy = drag[1];
    let mut torque = T::zero();
    for i in 0..3 {
        fx = fx + friction[i][0];
        fy = fy + friction[i][1];
        let arm = [contacts.positions[i][0] - com[0], contacts.positions[i][1] - com[1]];
        torque = torque + cross(arm, friction[i]);
    }
    Ok(StateDerivative {
        dx: state.vx,
        dy: state.vy,
        dxi: state.xi_dot,
        ax: fx / params.body_mass,
        ay: fy / params.body_mass,
        alpha: torque / params.rot_inertia,
        friction,
        drag,
        normals,
    })
}

/// One output sample of a simulation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample<T> {
    pub state: RobotState<T>,
    /// rad
    pub limb_angles: [T; 3],
    pub normals: [T; 3],
}

/// Samples produced by one call to [`integrate`].
#[derive(Debug, Clone, PartialEq)]
pub struct TraceSegment<T> {
    pub samples: Vec<Sample<T>>,
    pub final_state: RobotState<T>,
    pub stats: SolverStats,
    /// Smallest normal load seen at an output sample, N.
    pub min_normal: T,
}

impl<T: Scalar> TraceSegment<T> {
    /// Number of output samples with a negative normal load (limb lift-off,
    /// which the model does not represent).
    pub fn negative_normal_samples(&self) -> usize {
        self.samples.iter().filter(|s| s.normals.iter().any(|n| *n < T::zero())).count()
    }
}

/// Advances the body for `duration` seconds under a fixed gait and optional
/// wind, sampling at `opts.output_interval`. The first sample is the initial
/// state and the last is the state at `state.t + duration`.
pub fn integrate<T: Scalar>(
    state: &RobotState<T>,
    gait: &GaitParams<T>,
    wind: Option<&WindField<T>>,
    params: &RobotParams<T>,
    duration: T,
    opts: &SolverOptions<T>,
) -> Result<TraceSegment<T>> {
    if !(duration > T::zero()) {
        return Err(Error::InvalidParams("non-positive duration"));
    }
    let params = params.validate()?;
    let gait = gait.validate()?;
    if let Some(w) = wind {
        w.validate()?;
    }

    let mut rhs = |t: T, y: &[T; 6]| -> Result<[T; 6]> {
        let s = RobotState::from_vector(t, y);
        Ok(state_derivative(&s, &gait, wind, &params)?.to_vector())
    };

    let mut samples = Vec::new();
    let mut min_normal = T::infinity();
    let t0 = state.t;
    let (y_end, stats) = ode::solve(&mut rhs, t0, state.to_vector(), t0 + duration, opts, |t, y| {
        let s = RobotState::from_vector(t, y);
        let contacts = contact_kinematics(&s, &gait, &params, t);
        let normals = solve_normal_forces(&contacts, s.position(), &params)?;
        min_normal = min_normal.min(normals.min());
        samples.push(Sample { state: s, limb_angles: contacts.limb_angles, normals: normals.n });
        Ok(())
    })?;

    Ok(TraceSegment {
        samples,
        final_state: RobotState::from_vector(t0 + duration, &y_end),
        stats,
        min_normal,
    })
}
