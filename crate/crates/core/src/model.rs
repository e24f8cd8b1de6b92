//! Shared domain types: robot constants, planar state, gait parameters,
//! contact geometry and the wind disturbance.
//!
//! Units are SI throughout, except gait amplitudes which are degrees.
//! Headings and limb angles are carried in radians.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Physical amplitude limit of the limb servos, degrees.
pub const MAX_AMPLITUDE_DEG: f64 = 30.0;

/// Friction coefficients of the two measured contacts (polymer and sandpaper).
pub const MU_POLYMER: f64 = 0.33;
pub const MU_SANDPAPER: f64 = 0.85;

/// Geometric, inertial and friction constants of the robot and its surface.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobotParams<T> {
    /// kg
    pub body_mass: T,
    /// kg m^2
    pub rot_inertia: T,
    /// Distance from the centre of mass to each limb hinge, m.
    pub hinge_radius: T,
    /// m
    pub limb_length: T,
    pub friction_mu: T,
    /// m/s^2
    pub gravity: T,
    /// Slip speed below which friction is a linear creep law, m/s.
    pub creep_velocity: T,
}

impl<T: Scalar> RobotParams<T> {
    /// Measured robot with the sandpaper contact. The rotational inertia is the
    /// uniform-disk estimate `M R^2 / 2`.
    pub fn nominal() -> Self {
        Self::with_mu(T::lit(MU_SANDPAPER))
    }

    pub fn with_mu(mu: T) -> Self {
        let body_mass = T::lit(0.888);
        let hinge_radius = T::lit(0.05);
        Self {
            body_mass,
            rot_inertia: disk_inertia(body_mass, hinge_radius),
            hinge_radius,
            limb_length: T::lit(0.075),
            friction_mu: mu,
            gravity: T::lit(9.81),
            creep_velocity: T::lit(1e-4),
        }
    }

    /// Checks every invariant and reports the first violation.
    pub fn validate(self) -> Result<Self> {
        let z = T::zero();
        let finite = [
            self.body_mass,
            self.rot_inertia,
            self.hinge_radius,
            self.limb_length,
            self.friction_mu,
            self.gravity,
            self.creep_velocity,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidParams("non-finite value"));
        }
        if self.body_mass <= z {
            return Err(Error::InvalidParams("non-positive mass"));
        }
        if self.rot_inertia <= z {
            return Err(Error::InvalidParams("non-positive rotational inertia"));
        }
        if self.hinge_radius <= z {
            return Err(Error::InvalidParams("non-positive hinge radius"));
        }
        if self.limb_length <= z {
            return Err(Error::InvalidParams("non-positive limb length"));
        }
        if self.friction_mu < z {
            return Err(Error::InvalidParams("negative friction coefficient"));
        }
        if self.gravity <= z {
            return Err(Error::InvalidParams("non-positive gravity"));
        }
        if self.creep_velocity <= z {
            return Err(Error::InvalidParams("non-positive creep velocity"));
        }
        Ok(self)
    }

    /// Total weight `M g`, N.
    #[inline]
    pub fn weight(&self) -> T {
        self.body_mass * self.gravity
    }
}

/// Rotational inertia of a uniform disk of mass `m` and radius `r`.
pub fn disk_inertia<T: Scalar>(m: T, r: T) -> T {
    T::lit(0.5) * m * r * r
}

/// Planar pose and velocity of the central body. `xi` is never wrapped, so
/// accumulated rotation stays observable.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RobotState<T> {
    pub x: T,
    pub y: T,
    pub vx: T,
    pub vy: T,
    /// Heading, rad.
    pub xi: T,
    /// rad/s
    pub xi_dot: T,
    /// s
    pub t: T,
}

impl<T: Scalar> RobotState<T> {
    pub fn at_rest(x: T, y: T, xi: T) -> Self {
        Self { x, y, xi, ..Self::zero() }
    }

    pub fn zero() -> Self {
        let z = T::zero();
        Self { x: z, y: z, vx: z, vy: z, xi: z, xi_dot: z, t: z }
    }

    #[inline]
    pub fn position(&self) -> [T; 2] {
        [self.x, self.y]
    }

    pub fn is_finite(&self) -> bool {
        [self.x, self.y, self.vx, self.vy, self.xi, self.xi_dot, self.t]
            .iter()
            .all(|v| v.is_finite())
    }

    /// Integrator layout `[x, y, xi, vx, vy, xi_dot]`.
    #[inline]
    pub fn to_vector(&self) -> [T; 6] {
        [self.x, self.y, self.xi, self.vx, self.vy, self.xi_dot]
    }

    #[inline]
    pub fn from_vector(t: T, v: &[T; 6]) -> Self {
        Self { x: v[0], y: v[1], xi: v[2], vx: v[3], vy: v[4], xi_dot: v[5], t }
    }

    /// Translational plus rotational kinetic energy of the body, J.
    pub fn kinetic_energy(&self, params: &RobotParams<T>) -> T {
        let half = T::lit(0.5);
        half * params.body_mass * (self.vx * self.vx + self.vy * self.vy)
            + half * params.rot_inertia * self.xi_dot * self.xi_dot
    }
}

/// Per-limb sinusoid `phi_i = a_i sin(2 pi f t + psi_i)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaitParams<T> {
    /// deg
    pub amplitudes: [T; 3],
    /// rad
    pub phases: [T; 3],
    /// Hz
    pub frequency: T,
}

impl<T: Scalar> GaitParams<T> {
    /// Zero-phase gait at the default 1 Hz.
    pub fn from_amplitudes(amplitudes: [T; 3]) -> Self {
        Self { amplitudes, phases: [T::zero(); 3], frequency: T::one() }
    }

    pub fn still() -> Self {
        Self::from_amplitudes([T::zero(); 3])
    }

    pub fn validate(self) -> Result<Self> {
        let limit = T::lit(MAX_AMPLITUDE_DEG) * (T::one() + T::lit(1e-12));
        if !self.amplitudes.iter().chain(self.phases.iter()).all(|v| v.is_finite()) {
            return Err(Error::InvalidGait("non-finite amplitude or phase"));
        }
        if self.amplitudes.iter().any(|a| a.abs() > limit) {
            return Err(Error::InvalidGait("amplitude exceeds 30 deg servo limit"));
        }
        if !(self.frequency.is_finite() && self.frequency > T::zero()) {
            return Err(Error::InvalidGait("non-positive frequency"));
        }
        Ok(self)
    }

    /// Gait period, s.
    #[inline]
    pub fn period(&self) -> T {
        T::one() / self.frequency
    }

    /// Relabels limbs so that limb `i + 1` performs what limb `i` did. Together
    /// with a +120 deg body rotation this leaves the motion unchanged.
    pub fn rotate_limbs(&self) -> Self {
        let a = self.amplitudes;
        let p = self.phases;
        Self { amplitudes: [a[2], a[0], a[1]], phases: [p[2], p[0], p[1]], frequency: self.frequency }
    }
}

/// Contact geometry of the three limb tips at one instant (world frame).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContactSet<T> {
    pub hinges: [[T; 2]; 3],
    pub positions: [[T; 2]; 3],
    pub velocities: [[T; 2]; 3],
    /// rad
    pub limb_angles: [T; 3],
    /// rad/s
    pub limb_rates: [T; 3],
}

/// Uniform, constant wind acting as a drag force on the body.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindField<T> {
    /// m/s
    pub speed: T,
    /// World-frame direction the wind blows towards, rad.
    pub direction: T,
    /// kg/m^3
    pub air_density: T,
    pub drag_coeff: T,
    /// m^2
    pub frontal_area: T,
}

impl<T: Scalar> WindField<T> {
    /// 5.5 m/s bluff-body drag (`C_d = 1`, `A_d = 0.02 m^2`) in air at 20 C.
    pub fn nominal(direction: T) -> Self {
        Self {
            speed: T::lit(5.5),
            direction,
            air_density: T::lit(1.204),
            drag_coeff: T::one(),
            frontal_area: T::lit(0.02),
        }
    }

    pub fn validate(self) -> Result<Self> {
        let z = T::zero();
        let vals = [self.speed, self.direction, self.air_density, self.drag_coeff, self.frontal_area];
        if !vals.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidParams("non-finite wind value"));
        }
        if self.speed < z {
            return Err(Error::InvalidParams("negative wind speed"));
        }
        if self.air_density <= z {
            return Err(Error::InvalidParams("non-positive air density"));
        }
        if self.drag_coeff < z {
            return Err(Error::InvalidParams("negative drag coefficient"));
        }
        if self.frontal_area < z {
            return Err(Error::InvalidParams("negative frontal area"));
        }
        Ok(self)
    }

    /// Wind speed that yields a drag of `force` newtons with the other fields unchanged.
    pub fn speed_for_force(&self, force: T) -> T {
        (T::lit(2.0) * force / (self.air_density * self.drag_coeff * self.frontal_area)).sqrt()
    }
}
