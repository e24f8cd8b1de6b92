//! Kinetic friction from a mass sliding down an inclined plane.

use serde::{Deserialize, Serialize};
use tripedal_core::ode::{solve, SolverOptions};

use crate::error::{HarnessError, Result};

pub const GRAVITY: f64 = 9.81;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationInput {
    /// kg
    pub mass: f64,
    /// rad
    pub slope: f64,
    /// Distance slid along the ramp, m.
    pub travel: f64,
    /// Speed at the end of the travel, m/s.
    pub final_speed: f64,
}

impl CalibrationInput {
    pub fn validate(&self) -> Result<()> {
        let bad = |f: &str, m: &str| Err(HarnessError::config(f, m));
        if !(self.mass > 0.0 && self.mass.is_finite()) {
            return bad("mass", "must be positive");
        }
        if !(self.slope > 0.0 && self.slope < std::f64::consts::FRAC_PI_2) {
            return bad("slope", "must be in (0, 90) deg");
        }
        if !(self.travel > 0.0 && self.travel.is_finite()) {
            return bad("travel", "must be positive");
        }
        if !(self.final_speed >= 0.0 && self.final_speed.is_finite()) {
            return bad("final_speed", "must be non-negative");
        }
        Ok(())
    }

    /// Energy lost to friction over the travel, J.
    pub fn friction_loss(&self, g: f64) -> f64 {
        self.released_energy(g) - self.kinetic_energy()
    }

    fn released_energy(&self, g: f64) -> f64 {
        self.mass * g * self.travel * self.slope.sin()
    }

    fn kinetic_energy(&self) -> f64 {
        0.5 * self.mass * self.final_speed * self.final_speed
    }
}

/// Kinetic friction coefficient from the energy balance of the slide.
pub fn calibrate_friction(input: &CalibrationInput) -> Result<f64> {
    calibrate_friction_with_gravity(input, GRAVITY)
}

pub fn calibrate_friction_with_gravity(input: &CalibrationInput, g: f64) -> Result<f64> {
    input.validate()?;
    let loss = input.friction_loss(g);
    if loss < 0.0 {
        return Err(HarnessError::NonPhysical { released: input.released_energy(g), kinetic: input.kinetic_energy() });
    }
    Ok(loss / (input.travel * input.mass * g * input.slope.cos()))
}

/// Speed after sliding `travel` metres from rest down a ramp with kinetic
/// friction `mu`, by integrating the equation of motion in time and locating
/// the arrival by bisection.
pub fn slide_down_ramp(mass: f64, slope: f64, travel: f64, mu: f64, g: f64) -> Result<f64> {
    CalibrationInput { mass, slope, travel, final_speed: 0.0 }.validate()?;
    let accel = g * (slope.sin() - mu * slope.cos());
    if !(accel > 0.0) {
        return Err(HarnessError::RampStall { mu, slope_deg: slope.to_degrees() });
    }
    let opts = SolverOptions { rtol: 1e-13, atol: 1e-15, output_interval: 1e9, ..SolverOptions::default() };
    let run = |t: f64| -> Result<[f64; 2]> {
        let mut rhs = |_t: f64, y: &[f64; 2]| Ok([y[1], accel]);
        let (y, _) = solve(&mut rhs, 0.0, [0.0, 0.0], t, &opts, |_, _| Ok(()))?;
        Ok(y)
    };
    // Bracket the arrival, then bisect on the travelled distance.
    let (mut lo, mut hi) = (0.0, 1.0);
    while run(hi)?[0] < travel {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if run(mid)?[0] < travel {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(run(0.5 * (lo + hi))?[1])
}
