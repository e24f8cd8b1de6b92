//! Scenario files (TOML).
//!
//! ```toml
//! name = "rectangle"
//!
//! [robot]
//! friction_mu = 0.59
//!
//! [gait]
//! mode = "closed_loop"
//! map = "gaitmap.json"
//! heading_bias_deg = 0.0
//! path = { waypoints = [[0.0, 0.0], [0.3, 0.0], [0.3, 0.2], [0.0, 0.2]], closed = true }
//! controller = { kp = 15.0, ki = 1.0 }
//!
//! [wind]
//! speed = 5.5
//! direction_deg = 25.0
//! ```

use std::path::{Path as FsPath, PathBuf};

use serde::{Deserialize, Serialize};
use tripedal_core::gait::{canonical_gait, CanonicalGait, MapBuildOptions};
use tripedal_core::model::{disk_inertia, GaitParams, RobotParams, RobotState, WindField};
use tripedal_core::{PIController, Path, SolverOptions};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub robot: RobotConfig,
    pub gait: GaitSource,
    #[serde(default)]
    pub wind: Option<WindConfig>,
    #[serde(default)]
    pub run: RunConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RobotConfig {
    pub friction_mu: f64,
    /// kg
    pub body_mass: f64,
    /// kg m^2; a uniform disk of the hinge radius when absent.
    pub rot_inertia: Option<f64>,
    /// m
    pub hinge_radius: f64,
    /// m
    pub limb_length: f64,
    pub gravity: f64,
    /// m/s
    pub creep_velocity: f64,
}

impl Default for RobotConfig {
    fn default() -> Self {
        Self::from_params(&RobotParams::nominal())
    }
}

impl RobotConfig {
    pub fn from_params(p: &RobotParams<f64>) -> Self {
        Self {
            friction_mu: p.friction_mu,
            body_mass: p.body_mass,
            rot_inertia: None,
            hinge_radius: p.hinge_radius,
            limb_length: p.limb_length,
            gravity: p.gravity,
            creep_velocity: p.creep_velocity,
        }
    }

    pub fn to_params(&self) -> RobotParams<f64> {
        RobotParams {
            body_mass: self.body_mass,
            rot_inertia: self.rot_inertia.unwrap_or_else(|| disk_inertia(self.body_mass, self.hinge_radius)),
            hinge_radius: self.hinge_radius,
            limb_length: self.limb_length,
            friction_mu: self.friction_mu,
            gravity: self.gravity,
            creep_velocity: self.creep_velocity,
        }
    }
}

/// Where the limb commands come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum GaitSource {
    Explicit {
        amplitudes_deg: [f64; 3],
        #[serde(default)]
        phases_deg: [f64; 3],
        #[serde(default = "one")]
        frequency_hz: f64,
    },
    Canonical {
        kind: CanonicalGait,
    },
    ClosedLoop(ClosedLoopConfig),
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClosedLoopConfig {
    /// Gait map file; may be overridden on the command line.
    #[serde(default)]
    pub map: Option<PathBuf>,
    pub path: PathConfig,
    #[serde(default)]
    pub controller: ControllerConfig,
    /// Constant offset added to the selected heading, deg.
    #[serde(default)]
    pub heading_bias_deg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathConfig {
    /// m
    pub waypoints: Vec<[f64; 2]>,
    #[serde(default)]
    pub closed: bool,
    /// m
    #[serde(default = "default_capture_radius")]
    pub capture_radius: f64,
}

fn default_capture_radius() -> f64 {
    Path::<f64>::DEFAULT_CAPTURE_RADIUS
}

impl PathConfig {
    pub fn to_path(&self) -> Path<f64> {
        Path { waypoints: self.waypoints.clone(), capture_radius: self.capture_radius, closed: self.closed }
    }

    pub fn from_path(path: &Path<f64>) -> Self {
        Self { waypoints: path.waypoints.clone(), closed: path.closed, capture_radius: path.capture_radius }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ControllerConfig {
    /// deg/cm
    pub kp: f64,
    /// deg/(cm s)
    pub ki: f64,
    /// s
    pub ts: f64,
    /// deg
    pub windup_limit_deg: f64,
}

impl Default for ControllerConfig {
    fn default() -> Self {
        let c = PIController::<f64>::default();
        Self { kp: c.kp, ki: c.ki, ts: c.ts, windup_limit_deg: c.windup_limit }
    }
}

impl ControllerConfig {
    pub fn to_controller(&self) -> PIController<f64> {
        PIController { kp: self.kp, ki: self.ki, ts: self.ts, integral_accum: 0.0, windup_limit: self.windup_limit_deg }
    }

    pub fn is_enabled(&self) -> bool {
        self.kp != 0.0 || self.ki != 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindConfig {
    /// m/s
    pub speed: f64,
    /// Direction the air moves towards, deg from +x.
    pub direction_deg: f64,
    #[serde(default = "default_air_density")]
    pub air_density: f64,
    #[serde(default = "one")]
    pub drag_coeff: f64,
    /// m^2
    #[serde(default = "default_frontal_area")]
    pub frontal_area: f64,
}

fn default_air_density() -> f64 {
    WindField::<f64>::nominal(0.0).air_density
}

fn default_frontal_area() -> f64 {
    WindField::<f64>::nominal(0.0).frontal_area
}

impl WindConfig {
    pub fn new(speed: f64, direction_deg: f64) -> Self {
        Self {
            speed,
            direction_deg,
            air_density: default_air_density(),
            drag_coeff: 1.0,
            frontal_area: default_frontal_area(),
        }
    }

    pub fn to_field(&self) -> WindField<f64> {
        WindField {
            speed: self.speed,
            direction: self.direction_deg.to_radians(),
            air_density: self.air_density,
            drag_coeff: self.drag_coeff,
            frontal_area: self.frontal_area,
        }
    }

    /// Parses the `speed,direction_deg` command-line form.
    pub fn parse_pair(s: &str) -> Result<Self> {
        let bad = || HarnessError::config("--wind", format!("expected <speed,direction_deg>, got `{s}`"));
        let (speed, dir) = s.split_once(',').ok_or_else(bad)?;
        let speed = speed.trim().parse().map_err(|_| bad())?;
        let dir = dir.trim().parse().map_err(|_| bad())?;
        Ok(Self::new(speed, dir))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Open-loop run length, s.
    pub duration_s: Option<f64>,
    /// Closed-loop cycle budget (open loop: alternative to `duration_s`).
    pub max_cycles: Option<usize>,
    /// Start position, m; the first waypoint for closed-loop runs when absent.
    pub start: Option<[f64; 2]>,
    pub start_heading_deg: f64,
    pub rtol: f64,
    pub atol: f64,
    /// s
    pub output_interval: f64,
    /// Reserved; every run is deterministic.
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        let s = SolverOptions::<f64>::default();
        Self {
            duration_s: None,
            max_cycles: None,
            start: None,
            start_heading_deg: 0.0,
            rtol: s.rtol,
            atol: s.atol,
            output_interval: s.output_interval,
            seed: 0,
        }
    }
}

impl RunConfig {
    pub fn solver(&self) -> SolverOptions<f64> {
        SolverOptions { rtol: self.rtol, atol: self.atol, output_interval: self.output_interval, ..Default::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub trace: PathBuf,
    pub metrics: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { trace: "trace.csv".into(), metrics: "metrics.json".into() }
    }
}

/// Settings for building a gait map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MapConfig {
    #[serde(default)]
    pub robot: RobotConfig,
    pub mu_list: Vec<f64>,
    pub alpha_step_deg: f64,
    pub cycles: usize,
}

impl Default for MapConfig {
    fn default() -> Self {
        let o = MapBuildOptions::<f64>::default();
        Self { robot: RobotConfig::default(), mu_list: o.mu_list, alpha_step_deg: 1.0, cycles: o.cycles }
    }
}

impl MapConfig {
    pub fn from_file(path: &FsPath) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        toml::from_str(&text).map_err(|source| HarnessError::Toml { path: path.into(), source })
    }

    pub fn build_options(&self) -> Result<MapBuildOptions<f64>> {
        if !(self.alpha_step_deg > 0.0 && self.alpha_step_deg <= 30.0) {
            return Err(HarnessError::config("alpha_step_deg", "must be in (0, 30]"));
        }
        let n = (30.0 / self.alpha_step_deg + 1e-9).floor() as usize;
        Ok(MapBuildOptions {
            mu_list: self.mu_list.clone(),
            alpha_grid: (0..=n).map(|k| k as f64 * self.alpha_step_deg).collect(),
            cycles: self.cycles,
            ..MapBuildOptions::default()
        })
    }
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self =
            toml::from_str(text).map_err(|source| HarnessError::Toml { path: PathBuf::from("<string>"), source })?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads and validates a scenario. A relative map path is resolved
    /// against the scenario file's directory.
    pub fn from_file(path: &FsPath) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        let mut cfg: Self = toml::from_str(&text).map_err(|source| HarnessError::Toml { path: path.into(), source })?;
        if let GaitSource::ClosedLoop(cl) = &mut cfg.gait {
            if let (Some(map), Some(dir)) = (&cl.map, path.parent()) {
                if map.is_relative() {
                    cl.map = Some(dir.join(map));
                }
            }
        }
        if cfg.name.is_empty() {
            cfg.name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("scenario config serializes")
    }

    pub fn is_closed_loop(&self) -> bool {
        matches!(self.gait, GaitSource::ClosedLoop(_))
    }

    pub fn closed_loop(&self) -> Option<&ClosedLoopConfig> {
        match &self.gait {
            GaitSource::ClosedLoop(c) => Some(c),
            _ => None,
        }
    }

    /// Zeroes both controller gains.
    pub fn disable_pi(&mut self) {
        if let GaitSource::ClosedLoop(c) = &mut self.gait {
            c.controller.kp = 0.0;
            c.controller.ki = 0.0;
        }
    }

    /// The open-loop gait, if this is an open-loop scenario.
    pub fn open_loop_gait(&self) -> Option<GaitParams<f64>> {
        match &self.gait {
            GaitSource::Explicit { amplitudes_deg, phases_deg, frequency_hz } => Some(GaitParams {
                amplitudes: *amplitudes_deg,
                phases: phases_deg.map(f64::to_radians),
                frequency: *frequency_hz,
            }),
            GaitSource::Canonical { kind } => Some(canonical_gait(*kind)),
            GaitSource::ClosedLoop(_) => None,
        }
    }

    pub fn start_state(&self) -> RobotState<f64> {
        let [x, y] = self
            .run
            .start
            .or_else(|| self.closed_loop().and_then(|c| c.path.waypoints.first().copied()))
            .unwrap_or([0.0, 0.0]);
        RobotState::at_rest(x, y, self.run.start_heading_deg.to_radians())
    }

    /// Field-level validation; the first problem found is reported.
    pub fn validate(&self) -> Result<()> {
        let field = |f: &str, e: tripedal_core::Error| HarnessError::config(f, e.to_string());
        self.robot.to_params().validate().map_err(|e| field("robot", e))?;
        if let Some(w) = &self.wind {
            w.to_field().validate().map_err(|e| field("wind", e))?;
        }
        let r = &self.run;
        if !(r.rtol > 0.0 && r.atol > 0.0) {
            return Err(HarnessError::config("run.rtol/atol", "tolerances must be positive"));
        }
        if !(r.output_interval > 0.0) {
            return Err(HarnessError::config("run.output_interval", "must be positive"));
        }
        if !r.start_heading_deg.is_finite() || r.start.is_some_and(|p| !p.iter().all(|v| v.is_finite())) {
            return Err(HarnessError::config("run.start", "non-finite start pose"));
        }
        if let Some(d) = r.duration_s {
            if !(d > 0.0 && d.is_finite()) {
                return Err(HarnessError::config("run.duration_s", "must be positive"));
            }
        }
        if r.max_cycles == Some(0) {
            return Err(HarnessError::config("run.max_cycles", "must be positive"));
        }
        match &self.gait {
            GaitSource::ClosedLoop(c) => {
                c.path.to_path().validate().map_err(|e| field("gait.path", e))?;
                for (k, w) in c.path.waypoints.windows(2).enumerate() {
                    if w[0] == w[1] {
                        return Err(HarnessError::config(format!("gait.path.waypoints[{}]", k + 1), "repeats the previous waypoint"));
                    }
                }
                if c.path.closed && c.path.waypoints.first() == c.path.waypoints.last() {
                    return Err(HarnessError::config("gait.path.closed", "closed paths must not repeat the first waypoint"));
                }
                c.controller.to_controller().validate().map_err(|e| field("gait.controller", e))?;
                if !c.heading_bias_deg.is_finite() {
                    return Err(HarnessError::config("gait.heading_bias_deg", "must be finite"));
                }
            }
            _ => {
                let g = self.open_loop_gait().expect("open-loop source");
                g.validate().map_err(|e| field("gait", e))?;
                if r.duration_s.is_none() && r.max_cycles.is_none() {
                    return Err(HarnessError::config("run.duration_s", "open-loop runs need a duration or a cycle count"));
                }
            }
        }
        Ok(())
    }

    /// Open-loop duration, s.
    pub fn duration(&self) -> Option<f64> {
        let g = self.open_loop_gait()?;
        self.run.duration_s.or_else(|| self.run.max_cycles.map(|n| n as f64 * g.period()))
    }
}
