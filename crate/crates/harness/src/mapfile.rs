//! Gait map files (JSON).

use std::path::Path as FsPath;

use tripedal_core::gait::{build_gait_map, GaitMap};

use crate::config::MapConfig;
use crate::error::{HarnessError, Result};

pub fn build_map(cfg: &MapConfig) -> Result<GaitMap<f64>> {
    Ok(build_gait_map(&cfg.robot.to_params(), &cfg.build_options()?)?)
}

pub fn save_map(map: &GaitMap<f64>, path: &FsPath) -> Result<()> {
    let text = serde_json::to_string_pretty(map)?;
    std::fs::write(path, text + "\n").map_err(|e| HarnessError::io(path, e))
}

/// Reads a map and checks its version, monotonicity and zone coverage.
pub fn load_map(path: &FsPath) -> Result<GaitMap<f64>> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    let map: GaitMap<f64> = serde_json::from_str(&text)?;
    map.validate()?;
    Ok(map)
}
