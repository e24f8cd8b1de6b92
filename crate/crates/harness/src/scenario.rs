//! Running scenarios and writing their outputs.

use std::path::{Path as FsPath, PathBuf};

use tripedal_core::control::{follow_path, FollowOptions};
use tripedal_core::dynamics::integrate;
use tripedal_core::gait::GaitMap;

use crate::config::{ScenarioConfig, WindConfig};
use crate::error::{HarnessError, Result};
use crate::mapfile::load_map;
use crate::trace::{ErrorMetrics, Metrics, RunMode, Trace, TraceRow};

/// Closed-loop cycle budget when the scenario does not set one.
pub const DEFAULT_MAX_CYCLES: usize = 400;

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub trace: Trace,
    pub metrics: Metrics,
}

/// Runs a scenario. Closed-loop scenarios use `map` if given, otherwise the
/// map file named in the config.
pub fn run_scenario(cfg: &ScenarioConfig, map: Option<&GaitMap<f64>>) -> Result<RunOutput> {
    cfg.validate()?;
    let params = cfg.robot.to_params();
    let wind = cfg.wind.as_ref().map(WindConfig::to_field);
    let start = cfg.start_state();
    let solver = cfg.run.solver();

    let mut metrics = Metrics {
        name: cfg.name.clone(),
        mode: RunMode::OpenLoop,
        delta_m: None,
        t_c_s: None,
        max_abs_e_m: None,
        cycles: 0,
        segments: Vec::new(),
        final_x_m: 0.0,
        final_y_m: 0.0,
        final_xi_rad: 0.0,
        min_normal_n: f64::INFINITY,
        negative_normal_samples: 0,
        pi_enabled: false,
        heading_bias_deg: 0.0,
        wind: cfg.wind,
        path: None,
    };

    let trace = if let Some(cl) = cfg.closed_loop() {
        let loaded;
        let map = match (map, &cl.map) {
            (Some(m), _) => m,
            (None, Some(p)) => {
                loaded = load_map(p)?;
                &loaded
            }
            (None, None) => return Err(HarnessError::config("gait.map", "closed-loop runs need a gait map")),
        };
        let path = cl.path.to_path();
        let opts = FollowOptions {
            max_cycles: cfg.run.max_cycles.unwrap_or(DEFAULT_MAX_CYCLES),
            heading_bias: cl.heading_bias_deg,
            solver,
        };
        let run = follow_path(&start, &params, map, &path, cl.controller.to_controller(), wind.as_ref(), &opts)?;

        let mut rows = Vec::with_capacity(run.samples.len());
        let mut current = None;
        for (k, s) in &run.samples {
            let mut row = TraceRow::from_sample(s);
            if current != Some(*k) {
                current = Some(*k);
                let o = run.cycles[*k].output;
                row.e = Some(o.error / 100.0);
                row.theta_d = Some(o.theta_d);
                row.theta_pi = Some(o.theta_pi);
                row.zone = Some(o.zone);
                row.alpha = Some(o.alpha);
            }
            rows.push(row);
        }
        let trace = Trace { rows };
        metrics.mode = RunMode::ClosedLoop;
        metrics.set_errors(ErrorMetrics::from_trace(&trace, &path));
        debug_assert_eq!(metrics.t_c_s, run.completion_time);
        metrics.pi_enabled = cl.controller.is_enabled();
        metrics.heading_bias_deg = cl.heading_bias_deg;
        metrics.path = Some(cl.path.clone());
        trace
    } else {
        let gait = cfg.open_loop_gait().expect("open-loop source");
        let duration = cfg.duration().expect("validated duration");
        let seg = integrate(&start, &gait, wind.as_ref(), &params, duration, &solver)?;
        metrics.cycles = (duration * gait.frequency + 1e-9).floor() as usize;
        Trace { rows: seg.samples.iter().map(TraceRow::from_sample).collect() }
    };

    if let Some(last) = trace.rows.last() {
        metrics.final_x_m = last.x;
        metrics.final_y_m = last.y;
        metrics.final_xi_rad = last.xi;
    }
    for r in &trace.rows {
        for n in [r.n1, r.n2, r.n3] {
            metrics.min_normal_n = metrics.min_normal_n.min(n);
        }
        if r.n1.min(r.n2).min(r.n3) < 0.0 {
            metrics.negative_normal_samples += 1;
        }
    }
    Ok(RunOutput { trace, metrics })
}

/// Writes the trace and metrics files into `dir`, returning their paths.
pub fn write_outputs(cfg: &ScenarioConfig, out: &RunOutput, dir: &FsPath) -> Result<(PathBuf, PathBuf)> {
    std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    let trace_path = dir.join(&cfg.output.trace);
    let metrics_path = dir.join(&cfg.output.metrics);
    out.trace.write(&trace_path)?;
    out.metrics.write(&metrics_path)?;
    Ok((trace_path, metrics_path))
}

/// Recomputes the path-following metrics of a written run.
pub fn recompute_errors(trace: &Trace, metrics: &Metrics) -> Option<ErrorMetrics> {
    let path = metrics.path.as_ref()?.to_path();
    Some(ErrorMetrics::from_trace(trace, &path))
}
