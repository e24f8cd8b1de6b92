//! Trace CSV and metrics files.
//!
//! Trace columns: `t` s; `x`, `y` m; `xi` rad; `vx`, `vy` m/s; `xidot`
//! rad/s; `phi1..3` rad; `N1..3` N; `e` m; `theta_D`, `theta_PI` deg;
//! `zone`; `alpha` deg. The last five are filled only on rows where a
//! control step ran and are empty for open-loop runs.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path as FsPath;

use serde::{Deserialize, Serialize};
use tripedal_core::dynamics::Sample;
use tripedal_core::{Path, PathState};

use crate::config::{PathConfig, WindConfig};
use crate::error::{HarnessError, Result};

pub const TRACE_HEADER: [&str; 18] = [
    "t", "x", "y", "xi", "vx", "vy", "xidot", "phi1", "phi2", "phi3", "N1", "N2", "N3", "e", "theta_D", "theta_PI",
    "zone", "alpha",
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub xi: f64,
    pub vx: f64,
    pub vy: f64,
    pub xidot: f64,
    pub phi1: f64,
    pub phi2: f64,
    pub phi3: f64,
    #[serde(rename = "N1")]
    pub n1: f64,
    #[serde(rename = "N2")]
    pub n2: f64,
    #[serde(rename = "N3")]
    pub n3: f64,
    pub e: Option<f64>,
    #[serde(rename = "theta_D")]
    pub theta_d: Option<f64>,
    #[serde(rename = "theta_PI")]
    pub theta_pi: Option<f64>,
    pub zone: Option<u8>,
    pub alpha: Option<f64>,
}

impl TraceRow {
    pub fn from_sample(s: &Sample<f64>) -> Self {
        let st = &s.state;
        let [phi1, phi2, phi3] = s.limb_angles;
        let [n1, n2, n3] = s.normals;
        Self {
            t: st.t,
            x: st.x,
            y: st.y,
            xi: st.xi,
            vx: st.vx,
            vy: st.vy,
            xidot: st.xi_dot,
            phi1,
            phi2,
            phi3,
            n1,
            n2,
            n3,
            e: None,
            theta_d: None,
            theta_pi: None,
            zone: None,
            alpha: None,
        }
    }

    pub fn position(&self) -> [f64; 2] {
        [self.x, self.y]
    }

    pub fn is_control_row(&self) -> bool {
        self.e.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trace {
    pub rows: Vec<TraceRow>,
}

impl Trace {
    pub fn write_to<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        if self.rows.is_empty() {
            wtr.write_record(TRACE_HEADER)?;
        }
        for r in &self.rows {
            wtr.serialize(r)?;
        }
        wtr.flush().map_err(|e| HarnessError::Csv(e.into()))?;
        Ok(())
    }

    pub fn write(&self, path: &FsPath) -> Result<()> {
        let f = File::create(path).map_err(|e| HarnessError::io(path, e))?;
        self.write_to(BufWriter::new(f))
    }

    pub fn read_from<R: std::io::Read>(r: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(r);
        let header = rdr.headers()?.clone();
        if header.iter().ne(TRACE_HEADER) {
            return Err(HarnessError::Trace(format!("unexpected header `{}`", header.iter().collect::<Vec<_>>().join(","))));
        }
        let rows = rdr.deserialize().collect::<std::result::Result<Vec<TraceRow>, _>>()?;
        if rows.windows(2).any(|w| !(w[1].t > w[0].t)) {
            return Err(HarnessError::Trace("time column is not increasing".into()));
        }
        Ok(Self { rows })
    }

    pub fn read(path: &FsPath) -> Result<Self> {
        let f = File::open(path).map_err(|e| HarnessError::io(path, e))?;
        Self::read_from(BufReader::new(f))
    }

    pub fn control_rows(&self) -> impl Iterator<Item = &TraceRow> {
        self.rows.iter().filter(|r| r.is_control_row())
    }
}

/// Error statistics for one path segment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentStats {
    pub segment: usize,
    pub cycles: usize,
    pub delta_m: f64,
    pub max_abs_e_m: f64,
    /// Per-cycle signed error, m.
    pub errors_m: Vec<f64>,
}

/// Path-following metrics; a function of the trace and the path only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorMetrics {
    /// Cumulative path error, m.
    pub delta_m: f64,
    /// Completion time, s; absent if the final waypoint was not reached.
    pub t_c_s: Option<f64>,
    pub max_abs_e_m: f64,
    /// Control cycles run.
    pub cycles: usize,
    pub segments: Vec<SegmentStats>,
}

impl ErrorMetrics {
    /// Recomputes the metrics from a closed-loop trace. Segment membership
    /// and completion are recovered by replaying waypoint captures over the
    /// recorded positions.
    pub fn from_trace(trace: &Trace, path: &Path<f64>) -> Self {
        let mut progress = PathState::default();
        let mut segments: Vec<SegmentStats> = Vec::new();
        let mut t_c = None;
        let mut delta = 0.0;
        let mut max_e: f64 = 0.0;
        let mut cycles = 0;
        for r in &trace.rows {
            if progress.is_complete(path) {
                break;
            }
            let last_target = progress.segment + 1 == path.segment_count();
            if let Some(e) = r.e {
                if progress.observe(path, r.position()) {
                    progress.segment += 1;
                    progress.captured = false;
                }
                cycles += 1;
                delta += e.abs();
                max_e = max_e.max(e.abs());
                if segments.last().is_none_or(|s| s.segment != progress.segment) {
                    segments.push(SegmentStats {
                        segment: progress.segment,
                        cycles: 0,
                        delta_m: 0.0,
                        max_abs_e_m: 0.0,
                        errors_m: Vec::new(),
                    });
                }
                let s = segments.last_mut().expect("segment pushed");
                s.cycles += 1;
                s.delta_m += e.abs();
                s.max_abs_e_m = s.max_abs_e_m.max(e.abs());
                s.errors_m.push(e);
            } else if progress.observe(path, r.position()) && last_target {
                t_c = Some(r.t);
                progress.segment += 1;
            }
        }
        Self { delta_m: delta, t_c_s: t_c, max_abs_e_m: max_e, cycles, segments }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunMode {
    OpenLoop,
    ClosedLoop,
}

/// Contents of the metrics file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub name: String,
    pub mode: RunMode,
    /// Cumulative path error, m; closed loop only.
    pub delta_m: Option<f64>,
    /// Completion time, s.
    pub t_c_s: Option<f64>,
    pub max_abs_e_m: Option<f64>,
    /// Control cycles (closed loop) or whole gait cycles (open loop).
    pub cycles: usize,
    pub segments: Vec<SegmentStats>,
    pub final_x_m: f64,
    pub final_y_m: f64,
    pub final_xi_rad: f64,
    pub min_normal_n: f64,
    pub negative_normal_samples: usize,
    pub pi_enabled: bool,
    pub heading_bias_deg: f64,
    pub wind: Option<WindConfig>,
    pub path: Option<PathConfig>,
}

impl Metrics {
    pub fn write(&self, path: &FsPath) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text + "\n").map_err(|e| HarnessError::io(path, e))
    }

    pub fn read(path: &FsPath) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    /// The path-following part, for closed-loop runs.
    pub fn errors(&self) -> Option<ErrorMetrics> {
        Some(ErrorMetrics {
            delta_m: self.delta_m?,
            t_c_s: self.t_c_s,
            max_abs_e_m: self.max_abs_e_m?,
            cycles: self.cycles,
            segments: self.segments.clone(),
        })
    }

    pub fn set_errors(&mut self, e: ErrorMetrics) {
        self.delta_m = Some(e.delta_m);
        self.t_c_s = e.t_c_s;
        self.max_abs_e_m = Some(e.max_abs_e_m);
        self.cycles = e.cycles;
        self.segments = e.segments;
    }
}
