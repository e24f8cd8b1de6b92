//! Side-by-side comparison of runs and the flow-by-control summary table.

use std::fmt;
use std::path::Path as FsPath;

use serde::Serialize;

use crate::error::{HarnessError, Result};
use crate::scenario::recompute_errors;
use crate::trace::{ErrorMetrics, Metrics, Trace};

/// A finished run as read back from disk.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub label: String,
    pub trace: Trace,
    pub metrics: Metrics,
}

impl RunRecord {
    /// Loads `trace.csv` and `metrics.json` from a run directory.
    pub fn load(dir: &FsPath) -> Result<Self> {
        let trace = Trace::read(&dir.join("trace.csv"))?;
        let metrics = Metrics::read(&dir.join("metrics.json"))?;
        let mut label = if metrics.name.is_empty() {
            dir.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
        } else {
            metrics.name.clone()
        };
        if metrics.path.is_some() {
            label += if metrics.pi_enabled { " (PI)" } else { " (no PI)" };
        }
        Ok(Self { label, trace, metrics })
    }

    /// Path-following metrics recomputed from the trace.
    pub fn errors(&self) -> Result<ErrorMetrics> {
        recompute_errors(&self.trace, &self.metrics)
            .ok_or_else(|| HarnessError::Trace(format!("{}: not a closed-loop run", self.label)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SegmentComparison {
    pub segment: usize,
    pub delta_a_m: f64,
    pub delta_b_m: f64,
    pub max_abs_e_a_m: f64,
    pub max_abs_e_b_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub label_a: String,
    pub label_b: String,
    pub a: ErrorMetrics,
    pub b: ErrorMetrics,
    pub segments: Vec<SegmentComparison>,
}

impl Comparison {
    /// `B - A`.
    pub fn delta_change_m(&self) -> f64 {
        self.b.delta_m - self.a.delta_m
    }

    /// `Delta_B / Delta_A`.
    pub fn delta_ratio(&self) -> f64 {
        self.b.delta_m / self.a.delta_m
    }

    pub fn t_c_change_s(&self) -> Option<f64> {
        Some(self.b.t_c_s? - self.a.t_c_s?)
    }

    pub fn max_abs_e_change_m(&self) -> f64 {
        self.b.max_abs_e_m - self.a.max_abs_e_m
    }
}

/// Compares two closed-loop runs over the same path, using metrics
/// recomputed from their traces.
pub fn compare_runs(a: &RunRecord, b: &RunRecord) -> Result<Comparison> {
    if a.metrics.path != b.metrics.path {
        return Err(HarnessError::PathMismatch);
    }
    let (ea, eb) = (a.errors()?, b.errors()?);
    let n = ea.segments.iter().chain(&eb.segments).map(|s| s.segment + 1).max().unwrap_or(0);
    let segments = (0..n)
        .map(|k| {
            let pick = |e: &ErrorMetrics| {
                e.segments.iter().find(|s| s.segment == k).map_or((0.0, 0.0), |s| (s.delta_m, s.max_abs_e_m))
            };
            let ((da, ma), (db, mb)) = (pick(&ea), pick(&eb));
            SegmentComparison { segment: k, delta_a_m: da, delta_b_m: db, max_abs_e_a_m: ma, max_abs_e_b_m: mb }
        })
        .collect();
    Ok(Comparison { label_a: a.label.clone(), label_b: b.label.clone(), a: ea, b: eb, segments })
}

fn fmt_opt(v: Option<f64>, prec: usize) -> String {
    v.map_or_else(|| "-".to_string(), |v| format!("{v:.prec$}"))
}

impl fmt::Display for Comparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<14} {:>22} {:>22} {:>12}", "", self.label_a, self.label_b, "B - A")?;
        writeln!(f, "{:<14} {:>22.4} {:>22.4} {:>12.4}", "Delta (m)", self.a.delta_m, self.b.delta_m, self.delta_change_m())?;
        writeln!(
            f,
            "{:<14} {:>22} {:>22} {:>12}",
            "T_c (s)",
            fmt_opt(self.a.t_c_s, 2),
            fmt_opt(self.b.t_c_s, 2),
            fmt_opt(self.t_c_change_s(), 2)
        )?;
        writeln!(
            f,
            "{:<14} {:>22.4} {:>22.4} {:>12.4}",
            "max |e| (m)",
            self.a.max_abs_e_m,
            self.b.max_abs_e_m,
            self.max_abs_e_change_m()
        )?;
        writeln!(f, "{:<14} {:>22} {:>22} {:>12}", "cycles", self.a.cycles, self.b.cycles, self.b.cycles as i64 - self.a.cycles as i64)?;
        for s in &self.segments {
            writeln!(
                f,
                "{:<14} {:>22.4} {:>22.4} {:>12.4}",
                format!("segment {} D", s.segment + 1),
                s.delta_a_m,
                s.delta_b_m,
                s.delta_b_m - s.delta_a_m
            )?;
        }
        Ok(())
    }
}

/// Flow condition of a run, the column of the summary table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Flow {
    None,
    /// Wind towards this direction, deg.
    Angle(f64),
}

impl Flow {
    fn of(m: &Metrics) -> Self {
        match m.wind {
            Some(w) if w.speed > 0.0 => Flow::Angle(w.direction_deg),
            _ => Flow::None,
        }
    }

    fn sort_key(&self) -> f64 {
        match self {
            Flow::None => f64::NEG_INFINITY,
            Flow::Angle(a) => *a,
        }
    }
}

impl fmt::Display for Flow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Flow::None => write!(f, "No flow"),
            Flow::Angle(a) => write!(f, "{a}° flow"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Cell {
    pub delta_m: f64,
    pub t_c_s: Option<f64>,
}

/// Runs arranged by flow condition (columns) and controller (rows).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlowTable {
    pub flows: Vec<Flow>,
    /// Indexed `[flow][0 = no PI, 1 = PI]`.
    pub cells: Vec<[Option<Cell>; 2]>,
}

/// Builds the table from closed-loop runs sharing one path. Each
/// (flow, controller) combination may appear once.
pub fn flow_table(runs: &[RunRecord]) -> Result<FlowTable> {
    let mut flows: Vec<Flow> = Vec::new();
    for r in runs {
        let f = Flow::of(&r.metrics);
        if !flows.contains(&f) {
            flows.push(f);
        }
    }
    flows.sort_by(|a, b| a.sort_key().total_cmp(&b.sort_key()));
    let mut cells = vec![[None, None]; flows.len()];
    let path = runs.first().map(|r| &r.metrics.path);
    for r in runs {
        if Some(&r.metrics.path) != path {
            return Err(HarnessError::PathMismatch);
        }
        let e = r.errors()?;
        let col = flows.iter().position(|f| *f == Flow::of(&r.metrics)).expect("flow listed");
        let slot = &mut cells[col][usize::from(r.metrics.pi_enabled)];
        if slot.is_some() {
            return Err(HarnessError::Trace(format!("{}: duplicate {} run", r.label, Flow::of(&r.metrics))));
        }
        *slot = Some(Cell { delta_m: e.delta_m, t_c_s: e.t_c_s });
    }
    Ok(FlowTable { flows, cells })
}

impl FlowTable {
    pub fn cell(&self, flow: usize, pi: bool) -> Option<Cell> {
        self.cells[flow][usize::from(pi)]
    }

    /// Every flow condition has a larger uncontrolled Delta than the no-flow
    /// column.
    pub fn flow_hurts(&self) -> bool {
        let Some(base) = self.flows.iter().position(|f| *f == Flow::None) else {
            return false;
        };
        let Some(b) = self.cell(base, false) else {
            return false;
        };
        (0..self.flows.len())
            .filter(|&i| i != base)
            .all(|i| self.cell(i, false).is_some_and(|c| c.delta_m > b.delta_m))
    }

    /// Control lowers Delta in every column.
    pub fn pi_helps(&self) -> bool {
        (0..self.flows.len()).all(|i| match (self.cell(i, false), self.cell(i, true)) {
            (Some(n), Some(p)) => p.delta_m < n.delta_m,
            _ => false,
        })
    }
}

impl fmt::Display for FlowTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:<8}", "")?;
        for fl in &self.flows {
            write!(f, "| {:^19} ", fl.to_string())?;
        }
        writeln!(f)?;
        write!(f, "{:<8}", "")?;
        for _ in &self.flows {
            write!(f, "| {:>9} {:>9} ", "Delta", "T_c")?;
        }
        writeln!(f)?;
        for (pi, label) in [(false, "No PI"), (true, "With PI")] {
            write!(f, "{label:<8}")?;
            for i in 0..self.flows.len() {
                match self.cell(i, pi) {
                    Some(c) => write!(f, "| {:>9.2} {:>9} ", c.delta_m, fmt_opt(c.t_c_s, 1))?,
                    None => write!(f, "| {:>9} {:>9} ", "-", "-")?,
                }
            }
            writeln!(f)?;
        }
        Ok(())
    }
}
