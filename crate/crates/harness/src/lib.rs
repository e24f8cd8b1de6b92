//! Scenario execution, trace and metrics files, friction calibration and
//! run comparison for the tripedal simulator. The `tripedal` binary exposes
//! these as subcommands.

pub mod calibrate;
pub mod compare;
pub mod config;
pub mod error;
pub mod mapfile;
pub mod scenario;
pub mod trace;

pub use calibrate::{calibrate_friction, CalibrationInput};
pub use compare::{compare_runs, flow_table, Comparison, FlowTable, RunRecord};
pub use config::{ScenarioConfig, WindConfig};
pub use error::{HarnessError, Result};
pub use scenario::{run_scenario, write_outputs, RunOutput};
pub use trace::{ErrorMetrics, Metrics, Trace, TraceRow, TRACE_HEADER};
