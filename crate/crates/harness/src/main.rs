use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use tripedal_core::gait::GaitMap;
use tripedal_harness::calibrate::{calibrate_friction, CalibrationInput};
use tripedal_harness::compare::{compare_runs, flow_table, RunRecord};
use tripedal_harness::config::{MapConfig, ScenarioConfig, WindConfig};
use tripedal_harness::mapfile::{build_map, load_map, save_map};
use tripedal_harness::scenario::{run_scenario, write_outputs};
use tripedal_harness::{HarnessError, Result};

#[derive(Parser)]
#[command(name = "tripedal", version, about = "Tripedal robot simulator and path-following harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Scenario file(s); several run concurrently, each into its own
    /// subdirectory of --out.
    #[arg(long = "config", required = true)]
    configs: Vec<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Uniform wind as <speed,direction_deg>, replacing the scenario's.
    #[arg(long, allow_hyphen_values = true)]
    wind: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Run open-loop gait scenarios.
    Simulate {
        #[command(flatten)]
        common: Common,
    },
    /// Run closed-loop path-following scenarios.
    Follow {
        #[command(flatten)]
        common: Common,
        /// Gait map file, replacing the scenario's.
        #[arg(long)]
        map: Option<PathBuf>,
        /// Zero both controller gains.
        #[arg(long)]
        no_pi: bool,
    },
    /// Build the gait map and write it to <out>/gaitmap.json.
    Gaitmap {
        /// Map settings (robot, mu_list, alpha_step_deg, cycles).
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Estimate a kinetic friction coefficient from an inclined-plane slide.
    Calibrate {
        /// TOML file with mass, slope_deg, travel and final_speed.
        #[arg(long, conflicts_with_all = ["mass", "slope_deg", "travel", "speed"])]
        config: Option<PathBuf>,
        /// kg
        #[arg(long)]
        mass: Option<f64>,
        /// deg
        #[arg(long)]
        slope_deg: Option<f64>,
        /// m
        #[arg(long)]
        travel: Option<f64>,
        /// Final speed, m/s.
        #[arg(long)]
        speed: Option<f64>,
    },
    /// Compare run directories (each holding trace.csv and metrics.json).
    /// Two runs give a side-by-side report; more give the flow-by-control
    /// summary table.
    Compare {
        #[arg(required = true, num_args = 2..)]
        runs: Vec<PathBuf>,
        /// Write report.txt and report.json here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate { common } => run_batch(&common, None, false, false),
        Command::Follow { common, map, no_pi } => {
            let map = map.as_deref().map(load_map).transpose()?;
            run_batch(&common, map.as_ref(), no_pi, true)
        }
        Command::Gaitmap { config, out } => gaitmap(config.as_deref(), &out),
        Command::Calibrate { config, mass, slope_deg, travel, speed } => {
            let input = match config {
                Some(p) => read_calibration(&p)?,
                None => {
                    let need = |v: Option<f64>, f: &str| v.ok_or_else(|| HarnessError::config(f, "missing"));
                    CalibrationInput {
                        mass: need(mass, "--mass")?,
                        slope: need(slope_deg, "--slope-deg")?.to_radians(),
                        travel: need(travel, "--travel")?,
                        final_speed: need(speed, "--speed")?,
                    }
                }
            };
            println!("mu = {:.6}", calibrate_friction(&input)?);
            Ok(())
        }
        Command::Compare { runs, out } => compare(&runs, out.as_deref()),
    }
}

fn load_scenario(path: &Path, common: &Common, no_pi: bool, closed_loop: bool) -> Result<ScenarioConfig> {
    let mut cfg = ScenarioConfig::from_file(path)?;
    if cfg.is_closed_loop() != closed_loop {
        let want = if closed_loop { "follow needs a closed_loop" } else { "simulate needs an explicit or canonical" };
        return Err(HarnessError::config("gait.mode", format!("{}: {want} gait source", path.display())));
    }
    if let Some(w) = &common.wind {
        cfg.wind = Some(WindConfig::parse_pair(w)?);
    }
    if no_pi {
        cfg.disable_pi();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run_batch(common: &Common, map: Option<&GaitMap<f64>>, no_pi: bool, closed_loop: bool) -> Result<()> {
    let configs = common
        .configs
        .iter()
        .map(|p| load_scenario(p, common, no_pi, closed_loop))
        .collect::<Result<Vec<_>>>()?;
    let single = configs.len() == 1;
    let results: Vec<Result<String>> = std::thread::scope(|s| {
        let handles: Vec<_> = configs
            .iter()
            .map(|cfg| {
                s.spawn(move || {
                    let dir = if single { common.out.clone() } else { common.out.join(&cfg.name) };
                    let started = Instant::now();
                    let out = run_scenario(cfg, map)?;
                    let (trace, metrics) = write_outputs(cfg, &out, &dir)?;
                    let m = &out.metrics;
                    let mut line = format!("{}: {} rows", cfg.name, out.trace.rows.len());
                    if let Some(d) = m.delta_m {
                        line += &format!(", Delta {d:.4} m");
                    }
                    if let Some(t) = m.t_c_s {
                        line += &format!(", T_c {t:.2} s");
                    } else if closed_loop {
                        line += ", path not completed";
                    }
                    if m.negative_normal_samples > 0 {
                        line += &format!(", {} samples with a negative normal force", m.negative_normal_samples);
                    }
                    line += &format!(
                        " ({:.2} s) -> {}, {}",
                        started.elapsed().as_secs_f64(),
                        trace.display(),
                        metrics.display()
                    );
                    Ok(line)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("scenario thread panicked")).collect()
    });
    let mut first_err = None;
    for r in results {
        match r {
            Ok(line) => println!("{line}"),
            Err(e) if first_err.is_none() => first_err = Some(e),
            Err(e) => eprintln!("error: {e}"),
        }
    }
    first_err.map_or(Ok(()), Err)
}

fn gaitmap(config: Option<&Path>, out: &Path) -> Result<()> {
    let cfg = config.map(MapConfig::from_file).transpose()?.unwrap_or_default();
    let started = Instant::now();
    let map = build_map(&cfg)?;
    std::fs::create_dir_all(out).map_err(|e| HarnessError::io(out, e))?;
    let path = out.join("gaitmap.json");
    save_map(&map, &path)?;
    println!(
        "built {} nodes for mu {:?} in {:.1} s; largest spread across mu {:.2} deg -> {}",
        map.nodes.len(),
        map.mu_list,
        started.elapsed().as_secs_f64(),
        map.max_mu_spread(),
        path.display()
    );
    Ok(())
}

#[derive(serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct CalibrationFile {
    mass: f64,
    slope_deg: f64,
    travel: f64,
    final_speed: f64,
}

fn read_calibration(path: &Path) -> Result<CalibrationInput> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    let f: CalibrationFile = toml::from_str(&text).map_err(|source| HarnessError::Toml { path: path.into(), source })?;
    Ok(CalibrationInput { mass: f.mass, slope: f.slope_deg.to_radians(), travel: f.travel, final_speed: f.final_speed })
}

fn compare(dirs: &[PathBuf], out: Option<&Path>) -> Result<()> {
    let runs = dirs.iter().map(|d| RunRecord::load(d)).collect::<Result<Vec<_>>>()?;
    let (text, json) = if runs.len() == 2 {
        let c = compare_runs(&runs[0], &runs[1])?;
        (c.to_string(), serde_json::to_string_pretty(&c)?)
    } else {
        let t = flow_table(&runs)?;
        let mut text = t.to_string();
        text += &format!(
            "flow raises uncontrolled Delta: {}\nPI lowers Delta in every column: {}\n",
            t.flow_hurts(),
            t.pi_helps()
        );
        (text, serde_json::to_string_pretty(&t)?)
    };
    print!("{text}");
    if let Some(dir) = out {
        std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
        let p = dir.join("report.txt");
        std::fs::write(&p, &text).map_err(|e| HarnessError::io(&p, e))?;
        let p = dir.join("report.json");
        std::fs::write(&p, json + "\n").map_err(|e| HarnessError::io(&p, e))?;
    }
    Ok(())
}
