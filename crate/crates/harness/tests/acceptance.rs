//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits with
//! a failure status if any criterion fails.

use std::cell::Cell;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};
use tripedal_core::dynamics::{contacts_from_angles, drag_force, friction_forces, integrate, solve_normal_forces};
use tripedal_core::gait::{build_gait_map, canonical_gait, run_cycles, CanonicalGait, GaitMap, MapBuildOptions, TRANSIENT_CYCLES};
use tripedal_core::model::{GaitParams, RobotParams, RobotState, WindField};
use tripedal_core::ode::SolverOptions;
use tripedal_harness::calibrate::{calibrate_friction, slide_down_ramp, CalibrationInput, GRAVITY};
use tripedal_harness::compare::{flow_table, RunRecord};
use tripedal_harness::config::ScenarioConfig;
use tripedal_harness::scenario::{run_scenario, write_outputs};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn wrap180(d: f64) -> f64 {
    (d + 180.0).rem_euclid(360.0) - 180.0
}

fn force_balance() -> Outcome {
    let started = Instant::now();
    let cfg = Config { cases: 1000, failure_persistence: None, ..Config::default() };
    let mut runner = TestRunner::new_with_rng(cfg, TestRng::deterministic_rng(RngAlgorithm::ChaCha));
    let amp = 30f64.to_radians();
    let strategy = (
        (-1.0..1.0f64, -1.0..1.0f64, -PI..PI, -0.5..0.5f64, -0.5..0.5f64, -6.0..6.0f64),
        prop::array::uniform3(-amp..amp),
        prop::array::uniform3(-2.0 * PI * amp..2.0 * PI * amp),
        0.2..1.0f64,
    );
    let worst_force = Cell::new(0.0f64);
    let worst_torque = Cell::new(0.0f64);
    let worst_friction = Cell::new(0.0f64);
    let cases = Cell::new(0usize);
    let result = runner.run(&strategy, |((x, y, xi, vx, vy, w), angles, rates, mu)| {
        let p = RobotParams::with_mu(mu);
        let state = RobotState { t: 0.0, x, y, xi, vx, vy, xi_dot: w };
        let contacts = contacts_from_angles(&state, angles, rates, &p);
        let normals = solve_normal_forces(&contacts, state.position(), &p).map_err(|e| TestCaseError::fail(e.to_string()))?;
        let mg = p.weight();
        let mut sum = 0.0;
        let mut moment = [0.0, 0.0];
        for i in 0..3 {
            let n = normals.n[i];
            sum += n;
            moment[0] += n * (contacts.positions[i][0] - x);
            moment[1] += n * (contacts.positions[i][1] - y);
        }
        let force_res = (sum - mg).abs() / mg;
        let torque_res = moment[0].hypot(moment[1]) / (mg * (p.hinge_radius + p.limb_length));
        let friction = friction_forces(&contacts, &normals, &p);
        let mut fric_res = 0.0f64;
        for i in 0..3 {
            let v = contacts.velocities[i];
            if v[0].hypot(v[1]) > p.creep_velocity {
                let expect = mu * normals.n[i].abs();
                fric_res = fric_res.max((friction[i][0].hypot(friction[i][1]) - expect).abs() / mg);
            }
        }
        worst_force.set(worst_force.get().max(force_res));
        worst_torque.set(worst_torque.get().max(torque_res));
        worst_friction.set(worst_friction.get().max(fric_res));
        cases.set(cases.get() + 1);
        prop_assert!(force_res <= 1e-9 && torque_res <= 1e-9 && fric_res <= 1e-9);
        Ok(())
    });
    let elapsed = started.elapsed();
    outcome(
        result.is_ok() && cases.get() >= 1000 && elapsed < Duration::from_secs(5),
        format!(
            "{} states, force {:.1e}, torque {:.1e}, friction {:.1e} (relative), {:.2} s{}",
            cases.get(),
            worst_force.get(),
            worst_torque.get(),
            worst_friction.get(),
            elapsed.as_secs_f64(),
            result.err().map(|e| format!(", {e}")).unwrap_or_default()
        ),
    )
}

fn cycle_states(gait: &GaitParams<f64>, p: &RobotParams<f64>, cycles: usize) -> Vec<RobotState<f64>> {
    let seg = integrate(&RobotState::zero(), gait, None, p, cycles as f64, &SolverOptions::default()).unwrap();
    let mut out: Vec<RobotState<f64>> =
        seg.samples.iter().map(|s| s.state).filter(|s| (s.t - s.t.round()).abs() < 1e-9).collect();
    out.dedup_by(|a, b| a.t == b.t);
    assert_eq!(out.len(), cycles + 1);
    out
}

fn translation() -> Outcome {
    let p = RobotParams::with_mu(0.85);
    let states = cycle_states(&GaitParams::from_amplitudes([0.0, 30.0, -30.0]), &p, 5);
    let dist: Vec<f64> = states.iter().map(|s| s.x.hypot(s.y)).collect();
    let monotone = dist.windows(2).all(|w| w[1] > w[0]);
    let headings: Vec<f64> = states
        .windows(2)
        .map(|w| wrap180((w[1].y - w[0].y).atan2(w[1].x - w[0].x).to_degrees() - w[0].xi.to_degrees()))
        .collect();
    let worst = headings.iter().fold(0.0f64, |a, h| a.max(h.abs()));
    let end = states[5];
    let net = wrap180(end.y.atan2(end.x).to_degrees());
    let rot = end.xi.to_degrees();
    outcome(
        monotone && worst <= 5.0 && net.abs() <= 5.0 && rot.abs() < 5.0,
        format!("net {:.4} m, heading {net:.3} deg, worst cycle {worst:.3} deg, rotation {rot:.3} deg", dist[5]),
    )
}

fn rotation() -> Outcome {
    let p = RobotParams::nominal();
    let states = cycle_states(&canonical_gait(CanonicalGait::RotateCw), &p, 5);
    let disp: Vec<f64> = states.windows(2).map(|w| (w[1].x - w[0].x).hypot(w[1].y - w[0].y)).collect();
    let turn: Vec<f64> = states.windows(2).map(|w| (w[1].xi - w[0].xi).to_degrees()).collect();
    let max_disp = disp.iter().fold(0.0f64, |a, d| a.max(*d));
    let worst_change = turn.windows(2).map(|w| (w[1] - w[0]).abs() / w[0].abs()).fold(0.0f64, f64::max);
    let pass = max_disp < 0.005 && turn.iter().all(|t| t.abs() > 0.0) && worst_change <= 0.1;
    outcome(
        pass,
        format!(
            "max displacement {max_disp:.2e} m/cycle, turn {:?} deg/cycle, worst change {:.2}%",
            turn.iter().map(|t| (t * 1000.0).round() / 1000.0).collect::<Vec<_>>(),
            worst_change * 100.0
        ),
    )
}

fn map_build() -> (Outcome, GaitMap<f64>) {
    let started = Instant::now();
    let map = build_gait_map(&RobotParams::nominal(), &MapBuildOptions::default()).expect("gait map");
    let elapsed = started.elapsed();
    let monotone = map.per_mu.iter().all(|m| m.samples.windows(2).all(|w| w[1].theta_avg > w[0].theta_avg));
    let mut spread = 0.0f64;
    let mut at = 0.0;
    for k in 0..map.per_mu[0].samples.len() {
        let v: Vec<f64> = map.per_mu.iter().map(|m| m.samples[k].theta_avg).collect();
        let s = v.iter().fold(f64::MIN, |a, b| a.max(*b)) - v.iter().fold(f64::MAX, |a, b| a.min(*b));
        if s > spread {
            spread = s;
            at = map.per_mu[0].samples[k].alpha;
        }
    }
    let grid_ok = map.mu_list == [0.33, 0.59, 0.87] && map.per_mu.iter().all(|m| m.samples.len() == 31);
    let out = outcome(
        grid_ok && monotone && spread <= 5.0 && elapsed < Duration::from_secs(60),
        format!(
            "monotone {monotone}, max spread {spread:.2} deg at alpha {at}, {:.1} s",
            elapsed.as_secs_f64()
        ),
    );
    (out, map)
}

fn omnidirectional(map: &GaitMap<f64>) -> Outcome {
    let mut details = Vec::new();
    let mut pass = true;
    for &mu in &map.mu_list {
        let p = RobotParams::with_mu(mu);
        let mut total = 0.0;
        let mut worst = (0.0f64, 0.0);
        for k in 1..=24 {
            let target = 15.0 * k as f64;
            let gait = map.gait_for_heading(target);
            let run = run_cycles(&RobotState::zero(), &gait, &p, 8, &SolverOptions::default()).unwrap();
            let (mean, _) = run.settled_heading(TRANSIENT_CYCLES);
            let dev = wrap180(mean - target).abs();
            total += dev;
            if dev > worst.0 {
                worst = (dev, target);
            }
        }
        let mad = total / 24.0;
        pass &= mad <= 5.0;
        details.push(format!("mu {mu}: {mad:.2} deg (worst {:.2} at {})", worst.0, worst.1));
    }
    outcome(pass, format!("mean |deviation| {}", details.join(", ")))
}

fn scenario_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

struct RectangleRuns {
    records: Vec<RunRecord>,
    slowest: (f64, String),
    _dir: tempfile::TempDir,
}

impl RectangleRuns {
    fn delta(&self, name: &str, pi: bool) -> f64 {
        let r = self.records.iter().find(|r| r.metrics.name == name && r.metrics.pi_enabled == pi).unwrap();
        r.errors().unwrap().delta_m
    }
}

fn rectangle_runs(map: &GaitMap<f64>) -> RectangleRuns {
    let dir = tempfile::tempdir().unwrap();
    let mut records = Vec::new();
    let mut slowest = (0.0, String::new());
    for name in ["rectangle", "rectangle_flow0", "rectangle_flow25"] {
        for pi in [false, true] {
            let mut cfg = ScenarioConfig::from_file(&scenario_dir().join(format!("{name}.toml"))).unwrap();
            if !pi {
                cfg.disable_pi();
            }
            let started = Instant::now();
            let out = run_scenario(&cfg, Some(map)).unwrap();
            let secs = started.elapsed().as_secs_f64();
            if secs > slowest.0 {
                slowest = (secs, format!("{name} pi={pi}"));
            }
            let run_dir = dir.path().join(format!("{name}_{pi}"));
            write_outputs(&cfg, &out, &run_dir).unwrap();
            records.push(RunRecord::load(&run_dir).unwrap());
        }
    }
    RectangleRuns { records, slowest, _dir: dir }
}

fn pi_benefit(runs: &RectangleRuns, name: &str, limit: f64) -> Outcome {
    let (a, b) = (runs.delta(name, false), runs.delta(name, true));
    let ratio = b / a;
    outcome(ratio <= limit, format!("{name}: Delta {b:.4} m with PI, {a:.4} m without, ratio {ratio:.3} (limit {limit})"))
}

fn wind_force_ok() -> (bool, f64) {
    let f = drag_force(&WindField::<f64>::nominal(0.0));
    (f[1] == 0.0 && (f[0] - 0.364).abs() < 0.001, f[0])
}

fn calibration() -> Outcome {
    let slope = 50f64.to_radians();
    let mut worst = 0.0f64;
    let mut ok = true;
    for mu in [0.33, 0.85] {
        match slide_down_ramp(0.1, slope, 0.5, mu, GRAVITY).and_then(|v| {
            calibrate_friction(&CalibrationInput { mass: 0.1, slope, travel: 0.5, final_speed: v })
        }) {
            Ok(back) => worst = worst.max((back - mu).abs()),
            Err(_) => ok = false,
        }
    }
    outcome(ok && worst <= 1e-6, format!("worst recovery error {worst:.2e}"))
}

fn convergence() -> Outcome {
    let cases: [(&str, GaitParams<f64>, f64, Option<WindField<f64>>); 4] = [
        ("translate", canonical_gait(CanonicalGait::TranslateLimb(1)), 0.85, None),
        ("rotate", canonical_gait(CanonicalGait::RotateCw), 0.85, None),
        ("zone 1", GaitParams::from_amplitudes([15.0, 30.0, -30.0]), 0.33, None),
        ("zone 4 in wind", GaitParams::from_amplitudes([-10.0, -30.0, 30.0]), 0.59, Some(WindField::nominal(0.4))),
    ];
    let mut worst_pos = 0.0f64;
    let mut worst_xi = 0.0f64;
    for (_, gait, mu, wind) in &cases {
        let p = RobotParams::with_mu(*mu);
        let base = SolverOptions::default();
        let end = |o: &SolverOptions<f64>| {
            integrate(&RobotState::zero(), gait, wind.as_ref(), &p, 10.0, o).unwrap().final_state
        };
        let (a, b) = (end(&base), end(&base.scaled_tolerances(0.5)));
        worst_pos = worst_pos.max((a.x - b.x).hypot(a.y - b.y));
        worst_xi = worst_xi.max((a.xi - b.xi).abs());
    }
    outcome(
        worst_pos < 1e-4 && worst_xi < 1e-3,
        format!("{} runs, endpoint shift {worst_pos:.2e} m, {worst_xi:.2e} rad", cases.len()),
    )
}

fn flow_structure(runs: &RectangleRuns) -> Outcome {
    let table = flow_table(&runs.records).unwrap();
    let six = table.flows.len() == 3 && table.cells.iter().all(|c| c[0].is_some() && c[1].is_some());
    print!("{table}");
    outcome(
        six && table.flow_hurts() && table.pi_helps() && runs.slowest.0 < 10.0,
        format!(
            "six cells {six}, flow raises Delta {}, PI lowers Delta {}, slowest run {:.2} s ({})",
            table.flow_hurts(),
            table.pi_helps(),
            runs.slowest.0,
            runs.slowest.1
        ),
    )
}

fn main() -> ExitCode {
    let mut results = Vec::new();
    let mut report = |n: usize, o: Outcome| {
        println!("criterion {n}: {} {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        results.push((n, o.pass));
    };
    report(1, force_balance());
    report(2, translation());
    report(3, rotation());
    let (built, map) = map_build();
    report(4, built);
    report(5, omnidirectional(&map));
    let runs = rectangle_runs(&map);
    report(6, pi_benefit(&runs, "rectangle", 0.6));
    let (force_ok, force) = wind_force_ok();
    let mut seven = pi_benefit(&runs, "rectangle_flow0", 0.5);
    seven.pass &= force_ok;
    seven.detail += &format!(", drag {force:.5} N along +x");
    report(7, seven);
    report(8, calibration());
    report(9, convergence());
    report(10, flow_structure(&runs));
    let failed: Vec<usize> = results.iter().filter(|r| !r.1).map(|r| r.0).collect();
    if failed.is_empty() {
        println!("acceptance: all criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failing criteria {failed:?}");
        ExitCode::FAILURE
    }
}
