use std::path::Path;
use std::process::{Command, Output};

use tripedal_harness::Metrics;

fn tripedal(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tripedal")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn calibrate_from_flags_and_file() {
    let o = tripedal(&["calibrate", "--mass", "0.1", "--slope-deg", "30", "--travel", "0.5", "--speed", "0.8107"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o).trim(), "mu = 0.499990");

    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "c.toml", "mass = 0.1\nslope_deg = 30.0\ntravel = 0.5\nfinal_speed = 0.0\n");
    let o = tripedal(&["calibrate", "--config", &f]);
    assert_eq!(stdout(&o).trim(), "mu = 0.577350");

    let o = tripedal(&["calibrate", "--mass", "0.1", "--slope-deg", "30", "--travel", "0.5", "--speed", "5"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("non-physical"));
}

#[test]
fn simulate_with_wind_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "still.toml",
        "[robot]\nfriction_mu = 0.33\n[gait]\nmode = \"explicit\"\namplitudes_deg = [0.0, 0.0, 0.0]\n[run]\nduration_s = 0.5\n",
    );
    let out = dir.path().join("run");
    let o = tripedal(&["simulate", "--config", &cfg, "--out", out.to_str().unwrap(), "--wind", "30,-90"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let m = Metrics::read(&out.join("metrics.json")).unwrap();
    assert_eq!(m.wind.unwrap().direction_deg, -90.0);
    assert!(m.final_y_m < 0.0);
    let header = std::fs::read_to_string(out.join("trace.csv")).unwrap();
    assert!(header.starts_with("t,x,y,xi,vx,vy,xidot,phi1,phi2,phi3,N1,N2,N3,e,theta_D,theta_PI,zone,alpha\n"));
}

#[test]
fn bad_config_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "bad.toml",
        "[gait]\nmode = \"explicit\"\namplitudes_deg = [0.0, 45.0, 0.0]\n[run]\nduration_s = 1.0\n",
    );
    let o = tripedal(&["simulate", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("`gait`"), "{}", stderr(&o));

    let open = write(dir.path(), "open.toml", "[gait]\nmode = \"canonical\"\nkind = \"rotate_cw\"\n[run]\nmax_cycles = 1\n");
    let o = tripedal(&["follow", "--config", &open]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("gait.mode"), "{}", stderr(&o));
}

#[test]
fn map_follow_compare_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let map_cfg = write(d, "map.toml", "mu_list = [0.59]\nalpha_step_deg = 5.0\ncycles = 4\n");
    let o = tripedal(&["gaitmap", "--config", &map_cfg, "--out", d.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let map = d.join("gaitmap.json");
    assert!(map.exists());

    let scen = write(
        d,
        "rect.toml",
        r#"
        [robot]
        friction_mu = 0.59
        [gait]
        mode = "closed_loop"
        heading_bias_deg = 5.0
        path = { waypoints = [[0.0, 0.0], [0.1, 0.0], [0.1, 0.06], [0.0, 0.06]], closed = true }
        "#,
    );
    let pi = d.join("pi");
    let nopi = d.join("nopi");
    let o = tripedal(&["follow", "--config", &scen, "--map", map.to_str().unwrap(), "--out", pi.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("Delta"));
    let o = tripedal(&[
        "follow",
        "--config",
        &scen,
        "--map",
        map.to_str().unwrap(),
        "--out",
        nopi.to_str().unwrap(),
        "--no-pi",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let m = Metrics::read(&nopi.join("metrics.json")).unwrap();
    assert!(!m.pi_enabled);
    assert!(m.t_c_s.is_some());

    let report = d.join("report");
    let o = tripedal(&["compare", nopi.to_str().unwrap(), pi.to_str().unwrap(), "--out", report.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("(no PI)") && text.contains("(PI)") && text.contains("T_c (s)"));
    assert_eq!(std::fs::read_to_string(report.join("report.txt")).unwrap(), text);
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(report.join("report.json")).unwrap()).unwrap();
    assert!(json["a"]["delta_m"].as_f64().unwrap() > 0.0);
}

#[test]
fn batch_runs_go_to_subdirectories() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let a = write(d, "a.toml", "[gait]\nmode = \"canonical\"\nkind = \"rotate_ccw\"\n[run]\nmax_cycles = 1\n");
    let b = write(d, "b.toml", "[gait]\nmode = \"canonical\"\nkind = \"translate_limb_3\"\n[run]\nmax_cycles = 1\n");
    let out = d.join("batch");
    let o = tripedal(&["simulate", "--config", &a, "--config", &b, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(out.join("a/trace.csv").exists() && out.join("b/metrics.json").exists());
}
