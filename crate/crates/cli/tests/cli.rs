use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn pbgent(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pbgent"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

const FIG4B: &str = "\
# fig4b written out by hand
gamma1 = 6
gamma2 = 6
omega12 = 0.4
omega1c = -0.6
omega2c = -1
eta_degrees = 180
initial = bright
t_max = 1000
dt_out = 0.5
";

#[test]
fn poles3b_lists_the_quoted_roots() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("poles.csv");
    let run = pbgent(&["preset", "poles3b", "-o", path(&out)]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let csv = fs::read_to_string(&out).unwrap();
    assert!(csv.starts_with("function_tag,re_x,im_x,class,residue_re,residue_im\n"));
    let im: Vec<f64> = csv.lines().skip(1).map(|l| l.split(',').nth(2).unwrap().parse().unwrap()).collect();
    for y in [-3.4, -6.0, -5.6, 6.0] {
        assert!(im.iter().any(|v| (v - y).abs() <= 0.05), "no row at {y}i");
    }
}

#[test]
fn unknown_preset_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.csv");
    let run = pbgent(&["preset", "nope", "-o", path(&out)]);
    assert_eq!(run.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&run.stderr).contains("nope"));
    assert!(!out.exists());
}

#[test]
fn presets_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for out in [&a, &b] {
        assert!(pbgent(&["preset", "fig5a", "-o", path(out)]).status.success());
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn fig5a_entanglement_dies_before_t_100() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fig5a.csv");
    assert!(pbgent(&["preset", "fig5a", "-o", path(&out)]).status.success());
    let csv = fs::read_to_string(&out).unwrap();
    let dies = csv.lines().skip(1).any(|l| {
        let cols: Vec<f64> = l.split(',').map(|c| c.parse().unwrap()).collect();
        cols[0] < 100.0 && cols[2] < 0.01
    });
    assert!(dies);
}

#[test]
fn config_file_matches_preset() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("fig4b.cfg");
    fs::write(&cfg, FIG4B).unwrap();
    let from_config = dir.path().join("config.csv");
    let from_preset = dir.path().join("preset.csv");
    assert!(pbgent(&["run", path(&cfg), "-o", path(&from_config)]).status.success());
    assert!(pbgent(&["preset", "fig4b", "-o", path(&from_preset)]).status.success());
    let csv = fs::read(&from_config).unwrap();
    assert_eq!(csv, fs::read(&from_preset).unwrap());
    assert_eq!(String::from_utf8(csv).unwrap().lines().count(), 2002);
}

#[test]
fn malformed_line_is_reported_with_its_number() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "eta_degrees = 90\ngamma1 == 3\n").unwrap();
    let run = pbgent(&["run", path(&cfg), "-o", path(&dir.path().join("x.csv"))]);
    assert_eq!(run.status.code(), Some(2));
    let err = String::from_utf8_lossy(&run.stderr);
    assert!(err.contains("line 2") && err.contains("gamma1 == 3"), "{err}");
}

#[test]
fn invalid_physics_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, FIG4B.replace("omega2c = -1", "omega2c = -0.9")).unwrap();
    let run = pbgent(&["run", path(&cfg), "-o", path(&dir.path().join("x.csv"))]);
    assert_eq!(run.status.code(), Some(2));
}

#[test]
fn missing_config_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let run = pbgent(&["run", path(&dir.path().join("absent.cfg")), "-o", path(&dir.path().join("x.csv"))]);
    assert_eq!(run.status.code(), Some(3));
}

#[test]
fn bad_flags_are_usage_errors() {
    let run = pbgent(&["preset", "fig2a", "-o", "x.csv", "--engine", "quantum"]);
    assert_eq!(run.status.code(), Some(2));
    let run = pbgent(&["sweep", "x.cfg", "--param", "mass", "--values", "1", "-o", "d"]);
    assert_eq!(run.status.code(), Some(2));
}

#[test]
fn empty_sweep_is_a_no_op() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("fig4b.cfg");
    fs::write(&cfg, FIG4B).unwrap();
    let out = dir.path().join("sweep");
    let run = pbgent(&["sweep", path(&cfg), "--param", "gamma", "--values", "", "-o", path(&out)]);
    assert_eq!(run.status.code(), Some(0));
    assert!(!out.exists());
}

#[test]
fn detuning_sweep_writes_one_file_per_pair_and_a_summary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("fig4b.cfg");
    fs::write(&cfg, FIG4B).unwrap();
    let out = dir.path().join("sweep");
    let run = pbgent(&[
        "sweep",
        path(&cfg),
        "--param",
        "omega1c_omega2c_pair",
        "--values",
        "-0.6:-1,-1.6:-2.6",
        "--tmax",
        "60",
        "-o",
        path(&out),
    ]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    assert!(out.join("omega1c_omega2c_pair_-0.6_-1.csv").exists());
    assert!(out.join("omega1c_omega2c_pair_-1.6_-2.6.csv").exists());
    let summary = fs::read_to_string(out.join("summary.csv")).unwrap();
    let rows: Vec<&str> = summary.lines().collect();
    assert_eq!(rows[0], "value,half_life,integrated_E_N");
    assert!(rows[1].starts_with("-0.6:-1,") && rows[2].starts_with("-1.6:-2.6,"));
}

#[test]
fn both_engines_agree_on_an_interference_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("eta90.cfg");
    fs::write(&cfg, FIG4B.replace("eta_degrees = 180", "eta_degrees = 90")).unwrap();
    let out = dir.path().join("both.csv");
    let run = pbgent(&[
        "run", path(&cfg), "-o", path(&out), "--engine", "both", "--tmax", "30", "--modes", "1000",
    ]);
    assert!(run.status.success());
    let log = String::from_utf8_lossy(&run.stderr);
    let dev: f64 = log
        .split("deviation ")
        .nth(1)
        .and_then(|s| s.split(',').next())
        .and_then(|s| s.parse().ok())
        .unwrap_or_else(|| panic!("no deviation line in `{log}`"));
    assert!(dev <= 5e-3, "{dev}");
}

#[test]
fn thread_cap_does_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let capped = dir.path().join("capped.csv");
    let free = dir.path().join("free.csv");
    let run = Command::new(env!("CARGO_BIN_EXE_pbgent"))
        .args(["preset", "fig2a", "-o", path(&capped)])
        .env("THREADS", "1")
        .output()
        .unwrap();
    assert!(run.status.success());
    assert!(pbgent(&["preset", "fig2a", "-o", path(&free)]).status.success());
    assert_eq!(fs::read(&capped).unwrap(), fs::read(&free).unwrap());
}
