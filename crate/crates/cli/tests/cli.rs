use std::path::{Path, PathBuf};
use std::process::Command;

use slidebasis_cli::{run_rocket, CliError, Mode, RunConfig};

const ROCKET: &str = r#"
[sliding]
n_opt = 4
n_s = 3
s_max = 1
inner_max_iter = 8
hessian = "finite_difference"
black_box = true
[rocket]
grid = [12, 6]
bounds = { lower = 0.002, upper = 0.012 }
[rocket.target]
kind = "bucket"
samples = 12
"#;

const TOPOPT: &str = r#"
[sliding]
n_opt = 6
n_s = 4
s_max = 1
inner_max_iter = 10
hessian = "bfgs"
[topopt]
cantilever = { cells = [6, 2, 3], size = [3.0, 1.0, 1.5], load = 1.0e3 }
[topopt.design]
m_frac = 0.5
"#;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_slidebasis"))
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn read(p: &Path) -> String {
    std::fs::read_to_string(p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

fn without_seconds(json: &str) -> serde_json::Value {
    let mut v: serde_json::Value = serde_json::from_str(json).unwrap();
    fn strip(v: &mut serde_json::Value) {
        match v {
            serde_json::Value::Object(m) => {
                m.remove("seconds");
                m.values_mut().for_each(strip);
            }
            serde_json::Value::Array(a) => a.iter_mut().for_each(strip),
            _ => {}
        }
    }
    strip(&mut v);
    v
}

#[test]
fn rocket_run_is_deterministic_and_reproducible_from_snapshot() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "r.toml", ROCKET);
    let (a, b, c) = (dir.path().join("a"), dir.path().join("b"), dir.path().join("c"));
    for out in [&a, &b] {
        let st = bin().args(["rocket", "--config"]).arg(&cfg).arg("--out").arg(out).args(["--seed", "7"]).status().unwrap();
        assert!(st.success());
    }
    for f in ["trace.csv", "profile.csv", "burn_rate.csv", "constraints.csv", "burn_rate.vtk"] {
        assert_eq!(read(&a.join(f)), read(&b.join(f)), "{f} differs between runs");
    }
    assert_eq!(without_seconds(&read(&a.join("summary.json"))), without_seconds(&read(&b.join("summary.json"))));
    let snapshot = |d: &Path| read(&d.join("config.toml")).lines().filter(|l| !l.starts_with("output")).collect::<Vec<_>>().join("\n");
    assert_eq!(snapshot(&a), snapshot(&b));
    assert!(snapshot(&a).contains("rng_seed = 7"));

    // The snapshot alone reproduces the run.
    let st = bin().args(["rocket", "--config"]).arg(a.join("config.toml")).arg("--out").arg(&c).status().unwrap();
    assert!(st.success());
    assert_eq!(without_seconds(&read(&a.join("summary.json"))), without_seconds(&read(&c.join("summary.json"))));
    assert_eq!(read(&a.join("trace.csv")), read(&c.join("trace.csv")));

    let profile = read(&a.join("profile.csv"));
    let lines: Vec<&str> = profile.lines().collect();
    assert_eq!(lines[0], "time,target,achieved");
    assert_eq!(lines.len(), 13);
    let vtk = read(&a.join("burn_rate.vtk"));
    assert!(vtk.contains("CELL_DATA 72"));
}

#[test]
fn snapshot_round_trips_losslessly() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig::load(&write_config(dir.path(), "r.toml", ROCKET)).unwrap();
    let (artifacts, _) = run_rocket(&cfg).unwrap();
    let snap = std::str::from_utf8(artifacts.get("config.toml").unwrap()).unwrap();
    assert_eq!(RunConfig::from_toml(snap).unwrap(), cfg);
}

#[test]
fn malformed_config_fails_without_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let bad = write_config(dir.path(), "bad.toml", "[sliding]\nn_opt = 4\nn_s = 9\n[rocket]\ngrid = [4, 4]\nbounds = { lower = 0.002, upper = 0.012 }\n");
    let st = bin().args(["rocket", "--config"]).arg(&bad).arg("--out").arg(&out).status().unwrap();
    assert_eq!(st.code(), Some(2));
    assert!(!out.exists());

    let typo = write_config(dir.path(), "typo.toml", &ROCKET.replace("n_opt", "n_optt"));
    assert_eq!(bin().args(["rocket", "--config"]).arg(&typo).arg("--out").arg(&out).status().unwrap().code(), Some(2));
    let missing = dir.path().join("missing.toml");
    assert_eq!(bin().args(["rocket", "--config"]).arg(&missing).status().unwrap().code(), Some(3));
    assert!(!out.exists());
}

#[test]
fn floating_structure_is_a_solver_error() {
    let dir = tempfile::tempdir().unwrap();
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/cantilever");
    std::fs::write(dir.path().join("bc.csv"), "node,component,value\n0,0,0\n").unwrap();
    let cfg = write_config(dir.path(), "t.toml", "[topopt]\nnodes = \"n\"\nelements = \"e\"\nbc = \"bc.csv\"\nloads = \"l\"\n");
    let out = dir.path().join("out");
    let st = bin()
        .args(["topopt", "--config"])
        .arg(&cfg)
        .arg("--mesh")
        .arg(data.join("cantilever.node"))
        .arg(data.join("cantilever.ele"))
        .arg("--loads")
        .arg(data.join("loads.csv"))
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(4));
    assert!(!out.exists());
}

#[test]
fn shipped_cantilever_data_loads() {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/cantilever");
    let cfg = RunConfig::load(&data.join("topopt.toml")).unwrap();
    cfg.validate().unwrap();
    let model = slidebasis_cli::run::fem_model(cfg.topopt.as_ref().unwrap()).unwrap();
    assert_eq!(model.n_elements(), 6 * 24 * 4 * 8);
    let total: f64 = model.loads().iter().skip(2).step_by(3).sum();
    assert!((total + 1.0e3).abs() < 1e-9);
    let rocket = RunConfig::load(&Path::new(env!("CARGO_MANIFEST_DIR")).join("data/rocket_two_step.toml")).unwrap();
    rocket.validate().unwrap();
    assert_eq!(rocket.rocket.as_ref().unwrap().grid, [60, 30]);
}

#[test]
fn compare_reports_every_mode() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "t.toml", TOPOPT);
    let out = dir.path().join("cmp");
    let st = bin().args(["compare", "--config"]).arg(&cfg).arg("--out").arg(&out).status().unwrap();
    assert!(st.success());
    let table = read(&out.join("comparison.csv"));
    let rows: Vec<Vec<&str>> = table.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows.iter().map(|r| r[0]).collect::<Vec<_>>(), ["sliding", "fixed", "conventional"]);
    // Fixed basis covers the same k as the sliding run.
    assert_eq!(rows[0][1], rows[1][1]);
    assert_eq!(rows[2][1], (6 * 36).to_string());
    for r in &rows {
        let mass: f64 = r[4].parse().unwrap();
        assert!(mass <= 0.5 + 1e-6, "{r:?}");
    }
    for f in ["density_sliding.vtk", "density_fixed.csv", "trace_conventional.csv"] {
        assert!(out.join(f).is_file(), "{f}");
    }
}

#[test]
fn custom_target_and_other_subcommands() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "r.toml", ROCKET);
    let target = dir.path().join("target.csv");
    let mut rows = String::from("time,thrust\n");
    for i in 0..10 {
        rows += &format!("{},{}\n", i as f64, 1500.0 + 100.0 * i as f64);
    }
    std::fs::write(&target, rows).unwrap();
    let out = dir.path().join("custom");
    let st = bin()
        .args(["rocket", "--config"])
        .arg(&cfg)
        .arg("--target")
        .arg(&target)
        .args(["--mode", "fixed"])
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(st.success());
    let summary: serde_json::Value = serde_json::from_str(&read(&out.join("summary.json"))).unwrap();
    assert_eq!(summary["mode"], "fixed");
    assert_eq!(summary["k"], 4);
    assert_eq!(read(&out.join("profile.csv")).lines().count(), 11);

    let out = dir.path().join("basis");
    assert!(bin().args(["basis", "--config"]).arg(&cfg).args(["--count", "6"]).arg("--out").arg(&out).status().unwrap().success());
    let eig = read(&out.join("eigenvalues.csv"));
    assert_eq!(eig.lines().count(), 7);
    assert!(read(&out.join("basis.vtk")).contains("SCALARS mode_5 double 1"));

    let out = dir.path().join("sim");
    assert!(bin().args(["simulate", "--config"]).arg(&cfg).args(["--rate", "0.005"]).arg("--out").arg(&out).status().unwrap().success());
    let t_burn = serde_json::from_str::<serde_json::Value>(&read(&out.join("summary.json"))).unwrap()["t_burn"].as_f64().unwrap();
    // Without a duration the whole web burns: 0.07 m at 5 mm/s, within a cell.
    assert!((t_burn - 0.07 / 0.005).abs() < (0.1 / 12.0) / 0.005, "{t_burn}");
}

#[test]
fn errors_map_to_exit_codes() {
    assert_eq!(CliError::Config(String::new()).exit_code(), 2);
    assert_eq!(CliError::Io(String::new()).exit_code(), 3);
    assert_eq!(CliError::Solver(String::new()).exit_code(), 4);
    assert_eq!(CliError::Physics(String::new()).exit_code(), 5);
    assert_eq!(Mode::default(), Mode::Sliding);
}
