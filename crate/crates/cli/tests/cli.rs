use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;
use tempfile::TempDir;

struct Run {
    code: i32,
    dir: Option<PathBuf>,
    stderr: String,
}

fn write_config(root: &Path, name: &str, body: &str) -> PathBuf {
    let path = root.join(name);
    fs::write(&path, body).unwrap();
    path
}

fn ctruelle(root: &Path, args: &[&str]) -> Run {
    let out = root.join("runs");
    let output = Command::new(env!("CARGO_BIN_EXE_ctruelle"))
        .args(args)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    let stdout = String::from_utf8_lossy(&output.stdout);
    let dir = stdout
        .split("outputs in ")
        .nth(1)
        .map(|s| PathBuf::from(s.trim()));
    Run {
        code: output.status.code().unwrap(),
        dir,
        stderr: String::from_utf8_lossy(&output.stderr).into_owned(),
    }
}

fn report(run: &Run, name: &str) -> Value {
    let path = run.dir.as_ref().expect("run directory").join(name);
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

const QUADRATIC: &str = r#"
times = [1.0]
[kernel]
kind = "polynomial_g"
a0 = 0.5
[potential]
kind = "quadratic"
b = 0.2
[grid]
n = 64
"#;

#[test]
fn cosine_kernel_validates() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "c.toml", "[kernel]\nkind = \"cosine\"\n");
    let run = ctruelle(tmp.path(), &["validate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let r = report(&run, "validate.json");
    assert_eq!(r["status"], "pass");
    assert_eq!(r["kernel"]["symmetric"], true);
    assert!(run.dir.unwrap().join("invariant_density.csv").is_file());
}

#[test]
fn negative_tabulated_kernel_fails_validation() {
    let tmp = TempDir::new().unwrap();
    fs::write(tmp.path().join("neg.csv"), "n=4\n1,-0.5,2.5,1\n1,1,1,1\n1,1,1,1\n1,1,1,1\n").unwrap();
    let cfg = write_config(tmp.path(), "t.toml", "[kernel]\nkind = \"tabulated\"\nfile = \"neg.csv\"\n");
    let run = ctruelle(tmp.path(), &["validate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(run.code, 1, "{}", run.stderr);
    let r = report(&run, "validate.json");
    assert_eq!(r["status"], "fail");
    assert_eq!(r["kernel"]["min_value"], -0.5);
}

#[test]
fn missing_files_exit_with_two() {
    let tmp = TempDir::new().unwrap();
    let run = ctruelle(tmp.path(), &["validate", "--config", tmp.path().join("nope.toml").to_str().unwrap()]);
    assert_eq!(run.code, 2);
    let cfg = write_config(tmp.path(), "t.toml", "[kernel]\nkind = \"tabulated\"\nfile = \"absent.csv\"\n");
    let run = ctruelle(tmp.path(), &["validate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(run.code, 2);
    assert!(run.stderr.contains("absent.csv"));
}

#[test]
fn malformed_input_exits_with_two() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "bad.toml", "[kernel]\nkind = \"gaussian\"\n");
    assert_eq!(ctruelle(tmp.path(), &["eigen", "--config", cfg.to_str().unwrap()]).code, 2);
    let cfg = write_config(tmp.path(), "sine.toml", "[kernel]\nkind = \"sine_asym\"\namplitude = 1.5\n");
    assert_eq!(ctruelle(tmp.path(), &["validate", "--config", cfg.to_str().unwrap()]).code, 2);
    assert_eq!(ctruelle(tmp.path(), &["eigen", "--grid", "4"]).code, 2);
    assert_eq!(ctruelle(tmp.path(), &["no-such-command"]).code, 2);
}

#[test]
fn eigen_matches_closed_form() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "q.toml", QUADRATIC);
    let run = ctruelle(tmp.path(), &["eigen", "--config", cfg.to_str().unwrap()]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let r = report(&run, "eigen.json");
    assert!(r["closed_form_gap"].as_f64().unwrap() < 1e-6);
    assert!((r["lambda"].as_f64().unwrap() - 0.284_522_597_225_006).abs() < 1e-4);
}

#[test]
fn zero_potential_has_zero_eigenvalue() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "s.toml", "[kernel]\nkind = \"sine_asym\"\namplitude = 0.5\n");
    let run = ctruelle(tmp.path(), &["eigen", "--config", cfg.to_str().unwrap()]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    assert!(report(&run, "eigen.json")["lambda"].as_f64().unwrap().abs() < 1e-12);
}

#[test]
fn non_convergent_eigen_reports_no_eigenpair() {
    let tmp = TempDir::new().unwrap();
    let body = format!("{QUADRATIC}\n[tolerances]\neigen = 1e-16\neigen_max_iter = 2\n");
    let cfg = write_config(tmp.path(), "q.toml", &body);
    let run = ctruelle(tmp.path(), &["eigen", "--config", cfg.to_str().unwrap()]);
    assert_eq!(run.code, 3, "{}", run.stderr);
    assert_eq!(report(&run, "eigen.json")["status"], "no_eigenpair");
    assert_eq!(report(&run, "manifest_eigen.json")["exit_code"], 3);
}

#[test]
fn thermo_reports_pressure_and_entropy_production() {
    let tmp = TempDir::new().unwrap();
    let body = format!("{QUADRATIC}\n[thermo]\nprobes = 8\n");
    let cfg = write_config(tmp.path(), "q.toml", &body);
    let run = ctruelle(tmp.path(), &["thermo", "--config", cfg.to_str().unwrap(), "--grid", "32"]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let r = report(&run, "thermo.json");
    assert!(r["gap"].as_f64().unwrap() < 1e-4);
    // symmetric kernel
    assert_eq!(r["ep"], 0.0);

    let sine = r#"
[kernel]
kind = "sine_asym"
amplitude = 0.5
[thermo]
probes = 0
[thermo.sweep]
parameter = "a"
values = [0.0, 0.25, 0.5, 0.75]
"#;
    let cfg = write_config(tmp.path(), "s.toml", sine);
    let run = ctruelle(tmp.path(), &["thermo", "--config", cfg.to_str().unwrap(), "--grid", "32"]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let r = report(&run, "thermo.json");
    assert!((r["ep"].as_f64().unwrap() - 0.267_949_192_431_122_7).abs() < 1e-10);
    assert_eq!(r["sweep"]["ep_monotone"], true);
    let csv = fs::read_to_string(run.dir.unwrap().join("ep_sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5);
    assert!(csv.starts_with("a,lambda,ep\n0,"));
}

#[test]
fn heat_kernel_and_gibbs_pass_their_checks() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "q.toml", QUADRATIC);
    let heat = ctruelle(tmp.path(), &["heat-kernel", "--config", cfg.to_str().unwrap(), "--grid", "32"]);
    assert_eq!(heat.code, 0, "{}", heat.stderr);
    let dir = heat.dir.clone().unwrap();
    assert!(dir.join("heat_t1_integral.csv").is_file());
    assert!(dir.join("fk_t1_atomic.csv").is_file());
    let gibbs = ctruelle(tmp.path(), &["gibbs", "--config", cfg.to_str().unwrap(), "--grid", "32"]);
    assert_eq!(gibbs.code, 0, "{}", gibbs.stderr);
    assert!(dir.join("gibbs_pi.csv").is_file());
}

#[test]
fn every_command_writes_a_manifest() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "c.toml", "[skorokhod]\ntriples = 5\n");
    let run = ctruelle(tmp.path(), &["skorokhod", "--config", cfg.to_str().unwrap()]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let m = report(&run, "manifest_skorokhod.json");
    assert_eq!(m["command"], "skorokhod");
    assert_eq!(m["config_hash"].as_str().unwrap().len(), 64);
    assert!(m["wall_time_seconds"].as_f64().unwrap() >= 0.0);
    assert!(m["package_version"].is_string());
    let outputs: Vec<&str> = m["outputs"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    assert!(outputs.contains(&"skorokhod.json") && outputs.contains(&"expansiveness.csv"));
    let dir_name = run.dir.unwrap().file_name().unwrap().to_string_lossy().into_owned();
    assert!(m["config_hash"].as_str().unwrap().starts_with(&dir_name));
}

#[test]
fn simulate_is_deterministic_per_seed() {
    let body = r#"
[kernel]
kind = "sine_asym"
amplitude = 0.5
[mc]
horizon = 5.0
n_paths = 400
fk_paths = 200
write_paths = 2
"#;
    let texts = |seed: &str| {
        let tmp = TempDir::new().unwrap();
        let cfg = write_config(tmp.path(), "s.toml", body);
        let run = ctruelle(tmp.path(), &["simulate", "--config", cfg.to_str().unwrap(), "--seed", seed]);
        assert!(run.code == 0 || run.code == 1, "{}", run.stderr);
        let dir = run.dir.unwrap();
        ["simulate.json", "path_000.csv", "path_001.csv", "config.json"]
            .map(|f| fs::read(dir.join(f)).unwrap())
    };
    let a = texts("7");
    let b = texts("7");
    let c = texts("8");
    assert_eq!(a, b);
    assert_ne!(a[0], c[0]);
}

#[test]
fn gibbs_paths_match_stationary_law() {
    let tmp = TempDir::new().unwrap();
    let body = format!("{QUADRATIC}\n[mc]\nprocess = \"gibbs\"\nhorizon = 10.0\nn_paths = 1000\n");
    let cfg = write_config(tmp.path(), "g.toml", &body);
    let run = ctruelle(tmp.path(), &["simulate", "--config", cfg.to_str().unwrap(), "--grid", "16"]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let r = report(&run, "simulate.json");
    assert_eq!(r["occupation_z"].as_array().unwrap().len(), 16);
}
