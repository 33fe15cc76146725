use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn umbilic(args: &[&str]) -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_umbilic"));
    cmd.args(args).env_remove("UMB_THREADS");
    cmd
}

fn run(args: &[&str]) -> Output {
    umbilic(args).output().unwrap()
}

fn run_with_stdin(args: &[&str], input: &[u8]) -> Output {
    let mut child = umbilic(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(input).unwrap();
    child.wait_with_output().unwrap()
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn generate_to(dir: &Path, name: &str, args: &[&str]) -> String {
    let path = dir.join(name).to_str().unwrap().to_string();
    let mut all = vec!["generate"];
    all.extend_from_slice(args);
    all.extend_from_slice(&["--out", &path]);
    let out = run(&all);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    path
}

#[test]
fn generated_icosphere_piped_into_analyze() {
    let mesh = run(&["generate", "--kind", "icosphere", "--level", "4"]);
    assert!(mesh.status.success());
    assert!(mesh.stdout.starts_with(b"OFF\n"));
    let report = json(&run_with_stdin(&["analyze"], &mesh.stdout));
    assert_eq!(report["report"]["hypothesis_ok"], Value::Bool(true));
    assert_eq!(report["report"]["sphere_fields"], "computed");
    assert_eq!(report["vertices"], 2562);
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let out = run(&["analyze", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("Usage"), "{err}");
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn reports_are_byte_identical_across_runs_and_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = generate_to(dir.path(), "h.noff", &["--kind", "codim-lift", "--level", "3", "--eps", "0.1", "--dim", "5"]);
    let mut reports = Vec::new();
    for threads in ["1", "3", "8"] {
        let path = dir.path().join(format!("r{threads}.json"));
        let out = umbilic(&["analyze", "--mesh", &mesh, "--report", path.to_str().unwrap()])
            .env("UMB_THREADS", threads)
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        assert!(out.stdout.is_empty());
        reports.push(std::fs::read(path).unwrap());
    }
    assert!(reports.windows(2).all(|w| w[0] == w[1]));
    let v: Value = serde_json::from_slice(&reports[0]).unwrap();
    assert_eq!(v["report"]["ambient_dim"], 5);
}

#[test]
fn strict_mode_flags_hypothesis_violations() {
    let dir = tempfile::tempdir().unwrap();
    // W = ½‖A⁰‖² on a torus, and W ≥ 2π² > 8π
    let torus = generate_to(dir.path(), "torus.off", &["--kind", "torus", "--major", "2", "--minor", "0.7"]);
    let lax = run(&["analyze", "--mesh", &torus]);
    assert_eq!(json(&lax)["report"]["hypothesis_ok"], Value::Bool(false));
    assert_eq!(json(&lax)["report"]["sphere_fields"], "not_sphere_type");
    let strict = run(&["analyze", "--mesh", &torus, "--strict"]);
    assert_eq!(strict.status.code(), Some(2));
    let sphere = generate_to(dir.path(), "s.off", &["--kind", "icosphere", "--level", "3"]);
    assert_eq!(run(&["analyze", "--mesh", &sphere, "--strict"]).status.code(), Some(0));
}

#[test]
fn config_file_then_flags() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = generate_to(dir.path(), "h.off", &["--kind", "harmonic", "--level", "2", "--eps", "0.2"]);
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# branch threshold\ndelta0_sq = 0.5\nformat = csv\n").unwrap();
    let out = run(&["analyze", "--mesh", &mesh, "--config", cfg.to_str().unwrap()]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    let col = lines[0].split(',').position(|c| c == "delta0_sq").unwrap();
    let value: f64 = lines[1].split(',').nth(col).unwrap().parse().unwrap();
    assert_eq!(value, 0.5);

    let out = run(&["analyze", "--mesh", &mesh, "--config", cfg.to_str().unwrap(), "--delta0-sq", "0.75"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let value: f64 = text.lines().nth(1).unwrap().split(',').nth(col).unwrap().parse().unwrap();
    assert_eq!(value, 0.75);

    std::fs::write(&cfg, "delta0_sq = -1\n").unwrap();
    assert_eq!(run(&["analyze", "--mesh", &mesh, "--config", cfg.to_str().unwrap()]).status.code(), Some(1));
    let zero = umbilic(&["analyze", "--mesh", &mesh]).env("UMB_THREADS", "0").output().unwrap();
    assert_eq!(zero.status.code(), Some(1));
}

#[test]
fn gamma_sweep_emits_one_row_per_radius() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = generate_to(dir.path(), "e.off", &["--kind", "ellipsoid", "--level", "2", "--axes", "1,1,1.2"]);
    let out = run(&["sweep-gamma", "--mesh", &mesh, "--centers", "3", "--rhos", "5", "--csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "center,rho,gamma");
    assert_eq!(lines.len(), 1 + 3 * 5);
    let profiles = json(&run(&["sweep-gamma", "--mesh", &mesh, "--rhos", "4"]));
    assert_eq!(profiles.as_array().unwrap().len(), 1);
    assert_eq!(profiles[0]["gamma"].as_array().unwrap().len(), 4);
}

#[test]
fn sphere_fit_and_parametrization() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = generate_to(dir.path(), "s.noff", &["--kind", "harmonic", "--level", "3", "--eps", "0.05", "--m", "-1"]);
    let fit = json(&run(&["fit-sphere", "--mesh", &mesh, "--xi", "7", "--lsq"]));
    assert_eq!(fit["xi"], 7);
    assert!((fit["radius"].as_f64().unwrap() - 1.0).abs() < 5e-2);
    assert_eq!(run(&["fit-sphere", "--mesh", &mesh, "--xi", "100000"]).status.code(), Some(1));

    let image = dir.path().join("image.off");
    let p = json(&run(&["balance", "--mesh", &mesh, "--image", image.to_str().unwrap()]));
    assert!(p["half_area_dev"].as_f64().unwrap() < 1e-6);
    assert_eq!(p["transforms"].as_array().unwrap().len(), 3);
    let img = std::fs::read_to_string(&image).unwrap();
    assert!(img.starts_with("OFF\n642 1280"));
    let unbalanced = json(&run(&["parametrize", "--mesh", &mesh]));
    assert!(unbalanced["transforms"].as_array().unwrap().is_empty());
}

#[test]
fn verify_family_reports_constants_and_slopes() {
    let out = run(&["verify", "--family", "harmonic", "--eps", "0.01:0.1:4"]);
    let v = json(&out);
    assert_eq!(v["members"].as_array().unwrap().len(), 4);
    let table = v["table"].as_array().unwrap();
    let names: Vec<&str> = table.iter().map(|r| r["quantity"].as_str().unwrap()).collect();
    assert_eq!(names, ["funda", "gauss", "mean", "w22", "u_inf", "u_l2"]);
    let funda = table[0]["slope"].as_f64().unwrap();
    assert!((funda - 1.0).abs() < 0.2, "{funda}");
    assert!(table.iter().all(|r| r["constant"].as_f64().unwrap().is_finite()));

    let csv = run(&["verify", "--family", "lift", "--dim", "4", "--level", "2", "--eps", "0.05:0.1:2", "--csv"]);
    assert!(csv.status.success());
    let text = String::from_utf8(csv.stdout).unwrap();
    assert!(text.starts_with("quantity,constant,slope\n"));
    assert_eq!(text.lines().count(), 7);
    assert_eq!(run(&["verify", "--family", "harmonic", "--eps", "0.1:0.01:3"]).status.code(), Some(1));
}
