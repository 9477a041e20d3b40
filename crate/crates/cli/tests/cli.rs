mod support;

use std::path::{Path, PathBuf};
use std::process::Command;

use stochbell::sheaf::{chsh_family_value, parse_model, print_model, Certificate, SolverMode};
use stochbell_cli::config::Statistics;
use stochbell_cli::fixtures;
use stochbell_cli::run::write_outputs;
use stochbell_cli::sweep::{sweep, Parameter};
use stochbell_cli::{check_model, run, CliError, ExperimentConfig};

fn crate_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn fixture(name: &str) -> PathBuf {
    crate_dir().join("fixtures").join(name)
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_stochbell"))
}

#[test]
fn shipped_fixtures_match_generator() {
    for (name, model) in fixtures::all() {
        let shipped = std::fs::read_to_string(fixture(name)).unwrap();
        assert_eq!(shipped, print_model(&model), "{name} is stale; rerun emit-fixtures");
    }
}

#[test]
fn pr_box_fixture_is_maximally_contextual() {
    let res = check_model(&fixture("pr_box.model"), SolverMode::ExactRational).unwrap();
    assert!(!res.section.is_feasible());
    match res.section.certificate {
        Some(Certificate::Chsh { value, .. }) => assert_eq!(value, 4.0),
        other => panic!("{other:?}"),
    }
}

#[test]
fn deterministic_fixture_has_point_mass_witness() {
    for mode in [SolverMode::ExactRational, SolverMode::float()] {
        let res = check_model(&fixture("deterministic.model"), mode).unwrap();
        let w = res.section.witness.unwrap();
        assert_eq!(w.iter().filter(|&&p| p == 1.0).count(), 1);
        assert_eq!(w.iter().filter(|&&p| p == 0.0).count(), w.len() - 1);
    }
}

#[test]
fn product_and_phi_plus_fixtures() {
    assert!(check_model(&fixture("product.model"), SolverMode::ExactRational).unwrap().section.is_feasible());
    assert!(!check_model(&fixture("phi_plus_tsirelson.model"), SolverMode::float()).unwrap().section.is_feasible());
}

#[test]
fn malformed_and_incompatible_files() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.model");
    std::fs::write(&bad, "stochbell-model v1\nprovenance analytic\nsetting a +1 -1\ncontext a : 0.5 oops\n").unwrap();
    match check_model(&bad, SolverMode::ExactRational) {
        Err(CliError::Parse { line, column, .. }) => assert_eq!((line, column), (4, 17)),
        other => panic!("{other:?}"),
    }

    let signalling = dir.path().join("signalling.model");
    let text = std::fs::read_to_string(fixture("pr_box.model"))
        .unwrap()
        .replace("context a b' : 0.5 0 0 0.5", "context a b' : 0.7 0 0 0.3");
    std::fs::write(&signalling, text).unwrap();
    assert!(matches!(
        check_model(&signalling, SolverMode::ExactRational),
        Err(CliError::Core(stochbell::Error::IncompatibleModel { .. }))
    ));
}

fn status(cmd: &mut Command) -> i32 {
    cmd.output().unwrap().status.code().unwrap()
}

#[test]
fn exit_codes() {
    let configs = crate_dir().join("configs");
    assert_eq!(status(bin().arg("run").arg(configs.join("ideal.toml"))), 3);
    assert_eq!(status(bin().arg("run").arg(configs.join("product.toml"))), 0);
    assert_eq!(status(bin().arg("check-model").arg(fixture("deterministic.model"))), 0);
    assert_eq!(status(bin().args(["check-model", "--mode", "float"]).arg(fixture("pr_box.model"))), 3);
    assert_eq!(status(bin().arg("run").arg("/nonexistent/config.toml")), 1);
    let out = bin()
        .args(["sweep", "--param", "brightness", "--values", "1"])
        .arg(configs.join("ideal.toml"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown sweep parameter"));
}

#[test]
fn emit_fixtures_writes_parseable_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin().arg("emit-fixtures").arg("--dir").arg(dir.path()).output().unwrap();
    assert!(out.status.success());
    for (name, model) in fixtures::all() {
        let text = std::fs::read_to_string(dir.path().join(name)).unwrap();
        assert_eq!(parse_model(&text).unwrap(), model);
    }
}

fn run_into(cfg_text: &str, dir: &Path) -> (String, String) {
    let mut cfg = ExperimentConfig::from_toml(cfg_text).unwrap();
    cfg.outputs.model = Some(dir.join("m.model"));
    cfg.outputs.report = Some(dir.join("r.json"));
    let report = run(&cfg).unwrap();
    write_outputs(&cfg, &report).unwrap();
    (
        std::fs::read_to_string(dir.join("m.model")).unwrap(),
        std::fs::read_to_string(dir.join("r.json")).unwrap(),
    )
}

#[test]
fn sampled_runs_are_byte_identical() {
    let text = std::fs::read_to_string(crate_dir().join("configs/noisy_shots.toml")).unwrap();
    let text = text + "\n[source]\nkind = \"uniform_linear\"\nunit = \"deg\"\nmin = 0\nmax = 180\nrealizations = 300\n";
    let text = text.replace("kind = \"visibility_preset\"\nvisibility = 0.9", "kind = \"hadamard_cnot\"");
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let first = run_into(&text, a.path());
    let second = run_into(&text, b.path());
    assert_eq!(first, second);
    assert!(first.0.contains("provenance sampled shots=100000"));
}

#[test]
fn report_matches_emitted_model() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["ideal.toml", "product.toml", "noisy_shots.toml", "heralded.toml"] {
        let text = std::fs::read_to_string(crate_dir().join("configs").join(name)).unwrap();
        let (model_text, json) = run_into(&text, dir.path());
        let model = parse_model(&model_text).unwrap();
        let (family, _) = chsh_family_value(&model).unwrap();
        let report: serde_json::Value = serde_json::from_str(&json).unwrap();
        let reported = report["chsh"]["family_max"].as_f64().unwrap();
        assert!((family - reported).abs() <= 1e-10, "{name}: {family} vs {reported}");
        let s = report["chsh"]["s"].as_f64().unwrap();
        let e: Vec<f64> = model.tables().iter().map(|t| t[0] - t[1] - t[2] + t[3]).collect();
        assert!((s - (e[0] + e[1] + e[2] - e[3])).abs() <= 1e-10, "{name}");
    }
}

#[test]
fn shot_noise_shrinks_like_inverse_root() {
    let grid = [1e2, 1e3, 1e4, 1e5];
    let mut mean_err = vec![0.0; grid.len()];
    let seeds = 24;
    for seed in 0..seeds {
        let mut cfg = ExperimentConfig::ideal();
        cfg.seed = seed;
        cfg.solver = SolverMode::float();
        let table = sweep(&cfg, Parameter::Shots, &grid).unwrap();
        for (k, row) in table.rows.iter().enumerate() {
            mean_err[k] += (row.report.chsh.s - 2.0 * 2f64.sqrt()).abs() / seeds as f64;
        }
    }
    // each decade of shots should shrink the error by about √10
    for w in mean_err.windows(2) {
        let ratio = w[0] / w[1];
        assert!((1.5..7.0).contains(&ratio), "errors {mean_err:?}");
    }
    // and the scale should match the propagated standard error
    let sigma = stochbell::measure::chsh_standard_error(&[FRAC; 4], 100);
    assert!((mean_err[0] / sigma - (2.0 / std::f64::consts::PI).sqrt()).abs() < 0.35, "{mean_err:?} vs σ {sigma}");
}

const FRAC: f64 = std::f64::consts::FRAC_1_SQRT_2;

#[test]
fn sweep_rows_follow_grid_order() {
    let mut cfg = ExperimentConfig::ideal();
    cfg.statistics = Statistics::Analytic;
    let grid: Vec<f64> = (0..24).rev().map(|i| i as f64 * 7.5).collect();
    cfg.angle_unit = stochbell_cli::config::Unit::Deg;
    let table = sweep(&cfg, Parameter::PhiPrime, &grid).unwrap();
    for (row, &v) in table.rows.iter().zip(&grid) {
        assert_eq!(row.value, v);
        let phi_prime = row.report.contexts[3].bob_radians;
        assert!((phi_prime - v.to_radians()).abs() < 1e-15);
    }
}
