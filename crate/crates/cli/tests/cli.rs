use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_cmlecon");

fn cmlecon(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .env_remove("CMLECON_OUT_DIR")
        .output()
        .expect("spawn cmlecon")
}

fn ok(args: &[&str]) {
    let out = cmlecon(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn usage_error(args: &[&str]) -> String {
    let out = cmlecon(args);
    assert_eq!(
        out.status.code(),
        Some(2),
        "{args:?} should be a usage error"
    );
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(!err.trim().is_empty());
    err
}

fn json(path: impl AsRef<Path>) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn out_arg(dir: &Path) -> String {
    dir.to_str().unwrap().to_string()
}

fn csv_rows(path: impl AsRef<Path>) -> (String, Vec<Vec<String>>) {
    let text = std::fs::read_to_string(path).unwrap();
    assert!(text.ends_with('\n'));
    let mut lines = text.lines();
    let header = lines.next().unwrap().to_string();
    let rows = lines
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect();
    (header, rows)
}

/// Orbit values grouped by r, in file order.
fn bifurcation(path: impl AsRef<Path>) -> Vec<(f64, Vec<f64>)> {
    let (header, rows) = csv_rows(path);
    assert_eq!(header, "r,x");
    let mut out: Vec<(f64, Vec<f64>)> = Vec::new();
    for row in rows {
        let r: f64 = row[0].parse().unwrap();
        let x: f64 = row[1].parse().unwrap();
        match out.last_mut() {
            Some((last, xs)) if *last == r => xs.push(x),
            _ => out.push((r, vec![x])),
        }
    }
    out
}

fn distinct(xs: &[f64], rtol: f64) -> usize {
    let mut reps: Vec<f64> = Vec::new();
    for &x in xs {
        if !reps
            .iter()
            .any(|&y| (x - y).abs() <= rtol * y.abs().max(1e-300))
        {
            reps.push(x);
        }
    }
    reps.len()
}

const SMALL: [&str; 6] = ["-n", "5000", "--transient", "3000", "--realizations", "2"];

fn simulate(dir: &Path, extra: &[&str]) {
    let out = out_arg(dir);
    let mut args = vec!["simulate", "--out-dir", &out];
    args.extend_from_slice(extra);
    ok(&args);
}

fn check_manifest(dir: &Path, files: &[&str]) -> Value {
    let m = json(dir.join("manifest.json"));
    let outputs = m["outputs"].as_array().unwrap();
    let listed: Vec<&str> = outputs
        .iter()
        .map(|o| o["file"].as_str().unwrap())
        .collect();
    assert_eq!(listed, files);
    for o in outputs {
        let bytes = std::fs::read(dir.join(o["file"].as_str().unwrap())).unwrap();
        assert_eq!(o["bytes"].as_u64().unwrap(), bytes.len() as u64);
        assert_eq!(
            o["sha256"].as_str().unwrap(),
            cmlecon::io::sha256_hex(&bytes)
        );
    }
    assert!(m["command_line"].as_array().unwrap().len() > 1);
    assert!(m["duration_secs"].as_f64().unwrap() >= 0.0);
    m
}

const DISTRIBUTION_FILES: [&str; 5] = [
    "sample.csv",
    "hist_linear.csv",
    "hist_log.csv",
    "fit.json",
    "stats.json",
];

#[test]
fn simulate_exponential_regime() {
    let tmp = tempfile::tempdir().unwrap();
    let mut args = vec!["--a", "0.6", "--r", "4"];
    args.extend_from_slice(&SMALL);
    simulate(tmp.path(), &args);

    let fit = json(tmp.path().join("fit.json"));
    assert_eq!(fit["kind"], "EXPONENTIAL");
    assert_eq!(fit["label"], "BOLTZMANN_GIBBS");
    let (mu, h) = (fit["mu"].as_f64().unwrap(), fit["h"].as_f64().unwrap());
    assert!((mu * h - 1.0).abs() <= f64::EPSILON);

    let stats = json(tmp.path().join("stats.json"));
    for key in ["mean", "std", "gini", "h"] {
        assert!(stats[key].as_f64().unwrap() > 0.0, "{key}");
    }
    assert_eq!(stats["n_pooled"], 10_000);

    let (header, rows) = csv_rows(tmp.path().join("sample.csv"));
    assert_eq!(header, "x");
    assert_eq!(rows.len(), 10_000);
    for name in ["hist_linear.csv", "hist_log.csv"] {
        let (header, rows) = csv_rows(tmp.path().join(name));
        assert_eq!(header, "bin_lo,bin_hi,count");
        assert_eq!(rows.len(), 50);
    }
    let (_, lin) = csv_rows(tmp.path().join("hist_linear.csv"));
    let total: u64 = lin.iter().map(|r| r[2].parse::<u64>().unwrap()).sum();
    assert_eq!(total, 10_000);

    let m = check_manifest(tmp.path(), &DISTRIBUTION_FILES);
    assert_eq!(m["config"]["protocol"]["n"], 5000);
    assert_eq!(m["config"]["a"], 0.6);
}

#[test]
fn simulate_pareto_regime() {
    let tmp = tempfile::tempdir().unwrap();
    let mut args = vec!["--a", "0.92", "--r", "8"];
    args.extend_from_slice(&SMALL);
    simulate(tmp.path(), &args);
    let fit = json(tmp.path().join("fit.json"));
    assert_eq!(fit["kind"], "PARETO");
    let alpha = fit["alpha"].as_f64().unwrap();
    assert!((2.4..=3.3).contains(&alpha), "alpha = {alpha}");
    assert_eq!(fit["alpha_bar"].as_f64().unwrap(), alpha - 1.0);
}

#[test]
fn simulate_subcritical_growth_collapses() {
    let tmp = tempfile::tempdir().unwrap();
    simulate(
        tmp.path(),
        &[
            "--r",
            "0.5",
            "-n",
            "1000",
            "--transient",
            "2000",
            "--realizations",
            "2",
        ],
    );
    let stats = json(tmp.path().join("stats.json"));
    assert!(stats["mean"].as_f64().unwrap() < 1e-6);
    assert_eq!(stats["label"], "COLLAPSED");
    assert_eq!(json(tmp.path().join("fit.json"))["kind"], Value::Null);
    let (header, rows) = csv_rows(tmp.path().join("hist_log.csv"));
    assert_eq!(header, "bin_lo,bin_hi,count");
    assert!(rows.is_empty());
    check_manifest(tmp.path(), &DISTRIBUTION_FILES);
}

#[test]
fn simulate_rerun_from_manifest_is_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    simulate(
        tmp.path(),
        &[
            "--a",
            "0.8",
            "--r",
            "6",
            "-n",
            "500",
            "--transient",
            "200",
            "--seed",
            "99",
        ],
    );
    let first = check_manifest(tmp.path(), &DISTRIBUTION_FILES);
    let argv: Vec<String> = first["command_line"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap().to_string())
        .collect();
    let args: Vec<&str> = argv[1..].iter().map(String::as_str).collect();
    ok(&args);
    let second = json(tmp.path().join("manifest.json"));
    assert_eq!(first["outputs"], second["outputs"]);
    assert_eq!(first["config"], second["config"]);
}

#[test]
fn simulate_rejects_bad_flags() {
    usage_error(&["simulate", "--r", "-1"]);
    usage_error(&["simulate", "--r", "4", "-n", "1"]);
    usage_error(&["simulate", "--r", "4", "--realizations", "0"]);
    usage_error(&["simulate", "--r", "four"]);
    usage_error(&["simulate", "--a", "0.6"]);
    usage_error(&["simulate", "--r", "4", "--bogus"]);
}

fn sweep(dir: &Path, a: &str, r: &str) -> String {
    let out = out_arg(dir);
    ok(&[
        "sweep",
        "--a-range",
        a,
        "--r-range",
        r,
        "-n",
        "2000",
        "--transient",
        "2000",
        "--realizations",
        "2",
        "--seed",
        "5",
        "--out-dir",
        &out,
    ]);
    std::fs::read_to_string(dir.join("phase.csv")).unwrap()
}

#[test]
fn sweep_single_cell() {
    let tmp = tempfile::tempdir().unwrap();
    sweep(tmp.path(), "0.6:0.6:0.1", "4");
    let (header, rows) = csv_rows(tmp.path().join("phase.csv"));
    assert_eq!(header, "a,r,label,mu,h,alpha,gini,mean,std,n_pooled");
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][2], "BOLTZMANN_GIBBS");
    assert_eq!(rows[0][9], "4000");
    check_manifest(tmp.path(), &["phase.csv"]);
}

#[test]
fn sweep_grid_order_and_rerun() {
    let tmp = tempfile::tempdir().unwrap();
    let first = sweep(tmp.path(), "0.5:0.6:0.1", "0.5:4:3.5");
    let (_, rows) = csv_rows(tmp.path().join("phase.csv"));
    let coords: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| (r[0].parse().unwrap(), r[1].parse().unwrap()))
        .collect();
    assert_eq!(coords, vec![(0.5, 0.5), (0.5, 4.0), (0.6, 0.5), (0.6, 4.0)]);
    // Collapsed cells have no fits: mu, h and alpha are empty fields.
    assert_eq!(rows[0][2], "COLLAPSED");
    assert_eq!(&rows[0][3..6], &["", "", ""]);
    assert_eq!(rows.iter().filter(|r| r.len() == 10).count(), 4);

    let again = sweep(tmp.path(), "0.5:0.6:0.1", "0.5:4:3.5");
    assert_eq!(first, again);
}

#[test]
fn sweep_rejects_malformed_ranges() {
    let tmp = tempfile::tempdir().unwrap();
    let out = out_arg(tmp.path());
    for bad in ["1:x", "1:2", "2:1:0.1", "1:2:0", "1:2:-1"] {
        usage_error(&[
            "sweep",
            "--a-range",
            bad,
            "--r-range",
            "4",
            "--out-dir",
            &out,
        ]);
    }
    usage_error(&["sweep", "--r-range", "4", "--out-dir", &out]);
    assert!(!tmp.path().join("phase.csv").exists());
}

fn bifurcate(dir: &Path, extra: &[&str]) -> Vec<(f64, Vec<f64>)> {
    let out = out_arg(dir);
    let mut args = vec!["bifurcate", "--out-dir", &out];
    args.extend_from_slice(extra);
    ok(&args);
    check_manifest(dir, &["bifurcation.csv"]);
    bifurcation(dir.join("bifurcation.csv"))
}

#[test]
fn bifurcate_stable_fixed_points_below_flip() {
    let tmp = tempfile::tempdir().unwrap();
    let orbits = bifurcate(
        tmp.path(),
        &[
            "--a",
            "0",
            "--r-range",
            "1.01:7:0.01",
            "--transient",
            "20000",
            "--kept",
            "32",
        ],
    );
    assert_eq!(orbits.len(), 600);
    for (r, xs) in &orbits {
        assert_eq!(xs.len(), 32);
        assert_eq!(distinct(xs, 1e-9), 1, "r = {r}");
        assert!((xs[0] - r.ln()).abs() <= 1e-6 * r.ln(), "r = {r}");
    }
}

#[test]
fn bifurcate_flip_near_e_squared() {
    let tmp = tempfile::tempdir().unwrap();
    let orbits = bifurcate(
        tmp.path(),
        &[
            "--a",
            "0",
            "--r-range",
            "7.2:7.6:0.001",
            "--transient",
            "100000",
            "--kept",
            "16",
        ],
    );
    let e2 = std::f64::consts::E.powi(2);
    for (r, xs) in &orbits {
        let k = distinct(xs, 1e-6);
        if *r <= e2 - 0.02 {
            assert_eq!(k, 1, "r = {r}");
        } else if *r >= e2 + 0.02 {
            assert_eq!(k, 2, "r = {r}");
        }
    }
    let first_two = orbits
        .iter()
        .find(|(_, xs)| distinct(xs, 1e-6) == 2)
        .unwrap()
        .0;
    assert!((first_two - e2).abs() < 0.02, "transition at {first_two}");
}

#[test]
fn bifurcate_subcritical_relaxes_to_zero() {
    let tmp = tempfile::tempdir().unwrap();
    let orbits = bifurcate(tmp.path(), &["--r-range", "0.2:0.9:0.1"]);
    assert_eq!(orbits.len(), 8);
    assert!(orbits.iter().flat_map(|(_, xs)| xs).all(|&x| x < 1e-6));
}

#[test]
fn bifurcate_rejects_singular_pressure() {
    let tmp = tempfile::tempdir().unwrap();
    let out = out_arg(tmp.path());
    let err = usage_error(&[
        "bifurcate",
        "--a",
        "1",
        "--r-range",
        "2:3:0.5",
        "--out-dir",
        &out,
    ]);
    assert!(err.contains("singular"), "{err}");
    assert!(!tmp.path().join("bifurcation.csv").exists());
}

fn exchange(dir: &Path, extra: &[&str]) -> Value {
    let out = out_arg(dir);
    let mut args = vec!["exchange", "--out-dir", &out];
    args.extend_from_slice(extra);
    ok(&args);
    check_manifest(dir, &DISTRIBUTION_FILES);
    json(dir.join("fit.json"))
}

#[test]
fn exchange_dy_is_exponential() {
    let tmp = tempfile::tempdir().unwrap();
    let fit = exchange(
        tmp.path(),
        &["--model", "dy", "-n", "10000", "--transactions", "10000000"],
    );
    assert_eq!(fit["label"], "BOLTZMANN_GIBBS");
    assert_eq!(fit["kind"], "EXPONENTIAL");
    let stats = json(tmp.path().join("stats.json"));
    assert!((stats["mean"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert!((stats["gini"].as_f64().unwrap() - 0.5).abs() < 0.02);
}

#[test]
fn exchange_angle_is_exponential() {
    let tmp = tempfile::tempdir().unwrap();
    let fit = exchange(
        tmp.path(),
        &[
            "--model",
            "angle",
            "--omega",
            "0.75",
            "-n",
            "10000",
            "--transactions",
            "10000000",
        ],
    );
    assert_eq!(fit["label"], "BOLTZMANN_GIBBS");
    assert_eq!(fit["kind"], "EXPONENTIAL");
}

#[test]
fn exchange_heterogeneous_runs() {
    let tmp = tempfile::tempdir().unwrap();
    exchange(
        tmp.path(),
        &[
            "--model",
            "angle-het",
            "-n",
            "1000",
            "--transactions",
            "100000",
            "--seed",
            "3",
        ],
    );
    let m = json(tmp.path().join("manifest.json"));
    assert_eq!(m["config"]["model"], "angle-het");
    assert_eq!(m["base_seed"], 3);
}

#[test]
fn exchange_without_transactions_keeps_equal_endowments() {
    let tmp = tempfile::tempdir().unwrap();
    exchange(
        tmp.path(),
        &["--model", "dy", "-n", "100", "--transactions", "0"],
    );
    let (_, rows) = csv_rows(tmp.path().join("sample.csv"));
    assert_eq!(rows.len(), 100);
    assert!(rows.iter().all(|r| r[0].parse::<f64>().unwrap() == 1.0));
}

#[test]
fn exchange_rejects_bad_flags() {
    let err = usage_error(&["exchange", "--model", "angle"]);
    assert!(err.contains("omega"), "{err}");
    usage_error(&["exchange", "--model", "angle", "--omega", "1.5"]);
    usage_error(&["exchange", "--model", "angle-het", "--omega", "0.5"]);
    usage_error(&["exchange", "--model", "barter"]);
    usage_error(&["exchange"]);
}

#[test]
fn config_file_supplies_flags_and_flags_win() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg: PathBuf = tmp.path().join("run.toml");
    let from_file = tmp.path().join("from-file");
    std::fs::write(
        &cfg,
        format!(
            "a = 0.6\nr = 0.5\nn = 300\ntransient = 50\nrealizations = 1\nseed = 11\nout-dir = {:?}\n",
            from_file.to_str().unwrap()
        ),
    )
    .unwrap();
    ok(&["--config", cfg.to_str().unwrap(), "simulate", "--r", "4"]);
    let m = json(from_file.join("manifest.json"));
    let c = &m["config"];
    assert_eq!(c["a"], 0.6);
    assert_eq!(c["r"], 4.0);
    assert_eq!(c["protocol"]["n"], 300);
    assert_eq!(c["protocol"]["transient"], 50);
    assert_eq!(m["base_seed"], 11);

    let flag_dir = tmp.path().join("flag");
    ok(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--out-dir",
        flag_dir.to_str().unwrap(),
        "-n",
        "400",
    ]);
    let m = json(flag_dir.join("manifest.json"));
    assert_eq!(m["config"]["protocol"]["n"], 400);
    assert_eq!(m["config"]["r"], 0.5);

    std::fs::write(&cfg, "colour = 3\n").unwrap();
    usage_error(&["--config", cfg.to_str().unwrap(), "simulate", "--r", "4"]);
}

#[test]
fn environment_sets_default_output_directory() {
    let tmp = tempfile::tempdir().unwrap();
    let env_dir = tmp.path().join("env-out");
    let out = Command::new(BIN)
        .args(["bifurcate", "--r-range", "2:3:1", "--kept", "4"])
        .env("CMLECON_OUT_DIR", &env_dir)
        .current_dir(tmp.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(env_dir.join("bifurcation.csv").exists());

    let cwd_run = Command::new(BIN)
        .args(["bifurcate", "--r-range", "2:3:1", "--kept", "4"])
        .env_remove("CMLECON_OUT_DIR")
        .current_dir(tmp.path())
        .output()
        .unwrap();
    assert!(cwd_run.status.success());
    assert!(tmp.path().join("out/bifurcation.csv").exists());
}

#[test]
fn every_written_file_is_in_exactly_one_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    simulate(tmp.path(), &["--r", "3", "-n", "200", "--transient", "10"]);
    let m = json(tmp.path().join("manifest.json"));
    let mut on_disk: BTreeSet<String> = std::fs::read_dir(tmp.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    on_disk.remove("manifest.json");
    let listed: BTreeSet<String> = m["outputs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|o| o["file"].as_str().unwrap().to_string())
        .collect();
    assert_eq!(on_disk, listed);
}
