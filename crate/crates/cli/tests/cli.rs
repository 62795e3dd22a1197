use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn khlab(dir: &Path, config: &str, args: &[&str]) -> Output {
    let cfg = dir.join("run.cfg");
    fs::write(&cfg, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_khlab"))
        .args(args)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.join("out"))
        .output()
        .unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

const SMALL_SOLVE: &str = "n_s = 128\nn_theta = 9\neps_schedule = 1e-3\nr_schedule = 20\n";

#[test]
fn single_suite_runs_alone() {
    let dir = TempDir::new().unwrap();
    let o = khlab(dir.path(), "seed = 5\n", &["verify-identities", "--suite", "kato", "--samples", "300"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v = json(&dir.path().join("out/verify.json"));
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["passed"], true);
    let suites = v["suites"].as_array().unwrap();
    assert_eq!(suites.len(), 1);
    assert_eq!(suites[0]["suite"], "kato");
    assert_eq!(suites[0]["cases"][0]["samples"], 300);
    assert_eq!(v["provenance"]["config_hash"].as_str().unwrap().len(), 64);
}

#[test]
fn corrupted_tolerance_is_rejected() {
    let dir = TempDir::new().unwrap();
    let o = khlab(dir.path(), "tol_kato = -1\n", &["verify-identities"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("tol_kato"), "{}", stderr(&o));
    assert!(!dir.path().join("out").exists());
}

#[test]
fn failing_suite_exits_nonzero_with_replay_file() {
    let dir = TempDir::new().unwrap();
    let o = khlab(dir.path(), "tol_fd = 1e-30\n", &["verify-identities", "--suite", "barriers", "--samples", "4"]);
    assert_eq!(o.status.code(), Some(1));
    let replay = json(&dir.path().join("out/failures/barriers.json"));
    let case = &replay["cases"][0];
    assert_eq!(case["passed"], false);
    assert!(case["worst_sample"]["x"].is_array());
}

#[test]
fn unknown_key_names_the_key() {
    let dir = TempDir::new().unwrap();
    let o = khlab(dir.path(), "solver_tol = 3\n", &["solve"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("`solver_tol`"), "{}", stderr(&o));
}

#[test]
fn ball_solve_writes_all_artifacts() {
    let dir = TempDir::new().unwrap();
    let cfg = format!("domain = n=5 k=2 rho=1\n{SMALL_SOLVE}");
    let o = khlab(dir.path(), &cfg, &["solve"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = dir.path().join("out");
    let rep = json(&out.join("solve_report.json"));
    let gamma = rep["report"]["asymptotics"]["gamma"]["affine"].as_f64().unwrap();
    assert!((gamma - 1.0).abs() < 0.02, "{gamma}");
    assert_eq!(rep["provenance"]["grid"], serde_json::json!([128, 9]));
    let rays = fs::read_to_string(out.join("rays.csv")).unwrap();
    assert_eq!(rays.lines().next(), Some("theta,r,u"));
    assert_eq!(rays.lines().count(), 1 + 3 * 128);
    let dump = fs::read(out.join("field.dump")).unwrap();
    assert!(dump.starts_with(b"khlab-field 1\n"));
}

#[test]
fn inadmissible_domain_quotes_the_certificate() {
    let dir = TempDir::new().unwrap();
    let cfg = format!("domain = n=5 k=2 rho = 1 + 0.9*cos(2*theta)\n{SMALL_SOLVE}");
    let o = khlab(dir.path(), &cfg, &["solve"]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("inadmissible domain") && err.contains("worst theta"), "{err}");
}

#[test]
fn missing_k_is_a_parse_error() {
    let dir = TempDir::new().unwrap();
    let o = khlab(dir.path(), "domain = n=5 rho = 1\n", &["solve"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("missing key `k`"), "{}", stderr(&o));
}

#[test]
fn small_beta_is_rejected_before_solving() {
    let dir = TempDir::new().unwrap();
    let cfg = format!("domain = n=5 k=2 rho=1\n{SMALL_SOLVE}");
    let o = khlab(dir.path(), &cfg, &["minkowski", "--beta", "0.1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("(n−2k)/(n−k)"), "{}", stderr(&o));
    assert!(!dir.path().join("out").exists());
}

#[test]
fn minkowski_from_dump_reports_ball_equality() {
    let dir = TempDir::new().unwrap();
    let cfg = "domain = n=5 k=2 rho=1\nn_s = 192\nn_theta = 9\neps_schedule = 1e-6\nr_schedule = 1e6\n";
    let o = khlab(dir.path(), cfg, &["solve"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let second = dir.path().join("second");
    fs::create_dir(&second).unwrap();
    let o = khlab(&second, "field = ../out/field.dump\nbetas = 1\n", &["minkowski"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rep = json(&second.join("out/minkowski_beta_1.json"));
    assert_eq!(rep["inequality"]["equality"], true);
    assert_eq!(rep["inequality"]["gamma_free"], true);
    let csv = fs::read_to_string(second.join("out/phi_beta_1.csv")).unwrap();
    assert!(csv.starts_with("tau,level,phi,quad_err,regular_min_grad\n-inf,"));
}

#[test]
fn perturbed_domain_gives_two_strict_reports() {
    let dir = TempDir::new().unwrap();
    let cfg = "domain = n=5 k=2 rho = 1 + 0.1*cos(2*theta)\nn_s = 256\nn_theta = 32\n\
               eps_schedule = 1e-6\nr_schedule = 1e6\nbetas = 1/3, 1\n";
    let o = khlab(dir.path(), cfg, &["minkowski"]);
    assert!(o.status.success(), "{}", stderr(&o));
    for label in ["0.333333", "1"] {
        let rep = json(&dir.path().join(format!("out/minkowski_beta_{label}.json")));
        assert!(rep["inequality"]["gap"].as_f64().unwrap() > 0.0, "{label}");
        assert_eq!(rep["series"]["monotone"], true, "{label}");
    }
}

#[test]
fn identical_config_gives_identical_bytes() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    let cfg = format!("domain = n=5 k=2 rho = 1 + 0.05*cos(2*theta)\n{SMALL_SOLVE}");
    for d in [&a, &b] {
        let o = khlab(d.path(), &cfg, &["solve"]);
        assert!(o.status.success(), "{}", stderr(&o));
        let o = khlab(d.path(), "seed = 3\n", &["verify-identities", "--suite", "maclaurin", "--samples", "200"]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    for f in ["solve_report.json", "rays.csv", "field.dump", "verify.json"] {
        let x = fs::read(a.path().join("out").join(f)).unwrap();
        let y = fs::read(b.path().join("out").join(f)).unwrap();
        assert!(x == y, "{f} differs");
    }
}

#[test]
fn barriers_table_rows() {
    let dir = TempDir::new().unwrap();
    let o = khlab(dir.path(), "table_points = 10\ntable_eps = 0, 1e-3\n", &["barriers-table"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("out/barriers.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 20);
    // ε = 0 rows: f_ε vanishes identically
    let first: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(first[10].parse::<f64>().unwrap(), 0.0);
}
