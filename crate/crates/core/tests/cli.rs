use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use kerrslab::cli::SolutionDocument;
use kerrslab::contraction::SolvabilityReport;
use kerrslab::validate::ValidationReport;
use tempfile::TempDir;

fn configs() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn kerrslab(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kerrslab"))
        .arg("--out")
        .arg(out)
        .args(args)
        .env_remove("KERRSLAB_OUT_DIR")
        .output()
        .expect("spawn kerrslab")
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path
}

fn config_text(problem: &str, profile: &str, extra: &str) -> String {
    format!(
        "{{\n  \"schema\": \"kerrslab.run/v1\",\n  \"problem\": {problem},\n  \"profile\": {profile},\n  \"grid_n\": 257{extra}\n}}\n"
    )
}

const PROBLEM: &str = r#"{ "kappa": 1.0, "phi_angle": 0.0, "delta": 0.07957747154594767, "alpha": 0.05, "a_inc": 1.0 }"#;
const EPS: &str = r#"{ "kind": "constant", "value": 1.5 }"#;

fn read_solution(dir: &Path, stem: &str) -> SolutionDocument {
    SolutionDocument::parse(&fs::read_to_string(dir.join(format!("{stem}.solution.json"))).unwrap()).unwrap()
}

#[test]
fn vacuum_solve_is_exact() {
    let out = TempDir::new().unwrap();
    let o = kerrslab(out.path(), &["--quiet", "solve", configs().join("vacuum.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let doc = read_solution(out.path(), "vacuum");
    assert!(doc.converged);
    assert_eq!(doc.iterations, 1);
    let flux = doc.flux.unwrap();
    assert_eq!(flux.reflectance, 0.0);
    assert!((flux.transmittance - 1.0).abs() < 1e-14);
    assert!(out.path().join("vacuum.solve.meta.json").exists());
}

#[test]
fn solution_round_trips_and_embeds_report() {
    let out = TempDir::new().unwrap();
    let o = kerrslab(out.path(), &["--grid-n", "129", "solve", configs().join("default.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(out.path().join("default.solution.json")).unwrap();
    let doc = SolutionDocument::parse(&text).unwrap();
    assert_eq!(doc.grid_n, 129);
    assert!(doc.contraction_report.as_ref().unwrap().any_satisfied);
    assert_eq!(serde_json::to_string_pretty(&doc).unwrap() + "\n", text);

    let csv = fs::read_to_string(out.path().join("default.profile.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("z,re_u,im_u,abs_u"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 129);
    let last = rows.last().unwrap();
    let amps = doc.amplitudes.unwrap();
    // U(d) = a_inc + a_scat up to O(h²).
    assert!((last[1] - (1.0 + amps.a_scat.re)).abs() < 1e-3);
    assert!((last[3] - last[1].hypot(last[2])).abs() < 1e-15);
}

#[test]
fn malformed_config_names_the_field() {
    let out = TempDir::new().unwrap();
    let bad = config_text(
        r#"{ "kappa": -1.0, "phi_angle": 0.0, "delta": 0.08, "alpha": 0.0, "a_inc": 1.0 }"#,
        EPS,
        "",
    );
    let path = write_config(out.path(), "bad.json", &bad);
    let o = kerrslab(out.path(), &["solve", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("kappa") && err.contains("line 3"), "{err}");

    let unknown = config_text(PROBLEM, EPS, ",\n  \"colour\": 1");
    let path = write_config(out.path(), "unknown.json", &unknown);
    let o = kerrslab(out.path(), &["solve", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("colour"));

    let o = kerrslab(out.path(), &["solve", "/nonexistent/config.json"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn non_convergence_exits_2_with_trace() {
    let out = TempDir::new().unwrap();
    let path = write_config(out.path(), "short.json", &config_text(PROBLEM, EPS, ",\n  \"max_iters\": 3"));
    let o = kerrslab(out.path(), &["solve", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("not converged"));
    let doc = read_solution(out.path(), "short");
    assert!(!doc.converged);
    assert_eq!(doc.trace.unwrap().deltas.len(), 3);

    let o = kerrslab(out.path(), &["solve", configs().join("threshold.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn check_exit_codes_and_routing() {
    let out = TempDir::new().unwrap();
    let weak = PROBLEM.replace("0.05", "0.01");
    let path = write_config(out.path(), "weak.json", &config_text(&weak, EPS, ""));
    assert_eq!(kerrslab(out.path(), &["--quiet", "check", path.to_str().unwrap()]).status.code(), Some(0));
    let report: SolvabilityReport =
        serde_json::from_str(&fs::read_to_string(out.path().join("weak.check.json")).unwrap()).unwrap();
    let real = report.real.unwrap();
    assert!(real.satisfied);
    assert!((real.q0 - 0.5).abs() < 1e-15);

    let o = kerrslab(out.path(), &["--quiet", "check", configs().join("threshold.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));

    let o = kerrslab(out.path(), &["--quiet", "check", configs().join("lossy.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let report: SolvabilityReport =
        serde_json::from_str(&fs::read_to_string(out.path().join("lossy.check.json")).unwrap()).unwrap();
    assert!(report.real.is_none());
    assert!(report.complex.satisfied);
}

fn sweep_rows(dir: &Path, stem: &str) -> Vec<Vec<String>> {
    fs::read_to_string(dir.join(format!("{stem}.sweep.csv")))
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn alpha_sweep_matches_single_solve() {
    let out = TempDir::new().unwrap();
    let o = kerrslab(out.path(), &["--quiet", "sweep", configs().join("sweep_alpha.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let rows = sweep_rows(out.path(), "sweep_alpha");
    assert_eq!(rows.len(), 11);
    let values: Vec<f64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    assert!(values.windows(2).all(|w| w[0] < w[1]));
    assert!(rows.iter().all(|r| r[0] == "alpha" && r[6] == "true"));

    let linear = PROBLEM.replace("0.05", "0.0");
    let path = write_config(out.path(), "linear.json", &config_text(&linear, EPS, "").replace("257", "513"));
    assert_eq!(kerrslab(out.path(), &["--quiet", "solve", path.to_str().unwrap()]).status.code(), Some(0));
    let flux = read_solution(out.path(), "linear").flux.unwrap();
    let r0: f64 = rows[0][2].parse().unwrap();
    assert_eq!(r0, flux.reflectance);
}

#[test]
fn kappa_sweep_t_factor_crosses_one() {
    let out = TempDir::new().unwrap();
    let o = kerrslab(out.path(), &["--quiet", "sweep", configs().join("sweep_kappa.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let t: Vec<f64> = sweep_rows(out.path(), "sweep_kappa").iter().map(|r| r[7].parse().unwrap()).collect();
    assert!(t.windows(2).all(|w| w[0] < w[1]));
    assert!(t[0] < 1.0 && *t.last().unwrap() > 1.0);
}

#[test]
fn sweep_count_one_is_rejected() {
    let out = TempDir::new().unwrap();
    let body = config_text(
        PROBLEM,
        EPS,
        ",\n  \"sweep\": { \"parameter\": \"alpha\", \"start\": 0.0, \"stop\": 0.1, \"count\": 1 }",
    );
    let path = write_config(out.path(), "one.json", &body);
    let o = kerrslab(out.path(), &["sweep", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("count"));
}

#[test]
fn failed_sweep_points_are_rows() {
    let out = TempDir::new().unwrap();
    let body = config_text(
        PROBLEM,
        r#"{ "kind": "constant", "value": 3.2 }"#,
        ",\n  \"sweep\": { \"parameter\": \"alpha\", \"start\": 0.0, \"stop\": 0.05, \"count\": 2 }",
    );
    let path = write_config(out.path(), "fails.json", &body);
    assert_eq!(kerrslab(out.path(), &["--quiet", "sweep", path.to_str().unwrap()]).status.code(), Some(0));
    let rows = sweep_rows(out.path(), "fails");
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r[6] == "false"));
}

#[test]
fn validate_negative_control_and_coarse_grid() {
    let out = TempDir::new().unwrap();
    let o = kerrslab(out.path(), &["--quiet", "validate", configs().join("mismatch.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&o.stderr).contains("oracle.constant_weight.difference"));

    let o = kerrslab(out.path(), &["--quiet", "--grid-n", "5", "validate", configs().join("default.json").to_str().unwrap()]);
    assert!(String::from_utf8_lossy(&o.stderr).contains("warning"));
    let report: ValidationReport =
        serde_json::from_str(&fs::read_to_string(out.path().join("default.validate.json")).unwrap()).unwrap();
    assert!(!report.orders_reliable);
    assert_eq!(report.grid_sizes, [5, 9]);
}

#[test]
fn out_dir_comes_from_environment() {
    let out = TempDir::new().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_kerrslab"))
        .args(["--quiet", "solve", configs().join("vacuum.json").to_str().unwrap()])
        .env("KERRSLAB_OUT_DIR", out.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(out.path().join("vacuum.solution.json").exists());
}
