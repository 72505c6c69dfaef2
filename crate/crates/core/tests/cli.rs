use std::fs;
use std::process::{Command, Output};

use tempfile::tempdir;

fn su11(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_su11"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn sweep_to_file_is_reproducible() {
    let dir = tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for path in [&a, &b] {
        let o = su11(&[
            "sweep", "--xi-steps", "201", "--nu", "0,1", "--mu", "0", "--out", path.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text, fs::read_to_string(&b).unwrap());
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "xi,nu,mu,g0_per_photon,g1_per_photon,rho,dphi_min_times_sqrt_ns,method");
    assert_eq!(lines.len(), 403);
    assert!(lines[1].starts_with("0,0,0,1,0,inf,inf,closed-form"));
    let half = lines.iter().find(|l| l.starts_with("0.5,0,0,")).unwrap();
    assert_eq!(half.split(',').nth(5), Some("0.460336797104"));
    assert!(lines.last().unwrap().ends_with("hypergeometric"));
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"sweep": {"xi_min": 0.5, "xi_max": 1.0, "xi_steps": 3, "nu": [0.0, 2.0]}}"#).unwrap();
    let o = su11(&["sweep", "--config", cfg.to_str().unwrap(), "--xi-steps", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 1 + 2 * 2);
    assert!(text.contains("\n1,2,0,"));

    fs::write(&cfg, r#"{"sweep": {"xi_steps": 3, "bogus": 1}}"#).unwrap();
    assert_eq!(su11(&["sweep", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn invalid_inputs_exit_two() {
    assert_eq!(su11(&["sweep", "--xi-steps", "1"]).status.code(), Some(2));
    assert_eq!(su11(&["sweep", "--nu", "1", "--method", "closed-form"]).status.code(), Some(2));
    assert_eq!(su11(&["sweep", "--method", "simpson"]).status.code(), Some(2));
    assert_eq!(su11(&["figure", "lambda"]).status.code(), Some(2));
    assert_eq!(su11(&["curve", "--xi", "0"]).status.code(), Some(2));
    assert_eq!(su11(&["curve"]).status.code(), Some(2));
}

#[test]
fn missing_config_is_io_error() {
    let o = su11(&["sweep", "--config", "/nonexistent/su11.json"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn crossing_json() {
    let o = su11(&["crossing", "--nu", "1", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((v["xi_star"].as_f64().unwrap() - 0.487028398444446).abs() < 1e-9);
    assert!((v["penalty"].as_f64().unwrap() - 1.405).abs() < 1e-3);
    let text = stdout(&su11(&["crossing"]));
    assert!(text.contains("xi_star = 0.34657359028"));
}

#[test]
fn crossing_out_of_reach_exits_three() {
    // rho saturates above 1 when the gain sums grow too slowly.
    let o = su11(&["crossing", "--nu", "1e300"]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn figure_rows_and_threshold() {
    let text = stdout(&su11(&["figure", "mu"]));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 1 + 1000 + 2);
    assert_eq!(lines[1001], "0.01,0,0,nan,nan,1,1,sql-threshold");
    assert_eq!(lines[1002], "2,0,0,nan,nan,1,1,sql-threshold");
}

#[test]
fn curve_csv() {
    let o = su11(&["curve", "--xi", "0.5", "--nu", "1", "--n-seed", "4", "--phi0-steps", "8"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "phi0,dphi0_sq");
    assert_eq!(lines.len(), 9);
    // phi0 = -pi/2 + ... includes the singular points pi/4 + k pi/2.
    assert!(lines.iter().any(|l| l.ends_with(",inf")));
}

#[test]
fn oracle_report_and_exit_code() {
    let dir = tempdir().unwrap();
    let report = dir.path().join("report.json");
    let o = su11(&[
        "oracle", "--xi", "0", "--nu", "1", "--mu", "1", "--n-points", "16", "--out", report.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["pass"], true);

    // |G1| from the contraction misses the series value, so the run is red
    // but the report is still written.
    let o = su11(&[
        "oracle", "--xi", "0.25", "--nu", "1", "--n-points", "24", "--out", report.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(4));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["pass"], false);
    assert_eq!(v["g0"]["pass"], true);
}
