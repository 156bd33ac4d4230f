//! End-to-end tests of the command-line binary plus the config/text parsers.

use std::process::{Command, Output};

use momentldp::config::{self, RunConfig};
use momentldp::lie::GroupAtom;
use momentldp::sim::RegionSpec;

const BIN: &str = env!("CARGO_BIN_EXE_momentldp");

fn write_temp(name: &str, text: &str) -> String {
    let path = std::env::temp_dir().join(format!("momentldp_test_{}_{name}", std::process::id()));
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().unwrap()
}

const QUBIT: &str = r#"{
  "group": [{"unitary": 2}],
  "representation": {"standard": 2},
  "state": {"diagonal": [0.7, 0.3]},
  "seed": 7,
  "x": {"chamber": [0.8, 0.2]}
}"#;

const BERNOULLI: &str = r#"{
  "group": [{"torus": 1}],
  "representation": {"torus": [[[0], 1], [[1], 1]]},
  "state": {"diagonal": [0.5, 0.5]},
  "x": {"chamber": [0.8]}
}"#;

#[test]
fn config_round_trip_and_validation() {
    let cfg = RunConfig::from_json(QUBIT).unwrap();
    assert_eq!(cfg.seed, 7);
    assert_eq!(cfg.workers, 1);
    let spec = cfg.group_spec().unwrap();
    assert_eq!(spec.factors, vec![GroupAtom::Unitary(2)]);
    let rho = cfg.state().unwrap();
    assert!((rho.trace().re - 1.0).abs() < 1e-12);
    let x = cfg.x_dual().unwrap().unwrap();
    assert!((x.trace_norm() - 1.0).abs() < 1e-12);

    // non-state diagonal is rejected
    let bad = QUBIT.replace("[0.7, 0.3]", "[0.8, 0.3]");
    assert!(RunConfig::from_json(&bad).unwrap().state().is_err());
    // unknown top-level keys are rejected
    let unknown = QUBIT.replace("\"seed\": 7", "\"sneed\": 7");
    assert!(RunConfig::from_json(&unknown).is_err());
}

#[test]
fn region_grid_and_m_list_grammars() {
    let r = config::parse_region("halfspace:1,0:0.9", None).unwrap();
    assert_eq!(r.contains_x0(&[0.95, 0.05]), Some(true));
    assert_eq!(r.contains_x0(&[0.85, 0.15]), Some(false));

    let r = config::parse_region("complement:chamberball:0.7,0.3:0.1", None).unwrap();
    assert_eq!(r.contains_x0(&[0.7, 0.3]), Some(false));
    assert_eq!(r.contains_x0(&[0.95, 0.05]), Some(true));
    assert!(r.is_chamber_decidable());

    // a trace-norm ball needs a center and is not chamber-decidable
    assert!(config::parse_region("ball:0.3", None).is_err());
    let cfg = RunConfig::from_json(QUBIT).unwrap();
    let center = cfg.x_dual().unwrap().unwrap();
    let r = config::parse_region("ball:0.3", Some(&center)).unwrap();
    assert!(!r.is_chamber_decidable());
    assert!(matches!(r, RegionSpec::Ball { .. }));

    assert_eq!(config::parse_grid("0:1:5").unwrap(), (0.0, 1.0, 5));
    assert!(config::parse_grid("1:0:5").is_err());
    assert!(config::parse_grid("0:1:1").is_err());

    assert_eq!(config::parse_m_list("2,4,8").unwrap(), vec![2, 4, 8]);
    assert_eq!(config::parse_m_list("3..6").unwrap(), vec![3, 4, 5, 6]);
    assert_eq!(config::parse_m_list("1,4..6").unwrap(), vec![1, 4, 5, 6]);
    assert!(config::parse_m_list("0").is_err());
}

#[test]
fn csv_floats_are_locale_free_and_roundtrip() {
    assert_eq!(config::csv_float(0.1), "0.1");
    assert_eq!(config::csv_float(f64::INFINITY), "inf");
    assert_eq!(config::csv_float(f64::NEG_INFINITY), "-inf");
    let v = 0.025732092477985802_f64;
    assert_eq!(config::csv_float(v).parse::<f64>().unwrap(), v);
}

#[test]
fn rate_command_reports_kl_and_exit_codes() {
    let cfg = write_temp("qubit.json", QUBIT);
    let out = run(&["rate", "--config", &cfg, "--method", "numeric"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let kl = 0.8 * (0.8f64 / 0.7).ln() + 0.2 * (0.2f64 / 0.3).ln();
    assert!((v["value"].as_f64().unwrap() - kl).abs() < 1e-6);
    assert_eq!(v["certificate"]["kind"], "converged");
    let cross = v["cross_check"]["value"].as_f64().unwrap();
    assert!((cross - kl).abs() < 1e-6);

    // a point outside the weight polytope certifies +∞ and exits with 2
    let outside = QUBIT.replace("[0.8, 0.2]", "[1.2, -0.2]");
    let cfg2 = write_temp("outside.json", &outside);
    let out = run(&["rate", "--config", &cfg2, "--method", "numeric"]);
    assert_eq!(out.status.code(), Some(2));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["certificate"]["kind"], "diverged");

    // missing config file exits with 1
    let out = run(&["rate", "--config", "/nonexistent.json", "--method", "numeric"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn closed_form_methods_agree_with_numeric() {
    let cfg = write_temp("qubit2.json", QUBIT);
    for method in ["keyl", "an", "contracted"] {
        let out = run(&["rate", "--config", &cfg, "--method", method]);
        assert!(out.status.success(), "{method}: {}", String::from_utf8_lossy(&out.stderr));
        let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        let kl = 0.8 * (0.8f64 / 0.7).ln() + 0.2 * (0.2f64 / 0.3).ln();
        assert!(
            (v["value"].as_f64().unwrap() - kl).abs() < 1e-6,
            "{method} value {}",
            v["value"]
        );
    }
}

#[test]
fn scan_emits_deterministic_csv_with_header() {
    let cfg = write_temp("bernoulli.json", BERNOULLI);
    let a = run(&["scan", "--config", &cfg, "--grid", "0.1:0.9:9"]);
    let b = run(&["scan", "--config", &cfg, "--grid", "0.1:0.9:9"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout, "scan must be byte-identical across runs");

    let text = String::from_utf8(a.stdout).unwrap();
    let lines: Vec<&str> = text.trim_end().split('\n').collect();
    assert_eq!(lines[0], "x0_1,i_value,certificate,evaluations,contracted_value");
    assert_eq!(lines.len(), 10);
    // Bernoulli(1/2) rate is symmetric about 1/2 and vanishes there
    let val = |line: &str| line.split(',').nth(1).unwrap().parse::<f64>().unwrap();
    let mid = val(lines[5]);
    assert!(mid.abs() < 1e-9, "rate at the mean was {mid}");
    assert!((val(lines[1]) - val(lines[9])).abs() < 1e-9);

    // grids outside the inflated weight box are refused
    let out = run(&["scan", "--config", &cfg, "--grid", "0.1:1.5:4"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn simulate_is_deterministic_and_checks_the_bound() {
    let cfg = write_temp("sim.json", QUBIT);
    let args = [
        "simulate", "--config", &cfg, "--m-list", "2,4,8", "--region", "halfspace:1,0:0.9",
        "--samples", "2000", "--workers", "3", "--seed", "11",
    ];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout, "simulate must be byte-identical for equal (config, seed, workers)");

    let text = String::from_utf8(a.stdout).unwrap();
    let lines: Vec<&str> = text.trim_end().split('\n').collect();
    assert_eq!(lines[0], "m,mu,ci_lo,ci_hi,rate,inf_rate,log_rhs,bound_holds,exact");
    assert_eq!(lines.len(), 4);
    for line in &lines[1..] {
        let f: Vec<&str> = line.split(',').collect();
        assert_eq!(f[7], "true", "bound must hold on {line}");
        assert_eq!(f[8], "true", "half-space masses are exact block sums");
    }

    // JSON format carries the summary verdicts
    let out = run(&[
        "simulate", "--config", &cfg, "--m-list", "10,20,30", "--region", "ball:0.3",
        "--samples", "2000", "--format", "json",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["summary"]["lln_nondecreasing"], true);
    assert_eq!(v["summary"]["upper_bound_ok"], true);
    assert_eq!(v["rows"].as_array().unwrap().len(), 3);
}

#[test]
fn selftest_passes_and_detects_injected_errors() {
    let out = run(&["selftest"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.matches(": pass").count(), 5);
    assert_eq!(text.matches("FAIL").count(), 0);

    let out = run(&["selftest", "--inject-iwasawa-error"]);
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("iwasawa_roundtrip: FAIL"));
}

#[test]
fn output_file_flag_writes_the_report() {
    let cfg = write_temp("qubit3.json", QUBIT);
    let out_path = std::env::temp_dir().join(format!("momentldp_out_{}.json", std::process::id()));
    let out = run(&["rate", "--config", &cfg, "--method", "an", "--out", out_path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&out_path).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert!(v["value"].is_f64());
    std::fs::remove_file(&out_path).ok();
}
