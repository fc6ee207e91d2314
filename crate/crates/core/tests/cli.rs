//! Drives the binary end to end: output formats, determinism, exit codes.

use std::path::PathBuf;
use std::process::{Command, Output};

fn sparsecc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sparsecc"))
        .args(args)
        .output()
        .expect("binary launches")
}

fn run_ok(args: &[&str]) -> String {
    let out = sparsecc(args);
    assert!(
        out.status.success(),
        "expected success for {args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).expect("utf8 output")
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

fn temp_path(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("sparsecc_cli_{}_{name}", std::process::id()))
}

/// Splits a CSV body into header fields and rows of fields.
fn parse_csv(text: &str) -> (Vec<&str>, Vec<Vec<&str>>) {
    let mut lines = text.lines();
    let header = lines.next().expect("header").split(',').collect();
    let rows = lines.map(|l| l.split(',').collect()).collect();
    (header, rows)
}

#[test]
fn cdf_populates_closed_column_only_when_available() {
    let text = run_ok(&["cdf", "--alpha", "0.5", "--t", "1,4"]);
    let (header, rows) = parse_csv(&text);
    assert_eq!(header, ["t", "F_quadrature", "F_closed", "F_mc", "mc_stderr"]);
    assert_eq!(rows.len(), 2);
    let quadrature: f64 = rows[0][1].parse().unwrap();
    let closed: f64 = rows[0][2].parse().unwrap();
    assert!((quadrature - closed).abs() < 1e-6);
    assert_eq!(closed, 0.5);
    assert_eq!(rows[0][3], "");
    assert_eq!(rows[0][4], "");

    // No closed form away from alpha = 0.5 unless the limit is requested.
    let text = run_ok(&["cdf", "--alpha", "0.3", "--t", "1"]);
    let (_, rows) = parse_csv(&text);
    assert_eq!(rows[0][2], "");

    let text = run_ok(&["cdf", "--alpha", "0.02", "--t", "4", "--limit0"]);
    let (_, rows) = parse_csv(&text);
    let limit: f64 = rows[0][2].parse().unwrap();
    assert_eq!(limit, 0.8);
}

#[test]
fn cdf_monte_carlo_column_tracks_quadrature() {
    let text = run_ok(&[
        "cdf", "--alpha", "0.5", "--t", "1", "--mc", "100000", "--seed", "3",
    ]);
    let (_, rows) = parse_csv(&text);
    let estimate: f64 = rows[0][3].parse().unwrap();
    let se: f64 = rows[0][4].parse().unwrap();
    assert!(se > 0.0);
    assert!((estimate - 0.5).abs() <= 4.0 * se, "mc {estimate} se {se}");
}

#[test]
fn randomized_commands_demand_a_seed() {
    let out = sparsecc(&["cdf", "--alpha", "0.5", "--t", "1", "--mc", "1000"]);
    assert_eq!(exit_code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("seed"));

    let out = sparsecc(&[
        "simulate", "--n", "50", "--k", "2", "--alpha", "0.1", "--inv-gamma", "1", "--nu", "1",
    ]);
    assert_eq!(exit_code(&out), 2);

    let out = sparsecc(&["validate", "--suite", "lemma3"]);
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn complexity_reports_known_counts() {
    let text = run_ok(&[
        "complexity", "--k", "10", "--n", "10000", "--delta", "0.01", "--gamma", "0.1",
    ]);
    let (header, rows) = parse_csv(&text);
    assert_eq!(
        header,
        ["regime", "K", "gamma", "coefficient_exact", "coefficient_approx", "M"]
    );
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[0][0], "alpha0");
    assert_eq!(rows[0][5], "215");
    assert_eq!(rows[1][0], "worst");
    assert_eq!(rows[1][5], "388");
    assert_eq!(rows[2][0], "alpha1");
    assert_eq!(rows[2][5], "388");

    let out = sparsecc(&["complexity", "--k", "10", "--n", "100", "--regime", "alpha0"]);
    assert_eq!(exit_code(&out), 2, "alpha0 without --gamma is an argument error");
}

#[test]
fn hcurve_optimize_and_lambda_are_exclusive() {
    let out = sparsecc(&[
        "hcurve", "--alpha", "0.5", "--epsilon", "0.5", "--lambda", "1", "--optimize",
    ]);
    assert_eq!(exit_code(&out), 2);

    let out = sparsecc(&["hcurve", "--alpha", "0.5", "--epsilon", "0.5"]);
    assert_eq!(exit_code(&out), 2, "needs --lambda or --optimize");

    let text = run_ok(&[
        "hcurve", "--alpha", "0.95", "--epsilon", "0.5", "--optimize", "--k", "10",
    ]);
    let (header, rows) = parse_csv(&text);
    assert_eq!(header, ["alpha", "epsilon", "lambda", "h", "K_over_h"]);
    let h: f64 = rows[0][3].parse().unwrap();
    let k_over_h: f64 = rows[0][4].parse().unwrap();
    assert!((k_over_h - 10.0 / h).abs() < 1e-12);
}

const SMALL_SIM: &[&str] = &[
    "simulate", "--n", "300", "--k", "5", "--alpha", "0.05", "--inv-gamma", "2", "--nu", "1.5",
    "--trials", "5", "--seed", "13",
];

#[test]
fn simulate_reruns_are_byte_identical() {
    let first = run_ok(SMALL_SIM);
    let second = run_ok(SMALL_SIM);
    assert_eq!(first.as_bytes(), second.as_bytes());
    let (header, rows) = parse_csv(&first);
    assert_eq!(
        header,
        [
            "alpha",
            "inv_gamma",
            "nu",
            "M",
            "median_error",
            "failure_rate",
            "mean_uncovered",
            "trials",
            "seed"
        ]
    );
    assert_eq!(rows.len(), 1);
    assert!(!first.contains('\r'));
    assert!(first.ends_with('\n'));
}

#[test]
fn simulate_config_file_matches_inline_flags() {
    let inline = run_ok(SMALL_SIM);

    let path = temp_path("config.txt");
    std::fs::write(
        &path,
        "# equivalent sweep\n\
         n = 300\n\
         k = 5\n\
         signal_kind = binary\n\
         alpha_list = 0.05\n\
         inv_gamma_list = 2\n\
         nu_list = 1.5\n\
         delta = 0.01\n\
         epsilon = 0.5\n\
         trials = 5\n\
         master_seed = 13\n",
    )
    .unwrap();
    let from_file = run_ok(&["simulate", "--config", path.to_str().unwrap()]);
    assert_eq!(inline.as_bytes(), from_file.as_bytes());

    // Config and inline flags cannot be mixed.
    let out = sparsecc(&["simulate", "--config", path.to_str().unwrap(), "--n", "300"]);
    assert_eq!(exit_code(&out), 2);
    std::fs::remove_file(&path).ok();
}

#[test]
fn config_errors_carry_line_and_field() {
    let path = temp_path("bad_config.txt");
    std::fs::write(&path, "n = 300\nk = five\n").unwrap();
    let out = sparsecc(&["simulate", "--config", path.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 2);
    let stderr = String::from_utf8_lossy(&out.stderr).into_owned();
    assert!(stderr.contains("line 2"), "stderr: {stderr}");
    assert!(stderr.contains("`k`"), "stderr: {stderr}");
    std::fs::remove_file(&path).ok();
}

#[test]
fn simulate_json_carries_the_same_records() {
    let csv = run_ok(SMALL_SIM);
    let (_, rows) = parse_csv(&csv);
    let json = run_ok(&[SMALL_SIM, &["--json"]].concat());
    let value: serde_json::Value = serde_json::from_str(&json).unwrap();
    let records = value.as_array().unwrap();
    assert_eq!(records.len(), rows.len());
    let record = &records[0];
    for (field, column) in [
        ("alpha", 0),
        ("inv_gamma", 1),
        ("nu", 2),
        ("M", 3),
        ("median_error", 4),
        ("failure_rate", 5),
        ("mean_uncovered", 6),
        ("trials", 7),
        ("seed", 8),
    ] {
        let json_value = record.get(field).unwrap_or_else(|| panic!("missing {field}"));
        let csv_value: f64 = rows[0][column].parse().unwrap();
        assert_eq!(json_value.as_f64().unwrap(), csv_value, "field {field}");
    }
}

#[test]
fn csv_floats_round_trip_through_parsing() {
    let text = run_ok(SMALL_SIM);
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    let mut rebuilt = format!("{header}\n");
    for line in lines {
        let fields: Vec<String> = line
            .split(',')
            .map(|field| {
                // Integer-valued columns reparse as u64; everything else as f64.
                if field.chars().all(|c| c.is_ascii_digit()) {
                    field.parse::<u64>().unwrap().to_string()
                } else {
                    field.parse::<f64>().unwrap().to_string()
                }
            })
            .collect();
        rebuilt.push_str(&fields.join(","));
        rebuilt.push('\n');
    }
    assert_eq!(text, rebuilt);
}

#[test]
fn out_flag_writes_the_same_bytes() {
    let path = temp_path("cdf.csv");
    let stdout_copy = run_ok(&["cdf", "--alpha", "0.5", "--t", "1,2"]);
    let piped = run_ok(&["cdf", "--alpha", "0.5", "--t", "1,2", "--out", path.to_str().unwrap()]);
    assert!(piped.is_empty());
    let written = std::fs::read_to_string(&path).unwrap();
    assert_eq!(stdout_copy, written);
    std::fs::remove_file(&path).ok();
}

#[test]
fn validate_suites_report_and_set_exit_codes() {
    let out = sparsecc(&["validate", "--suite", "appendixB"]);
    assert_eq!(exit_code(&out), 0);
    let text = String::from_utf8_lossy(&out.stdout).into_owned();
    assert!(text.contains("150 checks, 0 failed"));
    assert!(text.contains("observed"));
    assert!(text.contains("tolerance"));

    // This seed's zero-branch rate sits well outside the 3 se window; the
    // suite must say so and exit with the validation failure code.
    let out = sparsecc(&["validate", "--suite", "lemma3", "--seed", "25"]);
    assert_eq!(exit_code(&out), 4);
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL"));

    let out = sparsecc(&["validate", "--suite", "nonsense"]);
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn sampling_overflow_reports_a_numerical_error() {
    // At alpha just above the floor, ratio draws saturate the log guard
    // quickly; the command must fail with the numerical exit code.
    let out = sparsecc(&[
        "cdf", "--alpha", "0.011", "--t", "1", "--mc", "200000", "--seed", "1",
    ]);
    assert_eq!(exit_code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("overflow"));
}

#[test]
fn folded_gaussian_cell_stays_accurate() {
    // Regression bound for the non-binary signal family on the headline cell.
    let text = run_ok(&[
        "simulate", "--n", "10000", "--k", "10", "--signal", "folded_gaussian", "--alpha",
        "0.05", "--inv-gamma", "5", "--nu", "2", "--trials", "20", "--seed", "42",
    ]);
    let (_, rows) = parse_csv(&text);
    let median: f64 = rows[0][4].parse().unwrap();
    assert!(median <= 0.05, "median {median}");
}
