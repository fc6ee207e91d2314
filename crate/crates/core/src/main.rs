//! Command line driver: CDF tables, measurement-count formulas, h-curves,
//! simulation sweeps, and built-in validation suites.
//!
//! Exit codes: 0 success, 2 argument errors, 3 numerical errors,
//! 4 validation-suite failure.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use sparsecc::analysis::{
    err_prob_alpha0, expected_inv_one_plus_binomial, h_poisson, measurements_alpha0,
    measurements_alpha1, measurements_worst, optimize_lambda, ComplexityQuery, DEFAULT_TAIL_TOL,
};
use sparsecc::codec::SignalKind;
use sparsecc::experiments::{
    cells_to_csv, empirical_error_prob, run_experiment, ExperimentConfig,
};
use sparsecc::ratio_cdf::{
    cdf_ratio_half, cdf_ratio_limit0, cdf_ratio_mc, QuadratureSpec, RatioCdf,
};
use sparsecc::rng::StreamKey;
use sparsecc::{Error, Result};

const EXIT_ARGUMENT: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;
const EXIT_VALIDATION: u8 = 4;

/// Sparse nonnegative recovery with skewed-stable sketches.
#[derive(Parser)]
#[command(name = "sparsecc", version, max_term_width = 100)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate the decodability CDF F_alpha(t).
    Cdf(CdfArgs),
    /// Measurement-count formulas per regime.
    Complexity(ComplexityArgs),
    /// Per-measurement decodability rate h(lambda) under Poisson occupancy.
    Hcurve(HcurveArgs),
    /// Run encode/decode sweeps over an (alpha, 1/gamma, nu) grid.
    Simulate(SimulateArgs),
    /// Re-run a built-in statistical validation suite.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct OutputArgs {
    /// Emit records as a JSON array instead of CSV.
    #[arg(long)]
    json: bool,
    /// Write output to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CdfArgs {
    /// Stability index in (0, 1).
    #[arg(long)]
    alpha: f64,
    /// Thresholds t >= 0, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    t: Vec<f64>,
    /// Gauss-Legendre nodes per axis.
    #[arg(long, default_value_t = 128)]
    nodes: usize,
    /// Add a Monte Carlo column with this many ratio draws per threshold.
    #[arg(long)]
    mc: Option<usize>,
    /// Master seed for Monte Carlo draws (required with --mc).
    #[arg(long)]
    seed: Option<u64>,
    /// Fill the closed-form column with the alpha -> 0+ limit t/(1+t).
    /// Without this flag the column is populated only at alpha = 0.5.
    #[arg(long)]
    limit0: bool,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct ComplexityArgs {
    /// Signal sparsity K.
    #[arg(long)]
    k: usize,
    /// Ambient dimension N.
    #[arg(long)]
    n: usize,
    /// Failure budget delta in (0, 1).
    #[arg(long, default_value_t = 0.01)]
    delta: f64,
    /// Regimes to evaluate (default: all three).
    #[arg(long, value_delimiter = ',')]
    regime: Option<Vec<Regime>>,
    /// Sampling rates for the alpha0 regime, comma separated.
    #[arg(long, value_delimiter = ',')]
    gamma: Vec<f64>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum Regime {
    Alpha0,
    Worst,
    Alpha1,
}

#[derive(Args)]
struct HcurveArgs {
    /// Stability indices, comma separated; 0 selects the alpha -> 0+ limit law.
    #[arg(long, value_delimiter = ',', required = true)]
    alpha: Vec<f64>,
    /// Additive precisions epsilon > 0, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    epsilon: Vec<f64>,
    /// Evaluate h at these expected occupancies lambda = gamma K.
    #[arg(long, value_delimiter = ',')]
    lambda: Vec<f64>,
    /// Search for the lambda maximizing h instead of using --lambda.
    #[arg(long, conflicts_with = "lambda")]
    optimize: bool,
    /// Gauss-Legendre nodes per axis.
    #[arg(long, default_value_t = 128)]
    nodes: usize,
    /// Sparsity K for the K_over_h coefficient column.
    #[arg(long, default_value_t = 1.0)]
    k: f64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct SimulateArgs {
    /// Read the sweep description from a `key = value` file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Ambient dimension N.
    #[arg(long)]
    n: Option<usize>,
    /// Signal sparsity K.
    #[arg(long)]
    k: Option<usize>,
    /// Signal family: binary or folded_gaussian (default binary).
    #[arg(long)]
    signal: Option<String>,
    /// Stability indices, comma separated.
    #[arg(long, value_delimiter = ',')]
    alpha: Option<Vec<f64>>,
    /// Integer reciprocal sampling rates 1/gamma in [1, K], comma separated.
    #[arg(long = "inv-gamma", value_delimiter = ',')]
    inv_gamma: Option<Vec<u32>>,
    /// Oversampling factors nu; M = ceil(nu K ln(N/delta)).
    #[arg(long, value_delimiter = ',')]
    nu: Option<Vec<f64>>,
    /// Failure budget delta (default 0.01).
    #[arg(long)]
    delta: Option<f64>,
    /// Additive precision epsilon (default 0.5).
    #[arg(long)]
    epsilon: Option<f64>,
    /// Trials per grid cell (default 20).
    #[arg(long)]
    trials: Option<usize>,
    /// Master seed (required without --config).
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct ValidateArgs {
    /// Suite name: lemma1, appendixB, lemma3, or worstcase.
    #[arg(long)]
    suite: String,
    /// Master seed (required for the randomized suites lemma1 and lemma3).
    #[arg(long)]
    seed: Option<u64>,
    /// Trials for the lemma3 bridge (default 10000).
    #[arg(long)]
    trials: Option<usize>,
    /// Monte Carlo draws per check for lemma1 (default 1000000).
    #[arg(long)]
    samples: Option<usize>,
    #[command(flatten)]
    output: OutputArgs,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            if err.is_argument_error() {
                ExitCode::from(EXIT_ARGUMENT)
            } else {
                ExitCode::from(EXIT_NUMERICAL)
            }
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Cdf(args) => run_cdf(args),
        Command::Complexity(args) => run_complexity(args),
        Command::Hcurve(args) => run_hcurve(args),
        Command::Simulate(args) => run_simulate(args),
        Command::Validate(args) => run_validate(args),
    }
}

fn emit(output: &OutputArgs, content: &str) -> Result<()> {
    match &output.out {
        Some(path) => std::fs::write(path, content).map_err(|e| {
            Error::invalid("out", format!("cannot write {}: {e}", path.display()))
        }),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn to_json<T: Serialize>(records: &[T]) -> String {
    let mut text = serde_json::to_string_pretty(records).expect("records serialize");
    text.push('\n');
    text
}

fn opt_field(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

#[derive(Serialize)]
struct CdfRecord {
    t: f64,
    #[serde(rename = "F_quadrature")]
    f_quadrature: f64,
    #[serde(rename = "F_closed")]
    f_closed: Option<f64>,
    #[serde(rename = "F_mc")]
    f_mc: Option<f64>,
    mc_stderr: Option<f64>,
}

fn run_cdf(args: CdfArgs) -> Result<ExitCode> {
    let spec = QuadratureSpec::new(args.nodes)?;
    if args.mc.is_some() && args.seed.is_none() {
        return Err(Error::invalid("seed", "--mc requires an explicit --seed"));
    }
    let table = RatioCdf::quadrature(args.alpha, spec)?;
    let mut records = Vec::with_capacity(args.t.len());
    for (idx, &t) in args.t.iter().enumerate() {
        let f_quadrature = table.eval(t)?;
        let f_closed = if args.limit0 {
            Some(cdf_ratio_limit0(t)?)
        } else if args.alpha == 0.5 {
            Some(cdf_ratio_half(t)?)
        } else {
            None
        };
        let (f_mc, mc_stderr) = match args.mc {
            Some(samples) => {
                let mut stream = StreamKey::root(args.seed.expect("checked above"))
                    .child_str("cdf")
                    .child_index(idx as u64)
                    .stream();
                let (estimate, se) = cdf_ratio_mc(args.alpha, t, samples, &mut stream)?;
                (Some(estimate), Some(se))
            }
            None => (None, None),
        };
        records.push(CdfRecord { t, f_quadrature, f_closed, f_mc, mc_stderr });
    }

    let content = if args.output.json {
        to_json(&records)
    } else {
        let mut csv = String::from("t,F_quadrature,F_closed,F_mc,mc_stderr\n");
        for r in &records {
            let _ = writeln!(
                csv,
                "{},{},{},{},{}",
                r.t,
                r.f_quadrature,
                opt_field(r.f_closed),
                opt_field(r.f_mc),
                opt_field(r.mc_stderr),
            );
        }
        csv
    };
    emit(&args.output, &content)?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct ComplexityRecord {
    regime: &'static str,
    #[serde(rename = "K")]
    k: usize,
    gamma: f64,
    coefficient_exact: f64,
    coefficient_approx: f64,
    #[serde(rename = "M")]
    m: u64,
}

fn run_complexity(args: ComplexityArgs) -> Result<ExitCode> {
    let regimes = args
        .regime
        .clone()
        .unwrap_or_else(|| vec![Regime::Alpha0, Regime::Worst, Regime::Alpha1]);
    let mut records = Vec::new();
    for regime in regimes {
        match regime {
            Regime::Alpha0 => {
                if args.gamma.is_empty() {
                    return Err(Error::invalid("gamma", "the alpha0 regime needs --gamma"));
                }
                for &gamma in &args.gamma {
                    let query = ComplexityQuery { k: args.k, n: args.n, delta: args.delta, gamma };
                    let (result, approx) = measurements_alpha0(query)?;
                    records.push(ComplexityRecord {
                        regime: "alpha0",
                        k: args.k,
                        gamma,
                        coefficient_exact: result.coefficient,
                        coefficient_approx: approx,
                        m: result.m_exact,
                    });
                }
            }
            Regime::Worst | Regime::Alpha1 => {
                let (name, built) = match regime {
                    Regime::Worst => ("worst", measurements_worst(args.k, args.n, args.delta)?),
                    _ => ("alpha1", measurements_alpha1(args.k, args.n, args.delta)?),
                };
                let (result, approx) = built;
                records.push(ComplexityRecord {
                    regime: name,
                    k: args.k,
                    gamma: 1.0 / (args.k + 1) as f64,
                    coefficient_exact: result.coefficient,
                    coefficient_approx: approx,
                    m: result.m_exact,
                });
            }
        }
    }

    let content = if args.output.json {
        to_json(&records)
    } else {
        let mut csv = String::from("regime,K,gamma,coefficient_exact,coefficient_approx,M\n");
        for r in &records {
            let _ = writeln!(
                csv,
                "{},{},{},{},{},{}",
                r.regime, r.k, r.gamma, r.coefficient_exact, r.coefficient_approx, r.m
            );
        }
        csv
    };
    emit(&args.output, &content)?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct HcurveRecord {
    alpha: f64,
    epsilon: f64,
    lambda: f64,
    h: f64,
    #[serde(rename = "K_over_h")]
    k_over_h: f64,
}

fn run_hcurve(args: HcurveArgs) -> Result<ExitCode> {
    let spec = QuadratureSpec::new(args.nodes)?;
    if args.lambda.is_empty() && !args.optimize {
        return Err(Error::invalid("lambda", "provide --lambda values or --optimize"));
    }
    if !(args.k.is_finite() && args.k > 0.0) {
        return Err(Error::invalid("k", "must be positive and finite"));
    }
    let mut records = Vec::new();
    for &alpha in &args.alpha {
        for &epsilon in &args.epsilon {
            if args.optimize {
                let (lambda, h) = optimize_lambda(epsilon, alpha, spec)?;
                records.push(HcurveRecord { alpha, epsilon, lambda, h, k_over_h: args.k / h });
            } else {
                for &lambda in &args.lambda {
                    let h = h_poisson(lambda, epsilon, alpha, spec, DEFAULT_TAIL_TOL)?;
                    records.push(HcurveRecord { alpha, epsilon, lambda, h, k_over_h: args.k / h });
                }
            }
        }
    }

    let content = if args.output.json {
        to_json(&records)
    } else {
        let mut csv = String::from("alpha,epsilon,lambda,h,K_over_h\n");
        for r in &records {
            let _ = writeln!(
                csv,
                "{},{},{},{},{}",
                r.alpha, r.epsilon, r.lambda, r.h, r.k_over_h
            );
        }
        csv
    };
    emit(&args.output, &content)?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct SimulateRecord {
    alpha: f64,
    inv_gamma: u32,
    nu: f64,
    #[serde(rename = "M")]
    m: usize,
    median_error: f64,
    failure_rate: f64,
    mean_uncovered: f64,
    trials: usize,
    seed: u64,
}

fn build_experiment_config(args: &SimulateArgs) -> Result<ExperimentConfig> {
    if let Some(path) = &args.config {
        let inline_given = args.n.is_some()
            || args.k.is_some()
            || args.signal.is_some()
            || args.alpha.is_some()
            || args.inv_gamma.is_some()
            || args.nu.is_some()
            || args.delta.is_some()
            || args.epsilon.is_some()
            || args.trials.is_some()
            || args.seed.is_some();
        if inline_given {
            return Err(Error::invalid("config", "conflicts with inline sweep flags"));
        }
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::invalid("config", format!("cannot read {}: {e}", path.display()))
        })?;
        return ExperimentConfig::parse(&text);
    }

    fn need<T>(value: Option<T>, flag: &'static str) -> Result<T> {
        value.ok_or(Error::InvalidParameter {
            name: flag,
            message: "required without --config".into(),
        })
    }
    let signal_kind = match &args.signal {
        Some(text) => SignalKind::parse(text)?,
        None => SignalKind::Binary,
    };
    let config = ExperimentConfig {
        n: need(args.n, "n")?,
        k: need(args.k, "k")?,
        signal_kind,
        alpha_list: need(args.alpha.clone(), "alpha")?,
        inv_gamma_list: need(args.inv_gamma.clone(), "inv-gamma")?,
        nu_list: need(args.nu.clone(), "nu")?,
        delta: args.delta.unwrap_or(0.01),
        epsilon: args.epsilon.unwrap_or(0.5),
        trials: args.trials.unwrap_or(20),
        master_seed: need(args.seed, "seed")?,
    };
    config.validate()?;
    Ok(config)
}

fn run_simulate(args: SimulateArgs) -> Result<ExitCode> {
    let config = build_experiment_config(&args)?;
    let cells = run_experiment(&config)?;
    let content = if args.output.json {
        let records: Vec<SimulateRecord> = cells
            .iter()
            .map(|c| SimulateRecord {
                alpha: c.alpha,
                inv_gamma: c.inv_gamma,
                nu: c.nu,
                m: c.m,
                median_error: c.median_error,
                failure_rate: c.failure_rate,
                mean_uncovered: c.mean_uncovered,
                trials: c.trials,
                seed: config.master_seed,
            })
            .collect();
        to_json(&records)
    } else {
        cells_to_csv(&cells, config.master_seed)
    };
    emit(&args.output, &content)?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct CheckRecord {
    name: String,
    observed: f64,
    expected: f64,
    tolerance: f64,
    pass: bool,
}

impl CheckRecord {
    /// Two-sided check: |observed - expected| <= tolerance.
    fn within(name: String, observed: f64, expected: f64, tolerance: f64) -> Self {
        let pass = (observed - expected).abs() <= tolerance;
        CheckRecord { name, observed, expected, tolerance, pass }
    }

    /// One-sided check: observed >= expected - tolerance.
    fn at_least(name: String, observed: f64, expected: f64, tolerance: f64) -> Self {
        let pass = observed >= expected - tolerance;
        CheckRecord { name, observed, expected, tolerance, pass }
    }
}

fn require_seed(seed: Option<u64>, suite: &str) -> Result<u64> {
    seed.ok_or(Error::InvalidParameter {
        name: "seed",
        message: format!("the {suite} suite is randomized and needs an explicit --seed"),
    })
}

fn suite_lemma1(seed: u64, samples: usize) -> Result<Vec<CheckRecord>> {
    let spec = QuadratureSpec::default();
    let mut checks = Vec::new();
    for &t in &[0.01, 0.1, 1.0, 10.0, 100.0] {
        let observed = sparsecc::ratio_cdf::cdf_ratio(0.5, t, spec)?;
        let expected = cdf_ratio_half(t)?;
        checks.push(CheckRecord::within(
            format!("half_closed_form_t={t}"),
            observed,
            expected,
            1e-6,
        ));
    }
    for &t in &[0.1, 1.0, 10.0] {
        let observed = sparsecc::ratio_cdf::cdf_ratio(0.02, t, spec)?;
        let expected = cdf_ratio_limit0(t)?;
        checks.push(CheckRecord::within(
            format!("limit0_t={t}"),
            observed,
            expected,
            5e-3,
        ));
    }
    let mut pair = 0u64;
    for &alpha in &[0.1, 0.3, 0.5, 0.7] {
        let table = RatioCdf::quadrature(alpha, spec)?;
        for &t in &[0.5, 1.0, 2.0] {
            let mut stream = StreamKey::root(seed)
                .child_str("lemma1")
                .child_index(pair)
                .stream();
            pair += 1;
            let (estimate, se) = cdf_ratio_mc(alpha, t, samples, &mut stream)?;
            let expected = table.eval(t)?;
            checks.push(CheckRecord::within(
                format!("mc_alpha={alpha}_t={t}"),
                estimate,
                expected,
                3.0 * se,
            ));
        }
    }
    Ok(checks)
}

fn suite_appendix_b() -> Result<Vec<CheckRecord>> {
    let mut checks = Vec::new();
    for k in 1..=30usize {
        for &gamma in &[0.01, 0.1, 0.5, 0.9, 1.0] {
            let observed = expected_inv_one_plus_binomial(k, gamma)?;
            // Direct binomial expectation; C(k, j) is exact in f64 for k <= 30.
            let mut expected = 0.0;
            let mut binom = 1.0f64;
            for j in 0..=k {
                let pmf = binom * gamma.powi(j as i32) * (1.0 - gamma).powi((k - j) as i32);
                expected += pmf / (1.0 + j as f64);
                binom = binom * (k - j) as f64 / (j + 1) as f64;
            }
            checks.push(CheckRecord::within(
                format!("identity_K={k}_gamma={gamma}"),
                observed,
                expected,
                1e-12,
            ));
        }
    }
    Ok(checks)
}

fn suite_lemma3(seed: u64, trials: usize) -> Result<Vec<CheckRecord>> {
    let (n, k, gamma, alpha, m, epsilon) = (50, 3, 0.4, 0.03, 10, 0.5);
    let emp = empirical_error_prob(n, k, gamma, alpha, m, epsilon, trials, seed)?;
    Ok(vec![
        CheckRecord::within(
            "zero_branch_rate".into(),
            emp.rate_zero,
            err_prob_alpha0(k, gamma, m, true)?,
            3.0 * emp.se_zero,
        ),
        CheckRecord::within(
            "support_branch_rate".into(),
            emp.rate_support,
            err_prob_alpha0(k, gamma, m, false)?,
            3.0 * emp.se_support,
        ),
    ])
}

fn suite_worstcase() -> Result<Vec<CheckRecord>> {
    let spec = QuadratureSpec::default();
    let mut checks = Vec::new();

    let per_k = |k: usize, gamma: f64| -> Result<f64> {
        let (_, approx) = measurements_alpha0(ComplexityQuery { k, n: 10_000, delta: 0.01, gamma })?;
        Ok(approx / k as f64)
    };
    checks.push(CheckRecord::within(
        "approx_per_K_at_gammaK=1".into(),
        per_k(10, 0.1)?,
        1.582,
        0.01,
    ));
    checks.push(CheckRecord::within(
        "approx_per_K_at_gammaK=2".into(),
        per_k(10, 0.2)?,
        1.157,
        0.01,
    ));
    let (exact, _) =
        measurements_alpha0(ComplexityQuery { k: 10, n: 10_000, delta: 0.01, gamma: 0.1 })?;
    checks.push(CheckRecord::within(
        "exact_coefficient_K=10_gamma=0.1".into(),
        exact.coefficient,
        15.525,
        0.01,
    ));
    let (worst, _) = measurements_worst(10, 10_000, 0.01)?;
    checks.push(CheckRecord::within(
        "worst_coefficient_K=10".into(),
        worst.coefficient,
        28.03,
        0.01,
    ));
    let (big, _) = measurements_worst(200, 10_000, 0.01)?;
    checks.push(CheckRecord::within(
        "worst_per_K_limit_K=200".into(),
        big.coefficient / 200.0,
        std::f64::consts::E,
        0.01 * std::f64::consts::E,
    ));

    // At the optimized occupancy the coefficient never exceeds eK by more
    // than 5% anywhere on the (alpha, epsilon <= 1) grid.
    let floor = (1.05 * std::f64::consts::E).recip();
    for &alpha in &[0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9] {
        for &epsilon in &[0.25, 0.5, 1.0] {
            let (_, h_star) = optimize_lambda(epsilon, alpha, spec)?;
            checks.push(CheckRecord::at_least(
                format!("h_floor_alpha={alpha}_eps={epsilon}"),
                h_star,
                floor,
                0.0,
            ));
        }
    }
    Ok(checks)
}

fn run_validate(args: ValidateArgs) -> Result<ExitCode> {
    let checks = match args.suite.as_str() {
        "lemma1" => {
            let seed = require_seed(args.seed, "lemma1")?;
            suite_lemma1(seed, args.samples.unwrap_or(1_000_000))?
        }
        "appendixB" => suite_appendix_b()?,
        "lemma3" => {
            let seed = require_seed(args.seed, "lemma3")?;
            suite_lemma3(seed, args.trials.unwrap_or(10_000))?
        }
        "worstcase" => suite_worstcase()?,
        other => {
            return Err(Error::invalid(
                "suite",
                format!("unknown suite `{other}`; expected lemma1, appendixB, lemma3, or worstcase"),
            ))
        }
    };

    let failed = checks.iter().filter(|c| !c.pass).count();
    let content = if args.output.json {
        to_json(&checks)
    } else {
        let mut text = String::new();
        for c in &checks {
            let _ = writeln!(
                text,
                "{}: observed {} expected {} tolerance {} ... {}",
                c.name,
                c.observed,
                c.expected,
                c.tolerance,
                if c.pass { "ok" } else { "FAIL" }
            );
        }
        let _ = writeln!(text, "{} checks, {} failed", checks.len(), failed);
        text
    };
    emit(&args.output, &content)?;
    Ok(if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_VALIDATION)
    })
}
