//! Deterministic experiment sweeps over (alpha, gamma, nu) grids.
//!
//! Every trial is keyed by its grid indices and trial number through the
//! splittable RNG, so results are independent of execution order and thread
//! count. Aggregation happens in fixed grid order after all trials complete.

use rayon::prelude::*;
use serde::Serialize;

use crate::codec::{decode_min, encode, generate_signal, normalized_error, DesignParams, SignalKind};
use crate::error::{Error, Result};
use crate::rng::StreamKey;

/// Full description of a sweep: signal family, grid axes, and seed.
///
/// `inv_gamma_list` holds integer reciprocals 1/gamma; the sampled designs use
/// gamma = 1/v for each entry v, which keeps the sparse regimes exactly
/// representable (gamma = 1, 1/5, 1/10, ...).
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub n: usize,
    pub k: usize,
    pub signal_kind: SignalKind,
    pub alpha_list: Vec<f64>,
    pub inv_gamma_list: Vec<u32>,
    pub nu_list: Vec<f64>,
    pub delta: f64,
    pub epsilon: f64,
    pub trials: usize,
    pub master_seed: u64,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::invalid("n", "must be at least 1"));
        }
        if self.k == 0 || self.k > self.n {
            return Err(Error::invalid("k", "must satisfy 1 <= k <= n"));
        }
        if self.alpha_list.is_empty() {
            return Err(Error::invalid("alpha_list", "must be nonempty"));
        }
        for &a in &self.alpha_list {
            crate::stable_sampler::validate_alpha(a)?;
        }
        if self.inv_gamma_list.is_empty() {
            return Err(Error::invalid("inv_gamma_list", "must be nonempty"));
        }
        for &v in &self.inv_gamma_list {
            if v == 0 || v as usize > self.k {
                return Err(Error::invalid(
                    "inv_gamma_list",
                    "entries must be integers in [1, k]",
                ));
            }
        }
        if self.nu_list.is_empty() {
            return Err(Error::invalid("nu_list", "must be nonempty"));
        }
        for &nu in &self.nu_list {
            if !(nu.is_finite() && nu > 0.0) {
                return Err(Error::invalid("nu_list", "entries must be positive and finite"));
            }
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::invalid("delta", "must lie in (0, 1)"));
        }
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(Error::invalid("epsilon", "must be positive and finite"));
        }
        if self.trials == 0 {
            return Err(Error::invalid("trials", "must be at least 1"));
        }
        Ok(())
    }

    /// Measurement count M = ceil(nu * k * ln(n/delta)).
    pub fn measurements_for(&self, nu: f64) -> usize {
        let ln_term = (self.n as f64 / self.delta).ln();
        (nu * self.k as f64 * ln_term).ceil() as usize
    }

    /// Parses a flat `key = value` document. Lists are comma separated;
    /// `#` starts a comment; blank lines are skipped. Every field is required.
    pub fn parse(text: &str) -> Result<Self> {
        let mut n = None;
        let mut k = None;
        let mut signal_kind = None;
        let mut alpha_list = None;
        let mut inv_gamma_list = None;
        let mut nu_list = None;
        let mut delta = None;
        let mut epsilon = None;
        let mut trials = None;
        let mut master_seed = None;

        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let stripped = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if stripped.is_empty() {
                continue;
            }
            let (key, value) = stripped.split_once('=').ok_or(Error::ConfigParse {
                line,
                field: String::new(),
                message: "expected `key = value`".into(),
            })?;
            let key = key.trim();
            let value = value.trim();
            let parse_err = |message: String| Error::ConfigParse {
                line,
                field: key.to_string(),
                message,
            };
            match key {
                "n" => n = Some(parse_scalar(value).map_err(parse_err)?),
                "k" => k = Some(parse_scalar(value).map_err(parse_err)?),
                "signal_kind" => {
                    signal_kind = Some(SignalKind::parse(value).map_err(|e| {
                        Error::ConfigParse {
                            line,
                            field: key.to_string(),
                            message: e.to_string(),
                        }
                    })?)
                }
                "alpha_list" => alpha_list = Some(parse_list(value).map_err(parse_err)?),
                "inv_gamma_list" => inv_gamma_list = Some(parse_list(value).map_err(parse_err)?),
                "nu_list" => nu_list = Some(parse_list(value).map_err(parse_err)?),
                "delta" => delta = Some(parse_scalar(value).map_err(parse_err)?),
                "epsilon" => epsilon = Some(parse_scalar(value).map_err(parse_err)?),
                "trials" => trials = Some(parse_scalar(value).map_err(parse_err)?),
                "master_seed" => master_seed = Some(parse_scalar(value).map_err(parse_err)?),
                other => {
                    return Err(Error::ConfigParse {
                        line,
                        field: other.to_string(),
                        message: "unknown field".into(),
                    })
                }
            }
        }

        fn require<T>(value: Option<T>, field: &str) -> Result<T> {
            value.ok_or_else(|| Error::ConfigParse {
                line: 0,
                field: field.to_string(),
                message: "missing required field".into(),
            })
        }

        let config = ExperimentConfig {
            n: require(n, "n")?,
            k: require(k, "k")?,
            signal_kind: require(signal_kind, "signal_kind")?,
            alpha_list: require(alpha_list, "alpha_list")?,
            inv_gamma_list: require(inv_gamma_list, "inv_gamma_list")?,
            nu_list: require(nu_list, "nu_list")?,
            delta: require(delta, "delta")?,
            epsilon: require(epsilon, "epsilon")?,
            trials: require(trials, "trials")?,
            master_seed: require(master_seed, "master_seed")?,
        };
        config.validate()?;
        Ok(config)
    }
}

fn parse_scalar<T: std::str::FromStr>(value: &str) -> std::result::Result<T, String> {
    value
        .parse()
        .map_err(|_| format!("cannot parse `{value}`"))
}

fn parse_list<T: std::str::FromStr>(value: &str) -> std::result::Result<Vec<T>, String> {
    value
        .split(',')
        .map(|item| {
            let item = item.trim();
            item.parse()
                .map_err(|_| format!("cannot parse list item `{item}`"))
        })
        .collect()
}

/// Outcome of a single (cell, trial) run.
#[derive(Clone, Copy, Debug)]
pub struct TrialResult {
    pub normalized_error: f64,
    /// True when some covered coordinate exceeds x_i + epsilon.
    pub any_failure: bool,
    pub uncovered_count: usize,
    /// Smallest xhat_i - x_i over covered coordinates (+inf when none are
    /// covered). Nonnegative whenever the one-sided property holds.
    pub min_covered_margin: f64,
}

/// Runs one trial of the cell selected by grid indices into the config lists.
///
/// The signal and design derive from the stream path
/// (seed, alpha_idx, gamma_idx, nu_idx, trial), so any scheduling of trials
/// reproduces identical data.
pub fn run_trial(
    config: &ExperimentConfig,
    alpha_idx: usize,
    gamma_idx: usize,
    nu_idx: usize,
    trial: usize,
) -> Result<TrialResult> {
    config.validate()?;
    let alpha = *config
        .alpha_list
        .get(alpha_idx)
        .ok_or(Error::invalid("alpha_idx", "out of range"))?;
    let inv_gamma = *config
        .inv_gamma_list
        .get(gamma_idx)
        .ok_or(Error::invalid("gamma_idx", "out of range"))?;
    let nu = *config
        .nu_list
        .get(nu_idx)
        .ok_or(Error::invalid("nu_idx", "out of range"))?;
    if trial >= config.trials {
        return Err(Error::invalid("trial", "out of range"));
    }

    let gamma = 1.0 / f64::from(inv_gamma);
    let m = config.measurements_for(nu);
    let cell = StreamKey::root(config.master_seed)
        .child_index(alpha_idx as u64)
        .child_index(gamma_idx as u64)
        .child_index(nu_idx as u64)
        .child_index(trial as u64);
    let mut signal_stream = cell.child_str("signal").stream();
    let signal = generate_signal(config.signal_kind, config.n, config.k, &mut signal_stream)?;
    let params = DesignParams {
        n: config.n,
        m,
        alpha,
        gamma,
        master_seed: cell.child_str("design").stream().next_u64(),
    };
    let measurements = encode(&signal, &params)?;
    let estimate = decode_min(&measurements, &params)?;
    let error = normalized_error(&signal, &estimate)?;

    let mut any_failure = false;
    let mut min_covered_margin = f64::INFINITY;
    for i in 0..config.n {
        if estimate.covered()[i] {
            let margin = estimate.values()[i] - signal.value(i);
            any_failure |= margin > config.epsilon;
            min_covered_margin = min_covered_margin.min(margin);
        }
    }

    Ok(TrialResult {
        normalized_error: error,
        any_failure,
        uncovered_count: estimate.uncovered_count(),
        min_covered_margin,
    })
}

/// Aggregated summary of one grid cell.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct CellResult {
    pub alpha: f64,
    pub inv_gamma: u32,
    pub gamma: f64,
    pub nu: f64,
    pub m: usize,
    /// Lower median of normalized errors across trials.
    pub median_error: f64,
    /// Fraction of trials where some covered coordinate missed by more than
    /// epsilon. Coverage gaps are reported separately via `mean_uncovered`.
    pub failure_rate: f64,
    pub mean_uncovered: f64,
    pub trials: usize,
}

/// Runs all trials of one cell and aggregates. Returns the per-trial results
/// alongside the summary so callers can inspect margins and error spreads.
pub fn run_cell(
    config: &ExperimentConfig,
    alpha_idx: usize,
    gamma_idx: usize,
    nu_idx: usize,
) -> Result<(CellResult, Vec<TrialResult>)> {
    config.validate()?;
    let trials: Vec<TrialResult> = (0..config.trials)
        .into_par_iter()
        .map(|trial| run_trial(config, alpha_idx, gamma_idx, nu_idx, trial))
        .collect::<Result<Vec<_>>>()?;

    let mut errors: Vec<f64> = trials.iter().map(|t| t.normalized_error).collect();
    errors.sort_by(|a, b| a.partial_cmp(b).expect("normalized errors are finite"));
    let median_error = errors[(errors.len() - 1) / 2];
    let failures = trials.iter().filter(|t| t.any_failure).count();
    let uncovered_sum: usize = trials.iter().map(|t| t.uncovered_count).sum();

    let inv_gamma = config.inv_gamma_list[gamma_idx];
    let nu = config.nu_list[nu_idx];
    let cell = CellResult {
        alpha: config.alpha_list[alpha_idx],
        inv_gamma,
        gamma: 1.0 / f64::from(inv_gamma),
        nu,
        m: config.measurements_for(nu),
        median_error,
        failure_rate: failures as f64 / config.trials as f64,
        mean_uncovered: uncovered_sum as f64 / config.trials as f64,
        trials: config.trials,
    };
    Ok((cell, trials))
}

/// Sweeps the full grid in (alpha, inv_gamma, nu) order.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<CellResult>> {
    config.validate()?;
    let mut cells = Vec::new();
    for alpha_idx in 0..config.alpha_list.len() {
        for gamma_idx in 0..config.inv_gamma_list.len() {
            for nu_idx in 0..config.nu_list.len() {
                let (cell, _) = run_cell(config, alpha_idx, gamma_idx, nu_idx)?;
                cells.push(cell);
            }
        }
    }
    Ok(cells)
}

/// CSV rendering of sweep results; one row per cell, LF line endings.
pub fn cells_to_csv(cells: &[CellResult], seed: u64) -> String {
    let mut out = String::from(
        "alpha,inv_gamma,nu,M,median_error,failure_rate,mean_uncovered,trials,seed\n",
    );
    for c in cells {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            c.alpha,
            c.inv_gamma,
            c.nu,
            c.m,
            c.median_error,
            c.failure_rate,
            c.mean_uncovered,
            c.trials,
            seed,
        ));
    }
    out
}

/// Per-coordinate recovery failure rates measured on binary signals.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct EmpiricalErrorProb {
    /// Fraction of zero coordinates with estimate above epsilon.
    pub rate_zero: f64,
    /// Fraction of support coordinates with estimate above 1 + epsilon.
    pub rate_support: f64,
    /// Standard errors of the two rates, clustered at trial level because the
    /// coordinates of one trial share a design and signal.
    pub se_zero: f64,
    pub se_support: f64,
}

/// Measures Pr[xhat_i > x_i + epsilon] per coordinate class over independent
/// trials with fresh binary signals and designs.
///
/// A coordinate left uncovered has no estimator and counts as a failure: the
/// product-form bound being tested charges all M measurements at once, which
/// includes the event that none of them sample the coordinate.
pub fn empirical_error_prob(
    n: usize,
    k: usize,
    gamma: f64,
    alpha: f64,
    m: usize,
    epsilon: f64,
    trials: usize,
    master_seed: u64,
) -> Result<EmpiricalErrorProb> {
    if k == 0 || k >= n {
        return Err(Error::invalid("k", "must satisfy 1 <= k < n"));
    }
    if m == 0 {
        return Err(Error::invalid("m", "must be at least 1"));
    }
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::invalid("epsilon", "must be positive and finite"));
    }
    if trials == 0 {
        return Err(Error::invalid("trials", "must be at least 1"));
    }

    // Per-trial failure fractions for each coordinate class.
    let fractions: Vec<(f64, f64)> = (0..trials)
        .into_par_iter()
        .map(|trial| -> Result<(f64, f64)> {
            let base = StreamKey::root(master_seed)
                .child_str("bridge")
                .child_index(trial as u64);
            let mut signal_stream = base.child_str("signal").stream();
            let signal = generate_signal(SignalKind::Binary, n, k, &mut signal_stream)?;
            let params = DesignParams {
                n,
                m,
                alpha,
                gamma,
                master_seed: base.child_str("design").stream().next_u64(),
            };
            let measurements = encode(&signal, &params)?;
            let estimate = decode_min(&measurements, &params)?;

            let mut zero_fail = 0usize;
            let mut support_fail = 0usize;
            for i in 0..n {
                let truth = signal.value(i);
                let failed = !estimate.covered()[i] || estimate.values()[i] > truth + epsilon;
                if failed {
                    if truth == 0.0 {
                        zero_fail += 1;
                    } else {
                        support_fail += 1;
                    }
                }
            }
            Ok((
                zero_fail as f64 / (n - k) as f64,
                support_fail as f64 / k as f64,
            ))
        })
        .collect::<Result<Vec<_>>>()?;

    let t = trials as f64;
    let mean = |sel: fn(&(f64, f64)) -> f64| fractions.iter().map(sel).sum::<f64>() / t;
    let rate_zero = mean(|f| f.0);
    let rate_support = mean(|f| f.1);
    let se = |sel: fn(&(f64, f64)) -> f64, center: f64| {
        if trials < 2 {
            return 0.0;
        }
        let var = fractions
            .iter()
            .map(|f| (sel(f) - center).powi(2))
            .sum::<f64>()
            / (t - 1.0);
        (var / t).sqrt()
    };
    Ok(EmpiricalErrorProb {
        rate_zero,
        rate_support,
        se_zero: se(|f| f.0, rate_zero),
        se_support: se(|f| f.1, rate_support),
    })
}
