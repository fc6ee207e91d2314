//! Error probabilities, measurement-count formulas, and decodability curves.
//!
//! Everything here is closed-form or quadrature-backed arithmetic; no
//! simulation. The two tractable ends of the alpha range anchor the rest:
//! as `alpha -> 0+` the interference behind a sampled coordinate reduces to a
//! Binomial count and every expectation collapses to elementary algebra, and
//! at `alpha = 1/2` the ratio CDF is an arctangent. General alpha goes
//! through [`RatioCdf`] quadrature.
//!
//! Conventions used throughout:
//! - `k` is the signal sparsity K, `m` the measurement count M.
//! - All logarithms are natural; measurement formulas pair `ln(N/delta)`
//!   with `-ln(1 - p)` from the same base so the cancellation in the
//!   per-measurement analysis is exact.
//! - A coordinate with `k` interfering nonzero entries in a row decodes to
//!   within `epsilon` exactly when the ratio statistic falls below
//!   `t_k = (epsilon^alpha / k)^(1/(1-alpha))`; `k = 0` means no
//!   interference and always decodes, entering sums as `F(inf) = 1`.

use crate::error::{Error, Result};
use crate::ratio_cdf::{QuadratureSpec, RatioCdf};

use serde::Serialize;

/// Default Poisson tail mass left out of truncated series.
pub const DEFAULT_TAIL_TOL: f64 = 1e-12;

fn check_gamma(gamma: f64) -> Result<()> {
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::invalid("gamma", format!("must lie in (0, 1], got {gamma}")));
    }
    Ok(())
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::invalid("epsilon", format!("must be positive and finite, got {epsilon}")));
    }
    Ok(())
}

fn check_sparsity(k: usize) -> Result<()> {
    if k < 1 {
        return Err(Error::invalid("k", "sparsity must be at least 1"));
    }
    Ok(())
}

/// Exact recovery failure probability for one coordinate in the
/// `alpha -> 0+` regime of a binary K-sparse signal:
///
/// ```text
/// [1 - (1/K')(1 - (1-gamma)^K')]^m,   K' = k + [x_i = 0]
/// ```
///
/// A measurement succeeds for coordinate `i` when it samples `i` and the
/// Binomial interference count is outvoted by the `1/(1+eta)` expectation;
/// the zero branch sees one more potential interferer, so it dominates.
pub fn err_prob_alpha0(k: usize, gamma: f64, m: usize, x_is_zero: bool) -> Result<f64> {
    check_sparsity(k)?;
    check_gamma(gamma)?;
    if m < 1 {
        return Err(Error::invalid("m", "need at least one measurement"));
    }
    let k_eff = (k + usize::from(x_is_zero)) as f64;
    let base = 1.0 - (1.0 - (1.0 - gamma).powf(k_eff)) / k_eff;
    Ok(base.powf(m as f64))
}

/// Closed-form upper bound on the `alpha -> 0+` failure probability,
/// `[1 - 1/(1/gamma + k)]^m`; dominates [`err_prob_alpha0`] on both branches.
pub fn err_upper_alpha0(k: usize, gamma: f64, m: usize) -> Result<f64> {
    check_sparsity(k)?;
    check_gamma(gamma)?;
    if m < 1 {
        return Err(Error::invalid("m", "need at least one measurement"));
    }
    let base = 1.0 - 1.0 / (1.0 / gamma + k as f64);
    Ok(base.powf(m as f64))
}

/// Failure bound at `alpha = 1/2` for a nonnegative signal with
/// `sum_sqrt = sum_t sqrt(x_t)`:
///
/// ```text
/// [1 - gamma (2/pi) arctan(sqrt(epsilon) / (gamma sum_sqrt))]^m
/// ```
pub fn err_upper_half(sum_sqrt: f64, gamma: f64, m: usize, epsilon: f64) -> Result<f64> {
    if !(sum_sqrt > 0.0 && sum_sqrt.is_finite()) {
        return Err(Error::invalid("sum_sqrt", format!("must be positive and finite, got {sum_sqrt}")));
    }
    check_gamma(gamma)?;
    check_epsilon(epsilon)?;
    let success = gamma * std::f64::consts::FRAC_2_PI * (epsilon.sqrt() / (gamma * sum_sqrt)).atan();
    Ok((1.0 - success).powf(m as f64))
}

/// `E[1/(1 + Binomial(k, gamma))] = (1 - (1-gamma)^(k+1)) / ((k+1) gamma)`.
pub fn expected_inv_one_plus_binomial(k: usize, gamma: f64) -> Result<f64> {
    check_gamma(gamma)?;
    let kp1 = (k + 1) as f64;
    Ok((1.0 - (1.0 - gamma).powf(kp1)) / (kp1 * gamma))
}

/// Inputs for the measurement-count formulas.
#[derive(Clone, Copy, Debug)]
pub struct ComplexityQuery {
    pub k: usize,
    pub n: usize,
    pub delta: f64,
    pub gamma: f64,
}

impl ComplexityQuery {
    fn validate(&self) -> Result<()> {
        check_sparsity(self.k)?;
        if self.n < 1 {
            return Err(Error::invalid("n", "dimension must be at least 1"));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::invalid("delta", format!("must lie in (0, 1), got {}", self.delta)));
        }
        check_gamma(self.gamma)
    }

    fn ln_n_over_delta(&self) -> f64 {
        (self.n as f64 / self.delta).ln()
    }
}

/// Which formula produced a [`ComplexityResult`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FormulaId {
    /// Exact `alpha -> 0+` count at the caller's gamma.
    Alpha0,
    /// Worst case over alpha at the safe choice `gamma = 1/(K+1)`.
    Worst,
    /// `alpha -> 1-` regime; same arithmetic as the worst case, valid when
    /// every nonzero coordinate exceeds epsilon.
    Alpha1,
}

/// A measurement count: the exact real coefficient `M / ln(N/delta)`, and its
/// ceiling-integer `M`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ComplexityResult {
    pub m_exact: u64,
    pub coefficient: f64,
    pub formula_id: FormulaId,
}

fn complexity_from_success(
    success: f64,
    query: &ComplexityQuery,
    formula_id: FormulaId,
) -> ComplexityResult {
    let coefficient = 1.0 / -(-success).ln_1p();
    ComplexityResult {
        m_exact: (coefficient * query.ln_n_over_delta()).ceil() as u64,
        coefficient,
        formula_id,
    }
}

/// Measurements sufficient in the `alpha -> 0+` regime:
/// `M = ln(N/delta) / (-ln[1 - (1/(K+1))(1 - (1-gamma)^(K+1))])`.
///
/// Returns the exact result plus the headline approximation coefficient
/// `K / (1 - e^(-gamma K))` for comparison; epsilon plays no role in this
/// regime (the limiting failure probability is epsilon-free).
pub fn measurements_alpha0(query: ComplexityQuery) -> Result<(ComplexityResult, f64)> {
    query.validate()?;
    // Per-measurement success on the dominant zero branch:
    // gamma E[1/(1+Binomial(K, gamma))] = (1/(K+1))(1 - (1-gamma)^(K+1)).
    let success = query.gamma * expected_inv_one_plus_binomial(query.k, query.gamma)?;
    let kf = query.k as f64;
    let approx = kf / (1.0 - (-query.gamma * kf).exp());
    Ok((complexity_from_success(success, &query, FormulaId::Alpha0), approx))
}

/// Worst-case-over-alpha measurement count at the safe sparsification
/// `gamma = 1/(K+1)`; the approximation coefficient is `e K`.
pub fn measurements_worst(k: usize, n: usize, delta: f64) -> Result<(ComplexityResult, f64)> {
    measurements_at_safe_gamma(k, n, delta, FormulaId::Worst)
}

/// `alpha -> 1-` measurement count; identical arithmetic to
/// [`measurements_worst`], reported under its own formula id. Valid when
/// every nonzero coordinate exceeds the additive precision.
pub fn measurements_alpha1(k: usize, n: usize, delta: f64) -> Result<(ComplexityResult, f64)> {
    measurements_at_safe_gamma(k, n, delta, FormulaId::Alpha1)
}

fn measurements_at_safe_gamma(
    k: usize,
    n: usize,
    delta: f64,
    formula_id: FormulaId,
) -> Result<(ComplexityResult, f64)> {
    let query = ComplexityQuery { k, n, delta, gamma: 1.0 / (k + 1) as f64 };
    query.validate()?;
    let kp1 = (k + 1) as f64;
    let success = (1.0 - 1.0 / kp1).powf(k as f64) / kp1;
    let approx = std::f64::consts::E * k as f64;
    Ok((complexity_from_success(success, &query, formula_id), approx))
}

/// `ln t_k` for the decodability threshold `t_k = (eps^alpha / k)^(1/(1-alpha))`;
/// zero interferers give `+inf` (always decodable).
fn ln_threshold(alpha: f64, epsilon: f64, interferers: usize) -> f64 {
    if interferers == 0 {
        return f64::INFINITY;
    }
    (alpha * epsilon.ln() - (interferers as f64).ln()) / (1.0 - alpha)
}

/// Evaluator selection shared by the H/h family: `alpha = 0` means the
/// degenerate limit law, `alpha = 1/2` the arctangent closed form, anything
/// else the quadrature table.
fn table_for(alpha: f64, quad: QuadratureSpec) -> Result<RatioCdf> {
    if alpha == 0.0 {
        Ok(RatioCdf::limit0())
    } else {
        RatioCdf::for_alpha(alpha, quad)
    }
}

/// Per-measurement decodability mass for binary K-sparse signals:
///
/// ```text
/// H = gamma K * sum_{k'=0}^{K} F_alpha(t_k') Binom(K, gamma)(k')
/// ```
///
/// `H` lies in `(0, gamma K]`; the implied measurement coefficient is `K/H`.
pub fn h_exact_binomial(
    gamma: f64,
    k: usize,
    epsilon: f64,
    alpha: f64,
    quad: QuadratureSpec,
) -> Result<f64> {
    h_exact_binomial_with(&table_for(alpha, quad)?, gamma, k, epsilon)
}

/// [`h_exact_binomial`] against a prebuilt evaluator (reused across sweeps).
pub fn h_exact_binomial_with(cdf: &RatioCdf, gamma: f64, k: usize, epsilon: f64) -> Result<f64> {
    check_gamma(gamma)?;
    check_sparsity(k)?;
    check_epsilon(epsilon)?;
    let mut ln_fact = vec![0.0f64; k + 1];
    for i in 1..=k {
        ln_fact[i] = ln_fact[i - 1] + (i as f64).ln();
    }
    let alpha = cdf.alpha();
    let mut acc = 0.0;
    for kp in 0..=k {
        // Binomial pmf in the log domain; the boundary terms skip their
        // vanishing factor so gamma = 1 stays finite.
        let mut ln_pmf = ln_fact[k] - ln_fact[kp] - ln_fact[k - kp];
        if kp > 0 {
            ln_pmf += kp as f64 * gamma.ln();
        }
        if k - kp > 0 {
            ln_pmf += (k - kp) as f64 * (1.0 - gamma).ln();
        }
        acc += ln_pmf.exp() * cdf.eval_ln(ln_threshold(alpha, epsilon, kp));
    }
    Ok(gamma * k as f64 * acc)
}

/// Poisson-interference decodability curve:
///
/// ```text
/// h(lambda; epsilon, alpha) = lambda * sum_{k>=0} F_alpha(t_k) Pois(lambda)(k)
/// ```
///
/// The series stops at the first `k` whose cumulative Poisson mass reaches
/// `1 - tail_tol`, which bounds the truncation error by `lambda * tail_tol`.
pub fn h_poisson(
    lambda: f64,
    epsilon: f64,
    alpha: f64,
    quad: QuadratureSpec,
    tail_tol: f64,
) -> Result<f64> {
    h_poisson_with(&table_for(alpha, quad)?, lambda, epsilon, tail_tol)
}

/// [`h_poisson`] against a prebuilt evaluator.
pub fn h_poisson_with(cdf: &RatioCdf, lambda: f64, epsilon: f64, tail_tol: f64) -> Result<f64> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::invalid("lambda", format!("must be positive and finite, got {lambda}")));
    }
    check_epsilon(epsilon)?;
    if !(tail_tol > 0.0 && tail_tol < 1.0) {
        return Err(Error::invalid("tail_tol", format!("must lie in (0, 1), got {tail_tol}")));
    }
    let alpha = cdf.alpha();
    let cap = 2_000 + 10 * lambda as usize;
    let mut pmf = (-lambda).exp();
    let mut mass = 0.0;
    let mut acc = 0.0;
    for k in 0..=cap {
        acc += pmf * cdf.eval_ln(ln_threshold(alpha, epsilon, k));
        mass += pmf;
        if mass >= 1.0 - tail_tol {
            return Ok(lambda * acc);
        }
        pmf *= lambda / (k + 1) as f64;
    }
    Err(Error::Numerical {
        context: "h_poisson",
        message: format!("Poisson mass 1 - {tail_tol:e} not reached within {cap} terms at lambda={lambda}"),
    })
}

/// `alpha -> 1-` limit of `h`: `lambda e^-lambda` for `epsilon < 1`, plus the
/// `k = 1` term `lambda^2 e^-lambda / 2` exactly at `epsilon = 1`. Larger
/// epsilon has no defined limit curve and is rejected.
pub fn h_limit_alpha1(lambda: f64, epsilon: f64) -> Result<f64> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::invalid("lambda", format!("must be positive and finite, got {lambda}")));
    }
    check_epsilon(epsilon)?;
    if epsilon > 1.0 {
        return Err(Error::invalid("epsilon", "the alpha -> 1- limit is defined only for epsilon <= 1"));
    }
    let base = lambda * (-lambda).exp();
    if epsilon < 1.0 {
        Ok(base)
    } else {
        Ok(base * (1.0 + lambda / 2.0))
    }
}

const LAMBDA_BRACKET: (f64, f64) = (1e-3, 10.0);
const LAMBDA_TOL: f64 = 1e-4;

/// Maximizes `h_poisson` over `lambda` by golden-section search on the fixed
/// bracket `(0.001, 10)`, returning `(lambda_star, h_star)`. The curve is
/// unimodal over the supported range, so the search is reliable to the
/// bracket tolerance `1e-4`.
pub fn optimize_lambda(epsilon: f64, alpha: f64, quad: QuadratureSpec) -> Result<(f64, f64)> {
    optimize_lambda_with(&table_for(alpha, quad)?, epsilon)
}

/// [`optimize_lambda`] against a prebuilt evaluator.
pub fn optimize_lambda_with(cdf: &RatioCdf, epsilon: f64) -> Result<(f64, f64)> {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let h = |lambda: f64| h_poisson_with(cdf, lambda, epsilon, DEFAULT_TAIL_TOL);
    let (mut a, mut b) = LAMBDA_BRACKET;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut hc = h(c)?;
    let mut hd = h(d)?;
    while b - a > LAMBDA_TOL {
        if hc > hd {
            b = d;
            d = c;
            hd = hc;
            c = b - INV_PHI * (b - a);
            hc = h(c)?;
        } else {
            a = c;
            c = d;
            hc = hd;
            d = a + INV_PHI * (b - a);
            hd = h(d)?;
        }
    }
    let lambda_star = 0.5 * (a + b);
    Ok((lambda_star, h(lambda_star)?))
}
