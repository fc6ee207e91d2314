//! Signal generation, sparse stable encoding, and min-ratio decoding.
//!
//! The design matrix is never materialized. Entry `(i, j)` of the masked
//! design `{s_ij r_ij}` is a pure function of the stream labeled
//! `(master_seed, "col", j, i)`: the first draw of that stream decides the
//! Bernoulli(gamma) mask, and when the entry is live the stable draw follows
//! in the same stream. Encoding therefore touches only `M * K` streams and
//! decoding regenerates `gamma * M * N` live entries on the fly, with results
//! that are bit-identical across runs, iteration orders, and thread counts.
//!
//! The decoder is the coordinatewise minimum of `y_j / s_ij` over the rows
//! that sample coordinate `i`. Since all signal entries, mask bits, and
//! stable draws are nonnegative, the minimum never falls below the true
//! value: every estimate errs upward, and the recovery analysis bounds by how
//! much.

use crate::error::{Error, Result};
use crate::rng::{RngStream, StreamKey};
use crate::stable_sampler::{ln_sample_stable, validate_alpha};

use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

/// Full encoding configuration; the design matrix is a deterministic
/// function of these fields.
#[derive(Clone, Copy, Debug)]
pub struct DesignParams {
    pub n: usize,
    pub m: usize,
    pub alpha: f64,
    pub gamma: f64,
    pub master_seed: u64,
}

impl DesignParams {
    pub fn validate(&self) -> Result<()> {
        if self.n < 1 {
            return Err(Error::invalid("n", "dimension must be at least 1"));
        }
        if self.m < 1 {
            return Err(Error::invalid("m", "need at least one measurement"));
        }
        validate_alpha(self.alpha)?;
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(Error::invalid("gamma", format!("must lie in (0, 1], got {}", self.gamma)));
        }
        Ok(())
    }

    /// Key for the column stream family; extend with `(j, i)` to address one
    /// design entry.
    fn column_base(&self) -> StreamKey {
        StreamKey::root(self.master_seed).child_str("col")
    }
}

/// A nonnegative K-sparse vector stored as sorted `(index, value)` pairs with
/// strictly positive values.
#[derive(Clone, Debug, PartialEq)]
pub struct Signal {
    n: usize,
    entries: Vec<(usize, f64)>,
}

impl Signal {
    pub fn new(n: usize, mut entries: Vec<(usize, f64)>) -> Result<Self> {
        entries.sort_unstable_by_key(|&(i, _)| i);
        for window in entries.windows(2) {
            if window[0].0 == window[1].0 {
                return Err(Error::invalid("entries", format!("duplicate index {}", window[0].0)));
            }
        }
        for &(i, v) in &entries {
            if i >= n {
                return Err(Error::invalid("entries", format!("index {i} out of range for n={n}")));
            }
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(
                    "entries",
                    format!("value at index {i} must be strictly positive and finite, got {v}"),
                ));
            }
        }
        Ok(Signal { n, entries })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Sparsity K.
    pub fn sparsity(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    /// Value at coordinate `i` (0 off the support).
    pub fn value(&self, i: usize) -> f64 {
        match self.entries.binary_search_by_key(&i, |&(idx, _)| idx) {
            Ok(pos) => self.entries[pos].1,
            Err(_) => 0.0,
        }
    }
}

/// The two signal families of the experiment protocol.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SignalKind {
    /// All nonzero values are exactly 1.
    Binary,
    /// Nonzero values are `|Normal(0, 5^2)|` draws.
    FoldedGaussian,
}

impl SignalKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "binary" => Ok(SignalKind::Binary),
            "folded_gaussian" => Ok(SignalKind::FoldedGaussian),
            other => Err(Error::invalid(
                "signal_kind",
                format!("expected `binary` or `folded_gaussian`, got `{other}`"),
            )),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            SignalKind::Binary => "binary",
            SignalKind::FoldedGaussian => "folded_gaussian",
        }
    }
}

impl std::fmt::Display for SignalKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Draws a K-sparse signal: K distinct uniformly chosen coordinates, values
/// all 1 (binary) or folded-Gaussian draws (zero draws redrawn so stored
/// values stay strictly positive).
pub fn generate_signal(kind: SignalKind, n: usize, k: usize, stream: &mut RngStream) -> Result<Signal> {
    if n < 1 {
        return Err(Error::invalid("n", "dimension must be at least 1"));
    }
    if k < 1 || k > n {
        return Err(Error::invalid("k", format!("sparsity must lie in [1, n={n}], got {k}")));
    }
    let mut indices = rand::seq::index::sample(stream, n, k).into_vec();
    indices.sort_unstable();
    let entries = match kind {
        SignalKind::Binary => indices.into_iter().map(|i| (i, 1.0)).collect(),
        SignalKind::FoldedGaussian => {
            let normal = Normal::new(0.0, 5.0).expect("fixed parameters");
            indices
                .into_iter()
                .map(|i| {
                    let v = loop {
                        let z: f64 = normal.sample(stream);
                        if z != 0.0 {
                            break z.abs();
                        }
                    };
                    (i, v)
                })
                .collect()
        }
    };
    Signal::new(n, entries)
}

/// The M linear measurements `y_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct Measurements {
    values: Vec<f64>,
}

impl Measurements {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        for (j, &v) in values.iter().enumerate() {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::invalid(
                    "values",
                    format!("measurement {j} must be nonnegative and finite, got {v}"),
                ));
            }
        }
        Ok(Measurements { values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Per-coordinate recovered values plus coverage flags.
///
/// An uncovered coordinate (no measurement sampled it) reports value 0 and
/// `covered = false`; it is unrecoverable rather than recovered-as-zero.
#[derive(Clone, Debug, PartialEq)]
pub struct Estimate {
    values: Vec<f64>,
    covered: Vec<bool>,
}

impl Estimate {
    fn from_parts(values: Vec<f64>, covered: Vec<bool>) -> Self {
        debug_assert_eq!(values.len(), covered.len());
        Estimate { values, covered }
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn covered(&self) -> &[bool] {
        &self.covered
    }

    pub fn uncovered_count(&self) -> usize {
        self.covered.iter().filter(|&&c| !c).count()
    }
}

/// Returns the live entries `(i, s_ij)` of measurement row `j`, exactly the
/// values every other operation regenerates from the same labels.
pub fn design_column(params: &DesignParams, j: usize) -> Result<Vec<(usize, f64)>> {
    params.validate()?;
    if j >= params.m {
        return Err(Error::invalid("j", format!("measurement index {j} out of range for m={}", params.m)));
    }
    let col = params.column_base().child_index(j as u64);
    let mut out = Vec::new();
    for i in 0..params.n {
        let mut stream = col.child_index(i as u64).stream();
        if stream.next_f64() < params.gamma {
            let s = ln_sample_stable(params.alpha, &mut stream)?.exp();
            out.push((i, s));
        }
    }
    Ok(out)
}

/// Encodes `y_j = sum_i x_i s_ij r_ij`, touching only the signal's support:
/// cost `O(M K)` stream derivations.
pub fn encode(signal: &Signal, params: &DesignParams) -> Result<Measurements> {
    params.validate()?;
    if signal.n() != params.n {
        return Err(Error::DimensionMismatch {
            context: "encode",
            expected: params.n,
            actual: signal.n(),
        });
    }
    let base = params.column_base();
    let mut values = Vec::with_capacity(params.m);
    for j in 0..params.m {
        let col = base.child_index(j as u64);
        let mut y = 0.0;
        for &(i, x) in signal.entries() {
            let mut stream = col.child_index(i as u64).stream();
            if stream.next_f64() < params.gamma {
                y += x * ln_sample_stable(params.alpha, &mut stream)?.exp();
            }
        }
        values.push(y);
    }
    Ok(Measurements { values })
}

/// Decodes every coordinate as `min_{j in T_i} y_j / s_ij`, ties broken by
/// the smallest `j`. One scan over the `gamma M N` live design entries,
/// parallel over coordinates with order-preserving collection.
///
/// The minimum never undershoots the true coordinate value: exactly so for
/// unit entries, where `1 * s` and `s / s` round to `s` and `1`, and to
/// within a couple of ulps for general values, where the product and the
/// final division each round once.
pub fn decode_min(measurements: &Measurements, params: &DesignParams) -> Result<Estimate> {
    params.validate()?;
    if measurements.len() != params.m {
        return Err(Error::DimensionMismatch {
            context: "decode_min",
            expected: params.m,
            actual: measurements.len(),
        });
    }
    let y = measurements.values();
    let base = params.column_base();
    let columns: Vec<StreamKey> = (0..params.m).map(|j| base.child_index(j as u64)).collect();
    let per_coord: Vec<(f64, bool)> = (0..params.n)
        .into_par_iter()
        .map(|i| -> Result<(f64, bool)> {
            let mut best = f64::INFINITY;
            let mut covered = false;
            for (j, col) in columns.iter().enumerate() {
                let mut stream = col.child_index(i as u64).stream();
                if stream.next_f64() < params.gamma {
                    let s = ln_sample_stable(params.alpha, &mut stream)?.exp();
                    let v = y[j] / s;
                    if v < best {
                        best = v;
                    }
                    covered = true;
                }
            }
            Ok(if covered { (best, true) } else { (0.0, false) })
        })
        .collect::<Result<_>>()?;
    let (values, covered) = per_coord.into_iter().unzip();
    Ok(Estimate::from_parts(values, covered))
}

/// Normalized recovery error `sqrt(sum_i (x_i - xhat_i)^2 / sum_i x_i^2)`.
pub fn normalized_error(truth: &Signal, estimate: &Estimate) -> Result<f64> {
    if truth.n() != estimate.n() {
        return Err(Error::DimensionMismatch {
            context: "normalized_error",
            expected: truth.n(),
            actual: estimate.n(),
        });
    }
    if truth.sparsity() == 0 {
        return Err(Error::invalid("truth", "all-zero signal has no normalized error"));
    }
    let mut entries = truth.entries().iter().peekable();
    let mut num = 0.0;
    for (i, &v) in estimate.values().iter().enumerate() {
        let x = match entries.peek() {
            Some(&&(idx, val)) if idx == i => {
                entries.next();
                val
            }
            _ => 0.0,
        };
        num += (x - v) * (x - v);
    }
    let den: f64 = truth.entries().iter().map(|&(_, v)| v * v).sum();
    Ok((num / den).sqrt())
}

// --- text serialization ---------------------------------------------------
//
// Signals and estimates: header `n k`, then `k` lines of `index value`.
// Measurements: one value per line. Values print in shortest round-trip
// form, so text -> parse -> text is the identity.

impl Signal {
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.n, self.entries.len());
        for &(i, v) in &self.entries {
            out.push_str(&format!("{i} {v}\n"));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::TextFormat { line: 1, message: "empty input".into() })?;
        let (n, k) = parse_two::<usize, usize>(header, 1, "n k")?;
        let mut entries = Vec::with_capacity(k);
        for _ in 0..k {
            let (idx, line) = lines.next().ok_or_else(|| Error::TextFormat {
                line: k + 1,
                message: format!("expected {k} entries, input ended early"),
            })?;
            entries.push(parse_two::<usize, f64>(line, idx + 1, "index value")?);
        }
        if let Some((idx, line)) = lines.next() {
            if !line.trim().is_empty() {
                return Err(Error::TextFormat {
                    line: idx + 1,
                    message: format!("trailing content after {k} entries"),
                });
            }
        }
        Signal::new(n, entries)
    }
}

impl Measurements {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for v in &self.values {
            out.push_str(&format!("{v}\n"));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut values = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let trimmed = line.trim();
            if trimmed.is_empty() {
                return Err(Error::TextFormat { line: idx + 1, message: "blank line".into() });
            }
            let v: f64 = trimmed.parse().map_err(|_| Error::TextFormat {
                line: idx + 1,
                message: format!("not a number: `{trimmed}`"),
            })?;
            values.push(v);
        }
        Measurements::new(values)
    }
}

impl Estimate {
    /// Same `n k` format as signals, listing covered coordinates with nonzero
    /// estimates. Coordinates that are uncovered or estimated exactly zero
    /// are omitted; this is a reporting format, not a lossless dump.
    pub fn to_text(&self) -> String {
        let listed: Vec<(usize, f64)> = self
            .values
            .iter()
            .zip(&self.covered)
            .enumerate()
            .filter(|(_, (&v, &c))| c && v != 0.0)
            .map(|(i, (&v, _))| (i, v))
            .collect();
        let mut out = format!("{} {}\n", self.n(), listed.len());
        for (i, v) in listed {
            out.push_str(&format!("{i} {v}\n"));
        }
        out
    }
}

fn parse_two<A: std::str::FromStr, B: std::str::FromStr>(
    line: &str,
    line_no: usize,
    shape: &str,
) -> Result<(A, B)> {
    let mut parts = line.split_whitespace();
    let bad = |message: String| Error::TextFormat { line: line_no, message };
    let a = parts
        .next()
        .ok_or_else(|| bad(format!("expected `{shape}`")))?
        .parse::<A>()
        .map_err(|_| bad(format!("expected `{shape}`, got `{line}`")))?;
    let b = parts
        .next()
        .ok_or_else(|| bad(format!("expected `{shape}`, got `{line}`")))?
        .parse::<B>()
        .map_err(|_| bad(format!("expected `{shape}`, got `{line}`")))?;
    if parts.next().is_some() {
        return Err(bad(format!("expected exactly two fields, got `{line}`")));
    }
    Ok((a, b))
}
