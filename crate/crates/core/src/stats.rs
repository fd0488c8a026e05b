//! Evaluation metrics and the McNemar mid-p test for matched pairs.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use statrs::function::factorial::ln_binomial;

use crate::explanation::Explanation;
use crate::{Error, Result};

/// Explanations larger than this do not count as explained.
pub const EXPLAINED_SIZE_LIMIT: usize = 30;

/// Anything that may carry a found explanation of some size.
pub trait Outcome {
    /// Size of the explanation if one was found.
    fn found_size(&self) -> Option<usize>;
}

impl Outcome for Explanation {
    fn found_size(&self) -> Option<usize> {
        if self.is_found() {
            self.switching_point
        } else {
            None
        }
    }
}

impl Outcome for Option<usize> {
    fn found_size(&self) -> Option<usize> {
        *self
    }
}

/// Whether `o` counts toward the percentage explained.
pub fn is_explained<O: Outcome + ?Sized>(o: &O) -> bool {
    matches!(o.found_size(), Some(s) if s <= EXPLAINED_SIZE_LIMIT)
}

/// Share of results, in percent, with a found explanation of at most
/// [`EXPLAINED_SIZE_LIMIT`] features.
pub fn percentage_explained<O: Outcome>(results: &[O]) -> Result<f64> {
    if results.is_empty() {
        return Err(Error::EmptyInput);
    }
    let explained = results.iter().filter(|r| is_explained(*r)).count();
    Ok(100.0 * explained as f64 / results.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub count: usize,
}

/// Median and quartiles. A quantile at position `h = (n - 1) p` of the
/// sorted values is the midpoint of the values at `floor(h)` and `ceil(h)`.
pub fn summarize(values: &[f64]) -> Result<MetricSummary> {
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    if values.iter().any(|v| v.is_nan()) {
        return Err(Error::InvalidParameter("cannot summarize NaN".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let at = |p: f64| {
        let h = (sorted.len() - 1) as f64 * p;
        (sorted[h.floor() as usize] + sorted[h.ceil() as usize]) / 2.0
    };
    Ok(MetricSummary {
        median: at(0.5),
        q1: at(0.25),
        q3: at(0.75),
        count: sorted.len(),
    })
}

pub fn summarize_switching_points(values: &[usize]) -> Result<MetricSummary> {
    summarize(&values.iter().map(|&v| v as f64).collect::<Vec<_>>())
}

/// Keys present in every map, in ascending order. Used to restrict summaries
/// to instances that every compared method explained.
pub fn found_by_all<K: Ord + Clone, V>(methods: &[&BTreeMap<K, V>]) -> Vec<K> {
    let Some((first, rest)) = methods.split_first() else {
        return Vec::new();
    };
    first
        .keys()
        .filter(|k| rest.iter().all(|m| m.contains_key(*k)))
        .cloned()
        .collect()
}

/// Paired success counts for methods A and B: `n11` both succeed, `n12` only
/// A, `n21` only B, `n22` neither.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContingencyTable {
    pub n11: u64,
    pub n12: u64,
    pub n21: u64,
    pub n22: u64,
}

impl ContingencyTable {
    pub fn total(&self) -> u64 {
        self.n11 + self.n12 + self.n21 + self.n22
    }

    pub fn discordant(&self) -> u64 {
        self.n12 + self.n21
    }
}

pub fn pairwise_success_table(a: &[bool], b: &[bool]) -> Result<ContingencyTable> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch(a.len(), b.len()));
    }
    let mut t = ContingencyTable::default();
    for (&x, &y) in a.iter().zip(b) {
        match (x, y) {
            (true, true) => t.n11 += 1,
            (true, false) => t.n12 += 1,
            (false, true) => t.n21 += 1,
            (false, false) => t.n22 += 1,
        }
    }
    Ok(t)
}

/// Per-pair success indicators for "strictly smaller": A succeeds on pair `i`
/// when `a[i] < b[i]`, B when `b[i] < a[i]`. Exact ties succeed for neither.
pub fn strictly_smaller(a: &[f64], b: &[f64]) -> Result<(Vec<bool>, Vec<bool>)> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch(a.len(), b.len()));
    }
    Ok(a.iter().zip(b).map(|(x, y)| (x < y, y < x)).unzip())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McNemarResult {
    /// One-sided exact conditional p-value.
    pub p_exact: f64,
    pub p_mid: f64,
    /// Discordant pairs.
    pub n: u64,
    /// The larger discordant count, which fixes the side of the test.
    pub larger: u64,
}

/// One-sided exact McNemar test and its mid-p correction.
///
/// With `n` discordant pairs and `k` the smaller discordant count,
/// `p_exact = P(X <= k)` for `X ~ Binomial(n, 1/2)` and
/// `p_mid = p_exact - P(X = n - k) / 2`. Equal counts give `p_exact = 1`.
pub fn mcnemar_mid_p(t: &ContingencyTable) -> Result<McNemarResult> {
    let n = t.discordant();
    if n == 0 {
        return Err(Error::NoDiscordantPairs);
    }
    let larger = t.n12.max(t.n21);
    let smaller = n - larger;
    let ln_half_n = -(n as f64) * std::f64::consts::LN_2;
    let ln_pmf = |x: u64| ln_binomial(n, x) + ln_half_n;
    let p_exact = if larger == smaller {
        1.0
    } else {
        let terms: Vec<f64> = (0..=smaller).map(ln_pmf).collect();
        let top = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (top + terms.iter().map(|v| (v - top).exp()).sum::<f64>().ln()).exp().min(1.0)
    };
    let p_mid = (p_exact - 0.5 * ln_pmf(larger).exp()).clamp(0.0, 1.0);
    Ok(McNemarResult {
        p_exact,
        p_mid,
        n,
        larger,
    })
}
