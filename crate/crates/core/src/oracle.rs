//! Ground truth and baseline explainers.
//!
//! [`complete_search`] enumerates subsets of increasing size and is therefore
//! guaranteed to return a minimum-sized counterfactual, at a cost of
//! `C(m, k)` evaluations for size `k`. [`explain_random`] is the random
//! baseline the other explainers are compared against.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::combinations::{binomial, Combinations};
use crate::explanation::{Explanation, Reason, Status};
use crate::model::{Classifier, Scorer};
use crate::sparse::{PerturbationSet, SparseInstance};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CompleteConfig {
    pub max_size: usize,
    /// Cap on the total number of subsets scored across all sizes.
    pub max_combinations: u64,
    /// Instances with more active features are refused outright.
    pub max_active: usize,
}

impl Default for CompleteConfig {
    fn default() -> Self {
        Self {
            max_size: 30,
            max_combinations: 1_000_000,
            max_active: 25,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompleteSearchReport {
    pub explanation: Explanation,
    /// Subsets scored for each size `1, 2, ...` actually visited.
    pub combinations_per_size: Vec<u64>,
    /// The size whose enumeration would have exceeded the combination budget.
    pub exhausted_at_size: Option<usize>,
}

/// Minimum-sized counterfactual by exhaustive search; see [`complete_search`].
pub fn explain_complete<M: Scorer>(
    c: &Classifier<M>,
    x: &SparseInstance,
    max_size: usize,
    max_combinations: u64,
) -> Result<Explanation> {
    let cfg = CompleteConfig {
        max_size,
        max_combinations,
        ..CompleteConfig::default()
    };
    complete_search(c, x, &cfg).map(|r| r.explanation)
}

/// For `k = 1, 2, ...` scores every size-`k` subset of the active features in
/// lexicographic order and stops after the first size that contains a flip.
/// Among the flips of that size the largest score drop wins, ties going to the
/// lexicographically first subset.
///
/// A size is never started when finishing it would push the running count of
/// scored subsets past `max_combinations`; the search then reports
/// `BudgetExhausted` instead.
pub fn complete_search<M: Scorer>(
    c: &Classifier<M>,
    x: &SparseInstance,
    cfg: &CompleteConfig,
) -> Result<CompleteSearchReport> {
    let start = Instant::now();
    let p = c.require_positive(x)?;
    let m = x.active_count();
    if m > cfg.max_active {
        return Err(Error::TooManyActive {
            active: m,
            limit: cfg.max_active,
        });
    }
    let active = x.indices();
    let cap = cfg.max_size.min(m);
    let mut per_size = Vec::new();
    let mut total: u64 = 0;

    for k in 1..=cap {
        let need = binomial(m as u64, k as u64);
        if u128::from(total) + need > u128::from(cfg.max_combinations) {
            return Ok(CompleteSearchReport {
                explanation: Explanation::unsuccessful(
                    Status::BudgetExhausted,
                    Reason::CombinationBudget,
                    total,
                    start.elapsed(),
                ),
                combinations_per_size: per_size,
                exhausted_at_size: Some(k),
            });
        }
        let mut count = 0u64;
        let mut best: Option<(Vec<usize>, f64)> = None;
        let mut subsets = Combinations::new(m, k);
        while let Some(positions) = subsets.advance() {
            let set: PerturbationSet = positions.iter().map(|&i| active[i]).collect();
            let p_new = c.model().score_unchecked(&x.perturb(&set)?);
            count += 1;
            if !c.is_positive_score(p_new) {
                let change = p - p_new;
                if best.as_ref().is_none_or(|(_, b)| change > *b) {
                    best = Some((positions.to_vec(), change));
                }
            }
        }
        total += count;
        per_size.push(count);
        if let Some((positions, change)) = best {
            let set = positions.iter().map(|&i| active[i]).collect();
            return Ok(CompleteSearchReport {
                explanation: Explanation::found(set, change, total, start.elapsed()),
                combinations_per_size: per_size,
                exhausted_at_size: None,
            });
        }
    }
    Ok(CompleteSearchReport {
        explanation: Explanation::unsuccessful(Status::NotFound, Reason::SizeLimit, total, start.elapsed()),
        combinations_per_size: per_size,
        exhausted_at_size: None,
    })
}

/// Random baseline.
///
/// Draws untried active features uniformly at random. A drawn feature that
/// flips the class together with the kept set ends the run; one that lowers
/// the score joins the kept set; any other is discarded for good. There is no
/// size cap. Runs out with `NotFound` once every feature was tried and with
/// `BudgetExhausted` after `max_draws` draws.
pub fn explain_random<M: Scorer>(
    c: &Classifier<M>,
    x: &SparseInstance,
    seed: u64,
    max_draws: usize,
) -> Result<Explanation> {
    let start = Instant::now();
    let p = c.require_positive(x)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut untried = x.indices().to_vec();
    let mut kept = PerturbationSet::new();
    let mut kept_score = p;
    let mut draws = 0usize;
    let mut evaluations = 0u64;

    while !untried.is_empty() {
        if draws >= max_draws {
            return Ok(Explanation::unsuccessful(
                Status::BudgetExhausted,
                Reason::DrawLimit,
                evaluations,
                start.elapsed(),
            ));
        }
        let feature = untried.swap_remove(rng.random_range(0..untried.len()));
        draws += 1;
        let candidate = kept.with(feature);
        let p_new = c.model().score_unchecked(&x.perturb(&candidate)?);
        evaluations += 1;
        if !c.is_positive_score(p_new) {
            return Ok(Explanation::found(candidate, p - p_new, evaluations, start.elapsed()));
        }
        if p_new < kept_score {
            kept = candidate;
            kept_score = p_new;
        }
    }
    Ok(Explanation::unsuccessful(
        Status::NotFound,
        Reason::FeaturesExhausted,
        evaluations,
        start.elapsed(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::search::{explain_sedc, SearchConfig};
    use crate::LinearModel;

    fn linear(dim: usize, w: &[(usize, f64)], b: f64, t: f64) -> Classifier<LinearModel> {
        Classifier::new(LinearModel::new(dim, w.iter().copied(), b).unwrap(), t)
    }

    fn ones(dim: usize, n: usize) -> SparseInstance {
        SparseInstance::new(dim, (0..n).map(|j| (j, 1.0))).unwrap()
    }

    #[test]
    fn only_the_pair_flips() {
        let c = linear(2, &[(0, 1.0), (1, 1.0)], 0.0, 0.5);
        let x = ones(2, 2);
        let r = complete_search(&c, &x, &CompleteConfig::default()).unwrap();
        assert_eq!(r.explanation.switching_point, Some(2));
        assert_eq!(r.explanation.evaluations, 3);
        assert_eq!(r.combinations_per_size, vec![2, 1]);
    }

    #[test]
    fn counter_for_34_choose_2() {
        // every pair flips, no single feature does
        let w: Vec<_> = (0..34).map(|j| (j, 1.0)).collect();
        let c = linear(34, &w, 0.0, 32.5);
        let x = ones(34, 34);
        let cfg = CompleteConfig {
            max_active: 34,
            ..CompleteConfig::default()
        };
        let r = complete_search(&c, &x, &cfg).unwrap();
        assert_eq!(r.combinations_per_size, vec![34, 561]);
        assert_eq!(r.explanation.switching_point, Some(2));
    }

    #[test]
    fn budget_exhaustion_on_wide_instance() {
        // C(151,1) + C(151,2) + C(151,3) = 573_951 <= 1e6 < 573_951 + 20_811_575
        let w: Vec<_> = (0..151).map(|j| (j, 1.0)).collect();
        let c = linear(151, &w, 0.0, 0.5);
        let x = ones(151, 151);
        let cfg = CompleteConfig {
            max_active: 151,
            ..CompleteConfig::default()
        };
        let r = complete_search(&c, &x, &cfg).unwrap();
        assert_eq!(r.explanation.status, Status::BudgetExhausted);
        assert_eq!(r.explanation.reason, Some(Reason::CombinationBudget));
        assert_eq!(r.exhausted_at_size, Some(4));
        assert_eq!(r.combinations_per_size, vec![151, 11_325, 562_475]);
        assert_eq!(r.explanation.evaluations, 573_951);
    }

    #[test]
    fn refuses_large_instances_by_default() {
        let w: Vec<_> = (0..30).map(|j| (j, 1.0)).collect();
        let c = linear(30, &w, 0.0, 0.5);
        assert_eq!(
            explain_complete(&c, &ones(30, 30), 30, 1_000_000),
            Err(Error::TooManyActive { active: 30, limit: 25 })
        );
    }

    #[test]
    fn equal_size_flips_prefer_largest_drop() {
        let c = linear(3, &[(0, 1.0), (1, 3.0), (2, 2.0)], 0.0, 4.5);
        let x = ones(3, 3);
        let e = explain_complete(&c, &x, 30, 1000).unwrap();
        assert_eq!(e.features, [1usize].into_iter().collect());
        assert_eq!(e.score_change, 3.0);
    }

    #[test]
    fn nothing_flips_reports_size_limit() {
        let c = linear(3, &[], 1.0, 0.0);
        let e = explain_complete(&c, &ones(3, 3), 30, 1000).unwrap();
        assert_eq!(e.status, Status::NotFound);
        assert_eq!(e.reason, Some(Reason::SizeLimit));
        assert_eq!(e.evaluations, 7);
    }

    #[test]
    fn random_single_feature() {
        let c = linear(1, &[(0, 1.0)], 0.0, 0.5);
        for seed in 0..10 {
            let e = explain_random(&c, &ones(1, 1), seed, usize::MAX).unwrap();
            assert_eq!(e.switching_point, Some(1));
        }
    }

    #[test]
    fn random_constant_model_exhausts_features() {
        let c = linear(5, &[], 1.0, 0.0);
        let e = explain_random(&c, &ones(5, 5), 3, usize::MAX).unwrap();
        assert_eq!(e.status, Status::NotFound);
        assert_eq!(e.reason, Some(Reason::FeaturesExhausted));
        assert_eq!(e.evaluations, 5);
        let e = explain_random(&c, &ones(5, 5), 3, 2).unwrap();
        assert_eq!(e.status, Status::BudgetExhausted);
    }

    #[test]
    fn random_is_worse_than_sedc_with_dominant_feature() {
        // feature 0 dominates; removing it alone flips. Ten noise features
        // with small positive weights.
        let mut w = vec![(0, 10.0)];
        w.extend((1..11).map(|j| (j, 0.1)));
        let c = linear(11, &w, 0.0, 1.5);
        let x = ones(11, 11);
        let sedc = explain_sedc(&c, &x, &SearchConfig::default()).unwrap();
        assert_eq!(sedc.switching_point, Some(1));
        let mut total = 0usize;
        for seed in 0..100 {
            let e = explain_random(&c, &x, seed, usize::MAX).unwrap();
            let sp = e.switching_point.unwrap();
            assert!(sp >= 1);
            total += sp;
        }
        let mean = total as f64 / 100.0;
        assert!(mean > 1.0, "mean switching point {mean}");
    }

    #[test]
    fn random_never_retries_discarded_features() {
        // every removal raises the score, so every drawn feature is discarded
        let w: Vec<_> = (0..5).map(|j| (j, -1.0)).collect();
        let c = linear(5, &w, 15.0, 10.0);
        let x = ones(5, 5);
        for seed in 0..20 {
            let e = explain_random(&c, &x, seed, usize::MAX).unwrap();
            assert_eq!(e.status, Status::NotFound);
            assert_eq!(e.evaluations, 5);
        }
    }
}
