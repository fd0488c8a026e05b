//! Ranked-list counterfactual extraction and the attribution + counterfactual pipelines.
//!
//! [`lin_sedc`] removes the top-ranked feature, then the top two, and so on,
//! until the class flips. [`explain_lime_c`] and [`explain_shap_c`] feed it
//! the rankings of [`lime_rank`] and [`shap_rank`].
//!
//! The prefix walk stops at the first coefficient that is not strictly
//! positive: features the surrogate does not credit with positive evidence
//! are never removed.

use std::time::Instant;

use crate::attribution::{lime_rank, shap_rank, AttributionConfig, ImportanceRanking};
use crate::explanation::{Explanation, Reason, Status};
use crate::model::{Classifier, Scorer};
use crate::search::SearchConfig;
use crate::sparse::{PerturbationSet, SparseInstance};
use crate::{Error, Result};

pub fn lin_sedc<M: Scorer>(
    c: &Classifier<M>,
    x: &SparseInstance,
    ranking: &ImportanceRanking,
    cfg: &SearchConfig,
) -> Result<Explanation> {
    walk_prefixes(c, x, ranking, cfg, Instant::now(), 0)
}

/// `started` is when the caller's clock began; `prior_evaluations` are model
/// calls already spent on building the ranking.
fn walk_prefixes<M: Scorer>(
    c: &Classifier<M>,
    x: &SparseInstance,
    ranking: &ImportanceRanking,
    cfg: &SearchConfig,
    started: Instant,
    prior_evaluations: u64,
) -> Result<Explanation> {
    cfg.validate()?;
    let p = c.require_positive(x)?;
    if ranking.is_empty() {
        return Err(Error::EmptyRanking);
    }
    let cap = cfg.size_cap(x.active_count());
    let mut evaluations = prior_evaluations;
    let mut removed = PerturbationSet::new();
    let stop = |status, reason, evaluations| Ok(Explanation::unsuccessful(status, reason, evaluations, started.elapsed()));

    for (k, &(feature, coefficient)) in ranking.entries().iter().enumerate() {
        if k >= cap {
            return stop(Status::NotFound, Reason::SizeLimit, evaluations);
        }
        if coefficient <= 0.0 {
            return stop(Status::NotFound, Reason::NonPositiveCoefficient, evaluations);
        }
        if started.elapsed() > cfg.max_time {
            return stop(Status::BudgetExhausted, Reason::TimeLimit, evaluations);
        }
        removed.insert(feature);
        let p_new = c.model().score_unchecked(&x.perturb(&removed)?);
        evaluations += 1;
        if !c.is_positive_score(p_new) {
            return Ok(Explanation::found(removed, p - p_new, evaluations, started.elapsed()));
        }
    }
    stop(Status::NotFound, Reason::RankingExhausted, evaluations)
}

/// LIME ranking followed by the prefix walk. Elapsed time and evaluation
/// counts cover both stages.
pub fn explain_lime_c<M: Scorer>(
    c: &Classifier<M>,
    x: &SparseInstance,
    acfg: &AttributionConfig,
    scfg: &SearchConfig,
) -> Result<Explanation> {
    let started = Instant::now();
    scfg.validate()?;
    let ranking = lime_rank(c, x, acfg)?;
    walk_prefixes(c, x, &ranking, scfg, started, ranking.evaluations)
}

/// SHAP ranking followed by the prefix walk. An all-zero ranking ends as
/// `NotFound` with [`Reason::ZeroCoefficients`].
pub fn explain_shap_c<M: Scorer>(
    c: &Classifier<M>,
    x: &SparseInstance,
    acfg: &AttributionConfig,
    scfg: &SearchConfig,
) -> Result<Explanation> {
    let started = Instant::now();
    scfg.validate()?;
    let ranking = shap_rank(c, x, acfg)?;
    if ranking.is_all_zero() {
        return Ok(Explanation::unsuccessful(
            Status::NotFound,
            Reason::ZeroCoefficients,
            ranking.evaluations,
            started.elapsed(),
        ));
    }
    walk_prefixes(c, x, &ranking, scfg, started, ranking.evaluations)
}
