//! Best-first search for evidence counterfactuals (SEDC).
//!
//! The first iteration scores every single-feature removal. Each later
//! iteration takes the not-yet-expanded subset whose removal lowered the score
//! the most and scores every one-feature extension of it. The search stops at
//! the end of the first iteration that produced a class flip; among the flips
//! of that iteration the one with the largest score drop wins.
//!
//! Ties in score drop are broken toward the smaller subset, then toward the
//! lexicographically least sorted index sequence, so a run is a pure function
//! of `(classifier, instance, config)` as long as the time budget is not hit.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::explanation::{Explanation, Reason, Status};
use crate::model::{Classifier, Scorer};
use crate::sparse::{FeatureId, PerturbationSet, SparseInstance};
use crate::{Error, Result};

/// Budgets shared by the search-based explainers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchConfig {
    pub max_iterations: usize,
    /// Upper bound on explanation size; the effective cap is `min(this, active count)`.
    pub max_explanation_size: usize,
    #[serde(with = "secs")]
    pub max_time: Duration,
    pub stop_at_first: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            max_iterations: 50,
            max_explanation_size: 30,
            max_time: Duration::from_secs(120),
            stop_at_first: true,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::InvalidParameter("max_iterations must be positive".into()));
        }
        if self.max_explanation_size == 0 {
            return Err(Error::InvalidParameter("max_explanation_size must be positive".into()));
        }
        if self.max_time.is_zero() {
            return Err(Error::InvalidParameter("max_time must be positive".into()));
        }
        Ok(())
    }

    pub fn size_cap(&self, active: usize) -> usize {
        self.max_explanation_size.min(active)
    }
}

mod secs {
    use std::time::Duration;

    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(d.as_secs_f64())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        Duration::try_from_secs_f64(f64::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}

/// A scored subset. Orders by score drop, then smaller size, then
/// lexicographically least ids; "greater" means "preferred".
#[derive(Debug, Clone)]
struct Candidate {
    set: PerturbationSet,
    score_change: f64,
}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.score_change
            .total_cmp(&other.score_change)
            .then_with(|| other.set.len().cmp(&self.set.len()))
            .then_with(|| other.set.cmp(&self.set))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Candidate {}

/// The subset chosen for expansion and its unseen one-feature extensions.
#[derive(Debug, Clone, PartialEq)]
pub struct Expansion {
    pub chosen: PerturbationSet,
    pub score_change: f64,
    pub successors: Vec<PerturbationSet>,
}

/// Open subsets awaiting expansion plus registries of everything already
/// scored and everything already expanded.
#[derive(Debug, Clone)]
pub struct Frontier {
    active: Vec<FeatureId>,
    heap: BinaryHeap<Candidate>,
    open: HashSet<PerturbationSet>,
    seen: HashSet<PerturbationSet>,
    expanded: HashSet<PerturbationSet>,
}

impl Frontier {
    /// `active` lists the features successors may draw from.
    pub fn new(active: &[FeatureId]) -> Self {
        Self {
            active: active.to_vec(),
            heap: BinaryHeap::new(),
            open: HashSet::new(),
            seen: HashSet::new(),
            expanded: HashSet::new(),
        }
    }

    /// Adds a scored, non-flipping subset. Returns `false` (and does nothing)
    /// if the subset was already scored.
    pub fn push(&mut self, set: PerturbationSet, score_change: f64) -> bool {
        if !self.seen.insert(set.clone()) {
            return false;
        }
        self.open.insert(set.clone());
        self.heap.push(Candidate { set, score_change });
        true
    }

    /// Registers a scored subset that must never enter the frontier.
    pub fn mark_seen(&mut self, set: PerturbationSet) -> bool {
        self.seen.insert(set)
    }

    pub fn is_seen(&self, set: &PerturbationSet) -> bool {
        self.seen.contains(set)
    }

    pub fn contains(&self, set: &PerturbationSet) -> bool {
        self.open.contains(set)
    }

    pub fn is_expanded(&self, set: &PerturbationSet) -> bool {
        self.expanded.contains(set)
    }

    pub fn len(&self) -> usize {
        self.open.len()
    }

    pub fn is_empty(&self) -> bool {
        self.open.is_empty()
    }

    pub fn expanded_count(&self) -> usize {
        self.expanded.len()
    }

    /// Moves the best open subset with fewer than `max_size` features to the
    /// expanded registry and returns its unseen one-feature extensions.
    ///
    /// Open subsets at or above `max_size` met on the way can never be
    /// expanded and are dropped.
    pub fn expand_best(&mut self, max_size: usize) -> Result<Expansion> {
        while let Some(best) = self.heap.pop() {
            self.open.remove(&best.set);
            if best.set.len() >= max_size {
                continue;
            }
            debug_assert!(!self.expanded.contains(&best.set));
            self.expanded.insert(best.set.clone());
            let successors = self
                .active
                .iter()
                .filter(|&&j| !best.set.contains(j))
                .map(|&j| best.set.with(j))
                .filter(|s| !self.seen.contains(s))
                .collect();
            return Ok(Expansion {
                chosen: best.set,
                score_change: best.score_change,
                successors,
            });
        }
        Err(Error::FrontierExhausted)
    }
}

/// Counters from one search run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SearchStats {
    /// Iterations performed, counting the singleton pass as the first.
    pub iterations: usize,
    pub expanded: usize,
}

/// Best-first counterfactual search. See the module docs.
pub fn explain_sedc<M: Scorer>(c: &Classifier<M>, x: &SparseInstance, cfg: &SearchConfig) -> Result<Explanation> {
    explain_sedc_with_stats(c, x, cfg).map(|(e, _)| e)
}

pub fn explain_sedc_with_stats<M: Scorer>(
    c: &Classifier<M>,
    x: &SparseInstance,
    cfg: &SearchConfig,
) -> Result<(Explanation, SearchStats)> {
    let start = Instant::now();
    cfg.validate()?;
    let p = c.require_positive(x)?;
    let cap = cfg.size_cap(x.active_count());

    let mut run = Run {
        classifier: c,
        x,
        p,
        start,
        max_time: cfg.max_time,
        frontier: Frontier::new(x.indices()),
        flips: Vec::new(),
        evaluations: 0,
        timed_out: false,
    };
    let mut stats = SearchStats::default();

    let singles = x.indices().iter().map(|&j| PerturbationSet::singleton(j)).collect();
    run.score_all(singles)?;
    stats.iterations = 1;

    let mut stop = None;
    loop {
        if run.timed_out {
            stop = Some((Status::BudgetExhausted, Reason::TimeLimit));
            break;
        }
        if cfg.stop_at_first && !run.flips.is_empty() {
            break;
        }
        if stats.iterations >= cfg.max_iterations {
            stop = Some((Status::BudgetExhausted, Reason::IterationLimit));
            break;
        }
        if start.elapsed() > cfg.max_time {
            stop = Some((Status::BudgetExhausted, Reason::TimeLimit));
            break;
        }
        let expansion = match run.frontier.expand_best(cap) {
            Ok(e) => e,
            Err(Error::FrontierExhausted) => {
                stop = Some((Status::NotFound, Reason::FrontierExhausted));
                break;
            }
            Err(e) => return Err(e),
        };
        stats.expanded += 1;
        run.score_all(expansion.successors)?;
        stats.iterations += 1;
    }

    let elapsed = start.elapsed();
    // Smallest flip wins; among those the largest score drop.
    let smallest = run.flips.iter().map(|f| f.set.len()).min();
    let best = run.flips.into_iter().filter(|f| Some(f.set.len()) == smallest).max();
    let explanation = match best {
        Some(best) => Explanation::found(best.set, best.score_change, run.evaluations, elapsed),
        None => {
            let (status, reason) = stop.unwrap_or((Status::NotFound, Reason::FrontierExhausted));
            Explanation::unsuccessful(status, reason, run.evaluations, elapsed)
        }
    };
    Ok((explanation, stats))
}

struct Run<'a, M> {
    classifier: &'a Classifier<M>,
    x: &'a SparseInstance,
    p: f64,
    start: Instant,
    max_time: Duration,
    frontier: Frontier,
    flips: Vec<Candidate>,
    evaluations: u64,
    timed_out: bool,
}

impl<M: Scorer> Run<'_, M> {
    fn score_all(&mut self, sets: Vec<PerturbationSet>) -> Result<()> {
        for set in sets {
            if self.start.elapsed() > self.max_time {
                self.timed_out = true;
                return Ok(());
            }
            let z = self.x.perturb(&set)?;
            let p_new = self.classifier.model().score_unchecked(&z);
            self.evaluations += 1;
            let score_change = self.p - p_new;
            if self.classifier.is_positive_score(p_new) {
                self.frontier.push(set, score_change);
            } else {
                self.frontier.mark_seen(set.clone());
                self.flips.push(Candidate { set, score_change });
            }
        }
        Ok(())
    }
}
