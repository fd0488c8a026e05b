use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::sparse::PerturbationSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Found,
    BudgetExhausted,
    NotFound,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Found => "found",
            Status::BudgetExhausted => "budget_exhausted",
            Status::NotFound => "not_found",
        }
    }
}

/// Why a search ended without an explanation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reason {
    /// No unexpanded subset below the size cap is left.
    FrontierExhausted,
    IterationLimit,
    TimeLimit,
    /// The complete search would exceed its combination budget.
    CombinationBudget,
    /// Every subset up to the size cap was enumerated without a flip.
    SizeLimit,
    /// The ranked list reached a coefficient `<= 0` before the class flipped.
    NonPositiveCoefficient,
    /// The attribution model assigned zero importance to every feature.
    ZeroCoefficients,
    /// The ranked list ran out before the class flipped.
    RankingExhausted,
    /// The random explainer tried every active feature.
    FeaturesExhausted,
    DrawLimit,
}

impl Reason {
    pub fn as_str(self) -> &'static str {
        match self {
            Reason::FrontierExhausted => "frontier_exhausted",
            Reason::IterationLimit => "iteration_limit",
            Reason::TimeLimit => "time_limit",
            Reason::CombinationBudget => "combination_budget",
            Reason::SizeLimit => "size_limit",
            Reason::NonPositiveCoefficient => "non_positive_coefficient",
            Reason::ZeroCoefficients => "zero_coefficients",
            Reason::RankingExhausted => "ranking_exhausted",
            Reason::FeaturesExhausted => "features_exhausted",
            Reason::DrawLimit => "draw_limit",
        }
    }
}

/// Result of one explainer run on one instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Explanation {
    /// Features whose removal flips the class; empty unless `status` is `Found`.
    pub features: PerturbationSet,
    /// `|features|` when found.
    pub switching_point: Option<usize>,
    /// Original score minus the score of the perturbed instance.
    pub score_change: f64,
    #[serde(rename = "elapsed_secs", with = "duration_secs")]
    pub elapsed: Duration,
    pub status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<Reason>,
    /// Number of perturbed instances scored.
    pub evaluations: u64,
}

impl Explanation {
    pub fn found(features: PerturbationSet, score_change: f64, evaluations: u64, elapsed: Duration) -> Self {
        Self {
            switching_point: Some(features.len()),
            features,
            score_change,
            elapsed,
            status: Status::Found,
            reason: None,
            evaluations,
        }
    }

    pub fn unsuccessful(status: Status, reason: Reason, evaluations: u64, elapsed: Duration) -> Self {
        debug_assert!(status != Status::Found);
        Self {
            features: PerturbationSet::new(),
            switching_point: None,
            score_change: 0.0,
            elapsed,
            status,
            reason: Some(reason),
            evaluations,
        }
    }

    pub fn is_found(&self) -> bool {
        self.status == Status::Found
    }

    /// Equality on everything except wall time.
    pub fn same_outcome(&self, other: &Self) -> bool {
        self.features == other.features
            && self.switching_point == other.switching_point
            && self.score_change.to_bits() == other.score_change.to_bits()
            && self.status == other.status
            && self.reason == other.reason
            && self.evaluations == other.evaluations
    }
}

mod duration_secs {
    use std::time::Duration;

    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(d.as_secs_f64())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        let secs = f64::deserialize(d)?;
        Duration::try_from_secs_f64(secs).map_err(serde::de::Error::custom)
    }
}
