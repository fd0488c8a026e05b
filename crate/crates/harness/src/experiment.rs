//! Experiment orchestration: every (instance, algorithm, seed) job produces one record.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use evcf_core::attribution::AttributionConfig;
use evcf_core::hybrid::{explain_lime_c, explain_shap_c};
use evcf_core::model::{threshold_by_imbalance, train_linear, train_mlp};
use evcf_core::oracle::{complete_search, explain_random, CompleteConfig};
use evcf_core::search::{explain_sedc, SearchConfig};
use evcf_core::stats::{Outcome, EXPLAINED_SIZE_LIMIT};
use evcf_core::{Classifier, Dataset, Explanation, Model, PerturbationSet, Scorer, SparseInstance, Status};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, ModelSource};
use crate::data::load_sparse_dataset;
use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Sedc,
    LimeC,
    ShapC,
    Random,
    Complete,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [Self::Sedc, Self::LimeC, Self::ShapC, Self::Random, Self::Complete];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Sedc => "sedc",
            Self::LimeC => "lime-c",
            Self::ShapC => "shap-c",
            Self::Random => "random",
            Self::Complete => "complete",
        }
    }

    /// Whether results depend on a seed; those run once per configured seed.
    pub fn is_stochastic(self) -> bool {
        matches!(self, Self::LimeC | Self::ShapC | Self::Random)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| HarnessError::Config(format!("unknown algorithm {s:?}")))
    }
}

/// Outcome column of a record: an explanation status, or `error` when the explainer refused the instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordStatus {
    Found,
    BudgetExhausted,
    NotFound,
    Error,
}

impl From<Status> for RecordStatus {
    fn from(s: Status) -> Self {
        match s {
            Status::Found => Self::Found,
            Status::BudgetExhausted => Self::BudgetExhausted,
            Status::NotFound => Self::NotFound,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRecord {
    pub instance_id: usize,
    pub active_count: usize,
    pub algorithm: Algorithm,
    pub seed: Option<u64>,
    pub status: RecordStatus,
    /// Stop reason or error message.
    pub reason: Option<String>,
    pub switching_point: Option<usize>,
    pub score_change: f64,
    pub elapsed_us: u64,
    pub evaluations: u64,
    #[serde(with = "feature_list")]
    pub features: PerturbationSet,
    /// Found, but larger than the explained-size limit.
    pub oversized: bool,
}

impl BenchmarkRecord {
    fn from_explanation(job: &Job, e: Explanation, elapsed_us: u64) -> Self {
        let oversized = e.switching_point.is_some_and(|s| s > EXPLAINED_SIZE_LIMIT);
        Self {
            instance_id: job.instance_id,
            active_count: job.active_count,
            algorithm: job.algorithm,
            seed: job.seed,
            status: e.status.into(),
            reason: e.reason.map(|r| r.as_str().to_string()),
            switching_point: e.switching_point,
            score_change: e.score_change,
            elapsed_us,
            evaluations: e.evaluations,
            features: e.features,
            oversized,
        }
    }

    fn from_error(job: &Job, err: evcf_core::Error, elapsed_us: u64) -> Self {
        Self {
            instance_id: job.instance_id,
            active_count: job.active_count,
            algorithm: job.algorithm,
            seed: job.seed,
            status: RecordStatus::Error,
            reason: Some(err.to_string()),
            switching_point: None,
            score_change: 0.0,
            elapsed_us,
            evaluations: 0,
            features: PerturbationSet::new(),
            oversized: false,
        }
    }

    pub fn elapsed_secs(&self) -> f64 {
        self.elapsed_us as f64 / 1e6
    }

    /// Canonical record order: instance, then algorithm, then seed.
    pub fn sort_key(&self) -> (usize, Algorithm, Option<u64>) {
        (self.instance_id, self.algorithm, self.seed)
    }

    /// Equality on everything except wall time.
    pub fn same_outcome(&self, other: &Self) -> bool {
        Self {
            elapsed_us: 0,
            ..self.clone()
        } == Self {
            elapsed_us: 0,
            ..other.clone()
        } && self.score_change.to_bits() == other.score_change.to_bits()
    }
}

impl Outcome for BenchmarkRecord {
    fn found_size(&self) -> Option<usize> {
        match self.status {
            RecordStatus::Found => self.switching_point,
            _ => None,
        }
    }
}

mod feature_list {
    use evcf_core::PerturbationSet;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(set: &PerturbationSet, s: S) -> Result<S::Ok, S::Error> {
        let text: Vec<String> = set.iter().map(|j| j.to_string()).collect();
        s.serialize_str(&text.join(";"))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<PerturbationSet, D::Error> {
        let text = String::deserialize(d)?;
        text.split(';')
            .filter(|t| !t.is_empty())
            .map(|t| t.parse::<usize>().map_err(serde::de::Error::custom))
            .collect()
    }
}

/// Everything an explainer run needs besides the classifier and the instance.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSettings {
    pub algorithms: Vec<Algorithm>,
    pub seeds: Vec<u64>,
    pub search: SearchConfig,
    pub attribution: AttributionConfig,
    pub complete: CompleteConfig,
    pub random_max_draws: usize,
}

impl Default for RunSettings {
    fn default() -> Self {
        Self {
            algorithms: vec![Algorithm::Sedc],
            seeds: vec![0],
            search: SearchConfig::default(),
            attribution: AttributionConfig::default(),
            complete: CompleteConfig::default(),
            random_max_draws: usize::MAX,
        }
    }
}

/// Runs one explainer on one instance.
pub fn explain<M: Scorer>(
    algorithm: Algorithm,
    c: &Classifier<M>,
    x: &SparseInstance,
    seed: u64,
    settings: &RunSettings,
) -> evcf_core::Result<Explanation> {
    match algorithm {
        Algorithm::Sedc => explain_sedc(c, x, &settings.search),
        Algorithm::LimeC => explain_lime_c(c, x, &settings.attribution.clone().with_seed(seed), &settings.search),
        Algorithm::ShapC => explain_shap_c(c, x, &settings.attribution.clone().with_seed(seed), &settings.search),
        Algorithm::Random => explain_random(c, x, seed, settings.random_max_draws),
        Algorithm::Complete => complete_search(c, x, &settings.complete).map(|r| r.explanation),
    }
}

struct Job {
    instance_id: usize,
    active_count: usize,
    algorithm: Algorithm,
    seed: Option<u64>,
}

/// Runs the full instance × algorithm × seed grid, in parallel, and returns
/// records in canonical order. A failing job becomes an `error` record.
pub fn run_grid<M: Scorer>(
    c: &Classifier<M>,
    instances: &[(usize, SparseInstance)],
    settings: &RunSettings,
) -> Vec<BenchmarkRecord> {
    let mut jobs = Vec::new();
    for (slot, (id, x)) in instances.iter().enumerate() {
        for &algorithm in &settings.algorithms {
            let seeds: Vec<Option<u64>> = if algorithm.is_stochastic() {
                settings.seeds.iter().copied().map(Some).collect()
            } else {
                vec![None]
            };
            for seed in seeds {
                jobs.push((
                    slot,
                    Job {
                        instance_id: *id,
                        active_count: x.active_count(),
                        algorithm,
                        seed,
                    },
                ));
            }
        }
    }
    let mut records: Vec<BenchmarkRecord> = jobs
        .par_iter()
        .map(|(slot, job)| {
            let x = &instances[*slot].1;
            let start = Instant::now();
            let result = explain(job.algorithm, c, x, job.seed.unwrap_or(0), settings);
            let elapsed_us = start.elapsed().as_micros() as u64;
            match result {
                Ok(e) => BenchmarkRecord::from_explanation(job, e, elapsed_us),
                Err(err) => BenchmarkRecord::from_error(job, err, elapsed_us),
            }
        })
        .collect();
    records.sort_by_key(BenchmarkRecord::sort_key);
    records
}

/// Trains or loads the classifier named by the config.
pub fn build_classifier(cfg: &ExperimentConfig, data: &Dataset) -> Result<Classifier<Model>> {
    let model: Model = match cfg.model {
        ModelSource::TrainLinear => train_linear(data, cfg.l2, cfg.epochs, cfg.train_seed)?.into(),
        ModelSource::TrainMlp => train_mlp(data, cfg.hidden, cfg.learning_rate, cfg.epochs, cfg.train_seed)?.into(),
        ModelSource::Load => {
            let path = cfg.model_path.as_ref().expect("validated");
            let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
            let loaded = Classifier::from_json(&text)?;
            if loaded.dimension() != data.dimension() {
                return Err(HarnessError::Data(format!(
                    "model dimension {} does not match dataset dimension {}",
                    loaded.dimension(),
                    data.dimension()
                )));
            }
            let threshold = cfg.threshold.unwrap_or(loaded.threshold());
            return Ok(Classifier::new(loaded.model().clone(), threshold));
        }
    };
    let threshold = match cfg.threshold {
        Some(t) => t,
        None => imbalance_threshold(&model, data)?,
    };
    Ok(Classifier::new(model, threshold))
}

/// Threshold that makes the predicted positive rate match the labelled one.
pub fn imbalance_threshold<M: Scorer>(model: &M, data: &Dataset) -> Result<f64> {
    let scores: Vec<f64> = data.instances().iter().map(|x| model.score_unchecked(x)).collect();
    let rate = data.positives() as f64 / data.len() as f64;
    Ok(threshold_by_imbalance(&scores, rate)?)
}

/// Positively predicted instances with at least one active feature, keyed by row number.
pub fn positive_instances<M: Scorer>(c: &Classifier<M>, data: &Dataset, limit: Option<usize>) -> Vec<(usize, SparseInstance)> {
    data.instances()
        .iter()
        .enumerate()
        .filter(|(_, x)| x.active_count() > 0 && c.predict(x).unwrap_or(false))
        .take(limit.unwrap_or(usize::MAX))
        .map(|(i, x)| (i, x.clone()))
        .collect()
}

/// Loads data, builds the classifier and runs the grid described by `cfg`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<BenchmarkRecord>> {
    cfg.validate()?;
    let data = load_sparse_dataset(&cfg.dataset)?;
    let c = build_classifier(cfg, &data)?;
    let instances = positive_instances(&c, &data, cfg.max_instances);
    let settings = cfg.settings();
    if cfg.threads == 0 {
        return Ok(run_grid(&c, &instances, &settings));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| HarnessError::Config(e.to_string()))?;
    Ok(pool.install(|| run_grid(&c, &instances, &settings)))
}
