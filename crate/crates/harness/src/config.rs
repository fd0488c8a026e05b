//! Flat TOML experiment configuration.
//!
//! ```toml
//! dataset = "data/train.txt"
//! output = "out"
//! model = "train-linear"        # train-linear | train-mlp | load
//! algorithms = ["sedc", "lime-c", "shap-c", "random", "complete"]
//! seeds = [1, 2, 3, 4, 5]
//! ```
//!
//! Every other key is optional; see [`ExperimentConfig`] for names and defaults.

use std::path::{Path, PathBuf};
use std::time::Duration;

use evcf_core::attribution::AttributionConfig;
use evcf_core::oracle::CompleteConfig;
use evcf_core::search::SearchConfig;
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};
use crate::experiment::{Algorithm, RunSettings};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelSource {
    TrainLinear,
    TrainMlp,
    Load,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dataset: PathBuf,
    pub output: PathBuf,
    pub model: ModelSource,
    /// Model JSON to read when `model = "load"`.
    #[serde(default)]
    pub model_path: Option<PathBuf>,
    pub algorithms: Vec<Algorithm>,
    #[serde(default)]
    pub seeds: Vec<u64>,
    /// Explain only instances the model predicts positive. Turning this off is rejected.
    #[serde(default = "yes")]
    pub positives_only: bool,
    /// Explain at most this many instances, in file order.
    #[serde(default)]
    pub max_instances: Option<usize>,
    /// Worker threads; 0 uses every core.
    #[serde(default)]
    pub threads: usize,

    // training
    #[serde(default = "defaults::l2")]
    pub l2: f64,
    #[serde(default = "defaults::hidden")]
    pub hidden: usize,
    #[serde(default = "defaults::learning_rate")]
    pub learning_rate: f64,
    #[serde(default = "defaults::epochs")]
    pub epochs: usize,
    #[serde(default)]
    pub train_seed: u64,
    /// Fixed decision threshold; by default the training positive rate sets it.
    #[serde(default)]
    pub threshold: Option<f64>,

    // search
    #[serde(default = "defaults::max_iterations")]
    pub max_iterations: usize,
    #[serde(default = "defaults::max_explanation_size")]
    pub max_explanation_size: usize,
    #[serde(default = "defaults::max_time_secs")]
    pub max_time_secs: f64,

    // attribution
    #[serde(default = "defaults::n_samples")]
    pub n_samples: usize,
    #[serde(default = "defaults::ridge_strength")]
    pub ridge_strength: f64,
    /// Omit for automatic selection.
    #[serde(default)]
    pub lasso_strength: Option<f64>,
    #[serde(default = "defaults::kernel_width")]
    pub kernel_width: f64,

    // baselines
    #[serde(default = "defaults::max_combinations")]
    pub max_combinations: u64,
    #[serde(default = "defaults::max_active")]
    pub max_active: usize,
    #[serde(default = "defaults::random_max_draws")]
    pub random_max_draws: usize,
}

fn yes() -> bool {
    true
}

mod defaults {
    pub fn l2() -> f64 {
        1e-3
    }
    pub fn hidden() -> usize {
        16
    }
    pub fn learning_rate() -> f64 {
        0.5
    }
    pub fn epochs() -> usize {
        500
    }
    pub fn max_iterations() -> usize {
        50
    }
    pub fn max_explanation_size() -> usize {
        30
    }
    pub fn max_time_secs() -> f64 {
        120.0
    }
    pub fn n_samples() -> usize {
        5000
    }
    pub fn ridge_strength() -> f64 {
        1.0
    }
    pub fn kernel_width() -> f64 {
        0.25
    }
    pub fn max_combinations() -> u64 {
        1_000_000
    }
    pub fn max_active() -> usize {
        25
    }
    pub fn random_max_draws() -> usize {
        usize::MAX
    }
}

impl ExperimentConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text)?;
        // Relative paths in the file are relative to the file itself.
        let base = path.parent().unwrap_or(Path::new(""));
        cfg.dataset = base.join(&cfg.dataset);
        cfg.output = base.join(&cfg.output);
        if let Some(p) = cfg.model_path.take() {
            cfg.model_path = Some(base.join(p));
        }
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(HarnessError::Config(m.into()));
        if self.algorithms.is_empty() {
            return bad("at least one algorithm is required");
        }
        if self.algorithms.iter().any(|a| a.is_stochastic()) && self.seeds.is_empty() {
            return bad("seeds must be non-empty when a stochastic algorithm is selected");
        }
        if !self.positives_only {
            return bad("only positively predicted instances can be explained");
        }
        if self.model == ModelSource::Load && self.model_path.is_none() {
            return bad("model = \"load\" needs model_path");
        }
        if !(self.max_time_secs > 0.0 && self.max_time_secs.is_finite()) {
            return bad("max_time_secs must be positive");
        }
        self.settings().search.validate().map_err(|e| HarnessError::Config(e.to_string()))?;
        let a = &self.settings().attribution;
        if !(a.ridge_strength >= 0.0 && a.kernel_width > 0.0 && a.lasso_strength.is_none_or(|s| s >= 0.0)) {
            return bad("attribution strengths must be >= 0 and kernel_width > 0");
        }
        Ok(())
    }

    pub fn settings(&self) -> RunSettings {
        let mut algorithms = self.algorithms.clone();
        algorithms.sort();
        algorithms.dedup();
        RunSettings {
            algorithms,
            seeds: self.seeds.clone(),
            search: SearchConfig {
                max_iterations: self.max_iterations,
                max_explanation_size: self.max_explanation_size,
                max_time: Duration::from_secs_f64(self.max_time_secs.clamp(0.0, 1e9)),
                stop_at_first: true,
            },
            attribution: AttributionConfig {
                n_samples: self.n_samples,
                seed: 0,
                ridge_strength: self.ridge_strength,
                lasso_strength: self.lasso_strength,
                kernel_width: self.kernel_width,
            },
            complete: CompleteConfig {
                max_size: self.max_explanation_size,
                max_combinations: self.max_combinations,
                max_active: self.max_active,
            },
            random_max_draws: self.random_max_draws,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
        dataset = "d.txt"
        output = "out"
        model = "train-linear"
        algorithms = ["sedc", "lime-c"]
        seeds = [1, 2]
    "#;

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg = ExperimentConfig::parse(MINIMAL).unwrap();
        assert_eq!(cfg.algorithms, vec![Algorithm::Sedc, Algorithm::LimeC]);
        let s = cfg.settings();
        assert_eq!(s.search, SearchConfig::default());
        assert_eq!(s.attribution.n_samples, 5000);
        assert_eq!(s.complete, CompleteConfig::default());
    }

    #[test]
    fn rejects_bad_configs() {
        for (text, needle) in [
            ("dataset='d'\noutput='o'\nmodel='train-linear'\nalgorithms=[]", "algorithm"),
            ("dataset='d'\noutput='o'\nmodel='train-linear'\nalgorithms=['random']", "seeds"),
            ("dataset='d'\noutput='o'\nmodel='load'\nalgorithms=['sedc']", "model_path"),
            ("dataset='d'\noutput='o'\nmodel='train-linear'\nalgorithms=['sedc']\nbogus=1", "bogus"),
            ("dataset='d'\noutput='o'\nmodel='train-linear'\nalgorithms=['magic']", "magic"),
            ("dataset='d'\noutput='o'\nmodel='train-linear'\nalgorithms=['sedc']\nmax_iterations=0", "max_iterations"),
        ] {
            match ExperimentConfig::parse(text) {
                Err(HarnessError::Config(m)) => assert!(m.contains(needle), "{m}"),
                other => panic!("{text}: {other:?}"),
            }
        }
    }

    #[test]
    fn relative_paths_follow_the_config_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bench.toml");
        std::fs::write(&path, MINIMAL).unwrap();
        let cfg = ExperimentConfig::load(&path).unwrap();
        assert_eq!(cfg.dataset, dir.path().join("d.txt"));
        assert_eq!(cfg.output, dir.path().join("out"));
    }
}
