//! Scoring models, classifiers and the datasets they are trained on.
//!
//! Explainers only ever see a [`Classifier`]: a scoring function `f` plus a
//! threshold `t`, with `predict(x) = 1` iff `f(x) >= t`. Anything that
//! implements [`Scorer`] can be explained; [`LinearModel`] and [`MlpModel`]
//! are the two model families shipped with the crate.

mod json;
mod train;

pub use train::{threshold_by_imbalance, train_linear, train_linear_with_history, train_mlp, train_mlp_with_history};

use serde::{Deserialize, Serialize};

use crate::sparse::{FeatureId, SparseInstance};
use crate::{Error, Result};

/// A real-valued scoring function over sparse instances.
pub trait Scorer: Send + Sync {
    fn dimension(&self) -> usize;

    /// Scores an instance whose dimension is already known to match.
    fn score_unchecked(&self, x: &SparseInstance) -> f64;
}

/// `f(x) = intercept + Σ_j w_j x_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    weights: Vec<f64>,
    intercept: f64,
}

impl LinearModel {
    /// Builds a model from sparse `(feature, weight)` pairs; unlisted weights are zero.
    pub fn new<I>(dimension: usize, weights: I, intercept: f64) -> Result<Self>
    where
        I: IntoIterator<Item = (FeatureId, f64)>,
    {
        let mut dense = vec![0.0; dimension];
        for (index, w) in weights {
            if index >= dimension {
                return Err(Error::IndexOutOfRange { index, dimension });
            }
            if !w.is_finite() {
                return Err(Error::NonFiniteValue(index));
            }
            dense[index] = w;
        }
        if !intercept.is_finite() {
            return Err(Error::InvalidParameter("intercept must be finite".into()));
        }
        Ok(Self {
            weights: dense,
            intercept,
        })
    }

    pub fn from_dense(weights: Vec<f64>, intercept: f64) -> Self {
        Self { weights, intercept }
    }

    pub fn weight(&self, index: FeatureId) -> f64 {
        self.weights.get(index).copied().unwrap_or(0.0)
    }

    pub fn intercept(&self) -> f64 {
        self.intercept
    }

    /// Nonzero weights in increasing feature order.
    pub fn sparse_weights(&self) -> impl Iterator<Item = (FeatureId, f64)> + '_ {
        self.weights
            .iter()
            .copied()
            .enumerate()
            .filter(|&(_, w)| w != 0.0)
    }

    /// Per-feature score contributions `w_j x_j` of the active features of `x`.
    pub fn contributions(&self, x: &SparseInstance) -> Vec<(FeatureId, f64)> {
        x.iter().map(|(j, v)| (j, self.weight(j) * v)).collect()
    }
}

impl Scorer for LinearModel {
    fn dimension(&self) -> usize {
        self.weights.len()
    }

    fn score_unchecked(&self, x: &SparseInstance) -> f64 {
        self.intercept + x.iter().map(|(j, v)| self.weights[j] * v).sum::<f64>()
    }
}

/// One hidden rectifier layer followed by a linear output unit.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    dimension: usize,
    hidden: usize,
    // Column-major by input feature: weights feeding hidden unit k from
    // feature j live at `j * hidden + k`, so a sparse forward pass touches
    // one contiguous slice per active feature.
    input_weights: Vec<f64>,
    hidden_bias: Vec<f64>,
    output_weights: Vec<f64>,
    output_bias: f64,
}

impl MlpModel {
    /// `rows[k]` holds the sparse input weights of hidden unit `k`.
    pub fn new(
        dimension: usize,
        rows: &[Vec<(FeatureId, f64)>],
        hidden_bias: Vec<f64>,
        output_weights: Vec<f64>,
        output_bias: f64,
    ) -> Result<Self> {
        let hidden = rows.len();
        if hidden == 0 {
            return Err(Error::InvalidParameter("hidden layer must have at least one unit".into()));
        }
        if hidden_bias.len() != hidden || output_weights.len() != hidden {
            return Err(Error::InvalidParameter(format!(
                "layer shapes disagree: {hidden} hidden rows, {} biases, {} output weights",
                hidden_bias.len(),
                output_weights.len()
            )));
        }
        let mut input_weights = vec![0.0; dimension * hidden];
        for (k, row) in rows.iter().enumerate() {
            for &(j, w) in row {
                if j >= dimension {
                    return Err(Error::IndexOutOfRange {
                        index: j,
                        dimension,
                    });
                }
                input_weights[j * hidden + k] = w;
            }
        }
        Ok(Self {
            dimension,
            hidden,
            input_weights,
            hidden_bias,
            output_weights,
            output_bias,
        })
    }

    pub(crate) fn from_parts(
        dimension: usize,
        hidden: usize,
        input_weights: Vec<f64>,
        hidden_bias: Vec<f64>,
        output_weights: Vec<f64>,
        output_bias: f64,
    ) -> Self {
        debug_assert_eq!(input_weights.len(), dimension * hidden);
        Self {
            dimension,
            hidden,
            input_weights,
            hidden_bias,
            output_weights,
            output_bias,
        }
    }

    pub fn hidden_units(&self) -> usize {
        self.hidden
    }

    pub fn hidden_bias(&self) -> &[f64] {
        &self.hidden_bias
    }

    pub fn output_weights(&self) -> &[f64] {
        &self.output_weights
    }

    pub fn output_bias(&self) -> f64 {
        self.output_bias
    }

    /// Sparse input weights of hidden unit `k`.
    pub fn hidden_row(&self, k: usize) -> Vec<(FeatureId, f64)> {
        (0..self.dimension)
            .map(|j| (j, self.input_weights[j * self.hidden + k]))
            .filter(|&(_, w)| w != 0.0)
            .collect()
    }

    pub(crate) fn pre_activations(&self, x: &SparseInstance, out: &mut [f64]) {
        out.copy_from_slice(&self.hidden_bias);
        for (j, v) in x.iter() {
            let col = &self.input_weights[j * self.hidden..(j + 1) * self.hidden];
            for (a, w) in out.iter_mut().zip(col) {
                *a += w * v;
            }
        }
    }
}

impl Scorer for MlpModel {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn score_unchecked(&self, x: &SparseInstance) -> f64 {
        let mut act = vec![0.0; self.hidden];
        self.pre_activations(x, &mut act);
        self.output_bias
            + act
                .iter()
                .zip(&self.output_weights)
                .map(|(a, v)| a.max(0.0) * v)
                .sum::<f64>()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Linear(LinearModel),
    Mlp(MlpModel),
}

impl Scorer for Model {
    fn dimension(&self) -> usize {
        match self {
            Model::Linear(m) => m.dimension(),
            Model::Mlp(m) => m.dimension(),
        }
    }

    fn score_unchecked(&self, x: &SparseInstance) -> f64 {
        match self {
            Model::Linear(m) => m.score_unchecked(x),
            Model::Mlp(m) => m.score_unchecked(x),
        }
    }
}

impl From<LinearModel> for Model {
    fn from(m: LinearModel) -> Self {
        Model::Linear(m)
    }
}

impl From<MlpModel> for Model {
    fn from(m: MlpModel) -> Self {
        Model::Mlp(m)
    }
}

/// A scoring function with a decision threshold: predicts 1 iff `score >= threshold`.
#[derive(Debug, Clone, PartialEq)]
pub struct Classifier<M = Model> {
    model: M,
    threshold: f64,
}

impl<M: Scorer> Classifier<M> {
    pub fn new(model: M, threshold: f64) -> Self {
        Self { model, threshold }
    }

    pub fn model(&self) -> &M {
        &self.model
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn dimension(&self) -> usize {
        self.model.dimension()
    }

    pub fn score(&self, x: &SparseInstance) -> Result<f64> {
        if x.dimension() != self.model.dimension() {
            return Err(Error::DimensionMismatch {
                expected: self.model.dimension(),
                actual: x.dimension(),
            });
        }
        Ok(self.model.score_unchecked(x))
    }

    /// `true` for class 1.
    pub fn predict(&self, x: &SparseInstance) -> Result<bool> {
        Ok(self.is_positive_score(self.score(x)?))
    }

    pub fn is_positive_score(&self, score: f64) -> bool {
        score >= self.threshold
    }

    /// Checks the precondition shared by every explainer: `x` is predicted
    /// positive and has at least one active feature. Returns its score.
    pub fn require_positive(&self, x: &SparseInstance) -> Result<f64> {
        let score = self.score(x)?;
        if !self.is_positive_score(score) {
            return Err(Error::NotPositive {
                score,
                threshold: self.threshold,
            });
        }
        if x.active_count() == 0 {
            return Err(Error::NoActiveFeatures);
        }
        Ok(score)
    }
}

/// Labelled sparse instances sharing one feature space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    dimension: usize,
    instances: Vec<SparseInstance>,
    labels: Vec<u8>,
}

impl Dataset {
    pub fn new(dimension: usize, instances: Vec<SparseInstance>, labels: Vec<u8>) -> Result<Self> {
        if instances.len() != labels.len() {
            return Err(Error::LengthMismatch(instances.len(), labels.len()));
        }
        if let Some(x) = instances.iter().find(|x| x.dimension() != dimension) {
            return Err(Error::DimensionMismatch {
                expected: dimension,
                actual: x.dimension(),
            });
        }
        if let Some(&l) = labels.iter().find(|&&l| l > 1) {
            return Err(Error::InvalidParameter(format!("label {l} is not in {{0, 1}}")));
        }
        Ok(Self {
            dimension,
            instances,
            labels,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn instances(&self) -> &[SparseInstance] {
        &self.instances
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn positives(&self) -> usize {
        self.labels.iter().filter(|&&l| l == 1).count()
    }

    /// Fraction of instances in the minority class (`b`).
    pub fn imbalance(&self) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        let pos = self.positives();
        pos.min(self.len() - pos) as f64 / self.len() as f64
    }

    /// `1 - mean(active count) / dimension` (`p`).
    pub fn sparsity(&self) -> f64 {
        if self.is_empty() || self.dimension == 0 {
            return 1.0;
        }
        let active: usize = self.instances.iter().map(SparseInstance::active_count).sum();
        1.0 - active as f64 / (self.len() as f64 * self.dimension as f64)
    }

    pub fn mean_active(&self) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        self.instances.iter().map(|x| x.active_count() as f64).sum::<f64>() / self.len() as f64
    }
}
