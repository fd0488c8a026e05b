//! JSON model files.
//!
//! ```text
//! {"type": "linear", "dimension": m, "weights": [[j, w], ...], "intercept": b, "threshold": t}
//! {"type": "mlp", "dimension": m,
//!  "weights": {"hidden": [[[j, w], ...], ...], "hidden_bias": [...], "output": [...]},
//!  "intercept": b, "threshold": t}
//! ```
//!
//! Sparse weight lists omit zeros. For an MLP, `intercept` is the output bias.

use serde::{Deserialize, Serialize};

use super::{Classifier, LinearModel, MlpModel, Model};
use crate::sparse::FeatureId;
use crate::{Error, Result};

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
enum ModelFile {
    Linear {
        dimension: usize,
        weights: Vec<(FeatureId, f64)>,
        intercept: f64,
        threshold: f64,
    },
    Mlp {
        dimension: usize,
        weights: MlpWeights,
        intercept: f64,
        threshold: f64,
    },
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MlpWeights {
    hidden: Vec<Vec<(FeatureId, f64)>>,
    hidden_bias: Vec<f64>,
    output: Vec<f64>,
}

impl Classifier<Model> {
    pub fn to_json(&self) -> String {
        let file = match self.model() {
            Model::Linear(m) => ModelFile::Linear {
                dimension: crate::Scorer::dimension(m),
                weights: m.sparse_weights().collect(),
                intercept: m.intercept(),
                threshold: self.threshold(),
            },
            Model::Mlp(m) => ModelFile::Mlp {
                dimension: crate::Scorer::dimension(m),
                weights: MlpWeights {
                    hidden: (0..m.hidden_units()).map(|k| m.hidden_row(k)).collect(),
                    hidden_bias: m.hidden_bias().to_vec(),
                    output: m.output_weights().to_vec(),
                },
                intercept: m.output_bias(),
                threshold: self.threshold(),
            },
        };
        serde_json::to_string_pretty(&file).expect("model serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(text).map_err(|e| Error::ModelJson(e.to_string()))?;
        let (model, threshold) = match file {
            ModelFile::Linear {
                dimension,
                weights,
                intercept,
                threshold,
            } => (Model::Linear(LinearModel::new(dimension, weights, intercept)?), threshold),
            ModelFile::Mlp {
                dimension,
                weights,
                intercept,
                threshold,
            } => (
                Model::Mlp(MlpModel::new(
                    dimension,
                    &weights.hidden,
                    weights.hidden_bias,
                    weights.output,
                    intercept,
                )?),
                threshold,
            ),
        };
        if !threshold.is_finite() {
            return Err(Error::ModelJson("threshold must be finite".into()));
        }
        Ok(Classifier::new(model, threshold))
    }
}
