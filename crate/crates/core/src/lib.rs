//! Evidence counterfactual explanations for binary classifiers over sparse,
//! high-dimensional data.
//!
//! An evidence counterfactual is a set of active (nonzero) features of an
//! instance whose removal flips the predicted class. This crate provides:
//!
//! * [`sparse`]: sparse instances, binary masks and perturbation.
//! * [`model`]: the scoring-model abstraction plus desk-scale trainers.
//! * [`search`]: best-first counterfactual search (SEDC).
//! * [`attribution`]: LIME-style and SHAP-style additive feature attribution.
//! * [`hybrid`]: ranked-list extraction (lin-SEDC) and the LIME-C / SHAP-C pipelines.
//! * [`oracle`]: the complete-search oracle and the random baseline.
//! * [`stats`]: evaluation metrics and the McNemar mid-p test.
//!
//! ```
//! use evcf_core::search::{explain_sedc, SearchConfig};
//! use evcf_core::{Classifier, LinearModel, SparseInstance};
//!
//! let model = LinearModel::new(4, [(0, 2.0), (1, 0.5), (2, 1.0)], 0.0)?;
//! let c = Classifier::new(model, 2.0); // positive iff score >= 2.0
//! let x = SparseInstance::new(4, [(0, 1.0), (1, 1.0), (2, 1.0)])?;
//! let e = explain_sedc(&c, &x, &SearchConfig::default())?;
//! assert_eq!(e.features.as_slice(), &[0]);
//! # Ok::<(), evcf_core::Error>(())
//! ```

pub mod attribution;
pub mod combinations;
mod error;
pub mod explanation;
pub mod hybrid;
pub mod model;
pub mod oracle;
pub mod regression;
pub mod search;
pub mod sparse;
pub mod stats;

pub use error::{Error, Result};
pub use explanation::{Explanation, Reason, Status};
pub use model::{Classifier, Dataset, LinearModel, MlpModel, Model, Scorer};
pub use sparse::{BinaryMask, FeatureId, PerturbationSet, SparseInstance};
