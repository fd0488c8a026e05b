use crate::sparse::FeatureId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum Error {
    #[error("feature index {index} out of range for dimension {dimension}")]
    IndexOutOfRange { index: FeatureId, dimension: usize },
    #[error("feature indices must be strictly increasing (found {prev} before {next})")]
    UnsortedIndices { prev: FeatureId, next: FeatureId },
    #[error("duplicate feature index {0}")]
    DuplicateIndex(FeatureId),
    #[error("explicit zero value stored for feature {0}")]
    ZeroValue(FeatureId),
    #[error("non-finite value stored for feature {0}")]
    NonFiniteValue(FeatureId),
    #[error("feature {0} is not active in the instance")]
    NotActive(FeatureId),
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("cosine similarity is undefined for two empty masks")]
    EmptyMasks,
    #[error("instance is not positively predicted (score {score} < threshold {threshold})")]
    NotPositive { score: f64, threshold: f64 },
    #[error("instance has no active features")]
    NoActiveFeatures,
    #[error("degenerate dataset: {0}")]
    DegenerateDataset(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("scores must be non-empty")]
    EmptyScores,
    #[error("weighted least-squares system is singular")]
    SingularFit,
    #[error("frontier exhausted: no expandable subset remains")]
    FrontierExhausted,
    #[error("importance ranking is empty")]
    EmptyRanking,
    #[error("too many active features for complete search ({active} > {limit})")]
    TooManyActive { active: usize, limit: usize },
    #[error("no discordant pairs")]
    NoDiscordantPairs,
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("empty input")]
    EmptyInput,
    #[error("invalid model json: {0}")]
    ModelJson(String),
}
