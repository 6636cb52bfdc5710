//! Discriminative candidate scorer.
//!
//! A six-feature logistic model trained on (faithful, corrupted) summary
//! pairs with the combined objective
//!
//! ```text
//! L = -ln ŷ⁺ - ln(1 - ŷ⁻) + max(0, ŷ⁻ - ŷ⁺ + γ)
//! ```
//!
//! where ŷ is the model's positive-class probability. An external scorer can
//! replace the built-in model over the line protocol.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::contrast::CandidateSummary;
use crate::ner::{NerError, Recognizer};
use crate::wire::WireError;

pub mod external;
mod features;
mod model;
mod persist;
mod train;

pub use external::{score_external, ExternalScorer};
pub use features::{featurize, FeatureVector, FEATURE_NAMES, FEATURE_RANGES};
pub use model::{logistic, pair_gradient, pair_loss, score, Gradient};
pub use persist::{load_model, save_model, MODEL_SCHEMA_VERSION};
pub use train::{train, train_features, TrainReport};

/// Probability clamp applied before any logarithm.
pub const DEFAULT_EPSILON: f64 = 1e-7;
/// Learning rate documented for large pretrained scorers attached externally.
pub const NEURAL_LEARNING_RATE: f64 = 1e-5;

#[derive(Debug, Error)]
pub enum RankerError {
    #[error("feature schema mismatch: model expects {expected} features, got {got}")]
    SchemaMismatch { expected: usize, got: usize },
    #[error("no training pairs")]
    EmptyTrainingSet,
    #[error("non-finite loss at step {step}")]
    NonFiniteLoss { step: usize },
    #[error("invalid training config: {0}")]
    InvalidConfig(String),
    #[error("model schema version {found:?} does not match {expected:?}")]
    SchemaVersionMismatch { expected: String, found: String },
    #[error("corrupt model file: {0}")]
    CorruptModelFile(String),
    #[error("model i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("scorer returned {got} scores for {expected} candidates")]
    CountMismatch { expected: usize, got: usize },
    #[error(transparent)]
    External(#[from] WireError),
    #[error(transparent)]
    Ner(#[from] NerError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSchema {
    pub version: String,
    pub names: Vec<String>,
}

impl Default for FeatureSchema {
    fn default() -> Self {
        Self { version: MODEL_SCHEMA_VERSION.to_string(), names: FEATURE_NAMES.iter().map(|s| s.to_string()).collect() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankerModel {
    pub schema: FeatureSchema,
    pub weights: Vec<f64>,
    pub bias: f64,
    /// Ranking margin γ used in training.
    pub margin: f64,
    pub epsilon: f64,
    /// Digest of the training configuration; empty for untrained models.
    pub config_digest: String,
}

impl RankerModel {
    /// All-zero model over the built-in feature schema.
    pub fn zeros(margin: f64) -> Self {
        let schema = FeatureSchema::default();
        Self {
            weights: vec![0.0; schema.names.len()],
            schema,
            bias: 0.0,
            margin,
            epsilon: DEFAULT_EPSILON,
            config_digest: String::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub margin: f64,
    pub batch_size: usize,
    pub seed: u64,
    pub epsilon: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self { learning_rate: 0.1, epochs: 3, margin: 0.0, batch_size: 32, seed: 0, epsilon: DEFAULT_EPSILON }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), RankerError> {
        let bad = |m: &str| Err(RankerError::InvalidConfig(m.to_string()));
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be positive");
        }
        if self.epochs == 0 {
            return bad("epochs must be positive");
        }
        if self.batch_size == 0 {
            return bad("batch_size must be positive");
        }
        if !(self.margin >= 0.0 && self.margin.is_finite()) {
            return bad("margin must be non-negative");
        }
        if !(self.epsilon > 0.0 && self.epsilon < 0.5) {
            return bad("epsilon must lie in (0, 0.5)");
        }
        Ok(())
    }
}

/// Scores a candidate set for one source document.
pub trait Scorer: Send + Sync {
    fn score_candidates(&self, source: &str, candidates: &[CandidateSummary]) -> Result<Vec<f64>, RankerError>;
}

/// The built-in linear model plus the recognizer its features need.
pub struct BuiltinScorer {
    pub model: RankerModel,
    recognizer: Arc<dyn Recognizer>,
}

impl BuiltinScorer {
    pub fn new(model: RankerModel, recognizer: Arc<dyn Recognizer>) -> Self {
        Self { model, recognizer }
    }
}

impl Scorer for BuiltinScorer {
    fn score_candidates(&self, source: &str, candidates: &[CandidateSummary]) -> Result<Vec<f64>, RankerError> {
        let source_mentions = self.recognizer.recognize(source)?;
        candidates
            .iter()
            .map(|c| {
                let cand_mentions = self.recognizer.recognize(&c.text)?;
                let phi = featurize(source, c, &source_mentions, &cand_mentions);
                score(&self.model, &phi)
            })
            .collect()
    }
}
