//! End-to-end stages shared by the command-line front end and tests.
//!
//! Per-example stages can fan out over a thread pool; results always come
//! back in input order, so output files do not depend on the thread count.

use std::collections::{BTreeSet, HashMap};
use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{derive_seed, ConfigInvalid, PipelineConfig, RecognizerConfig, ScorerConfig};
use crate::contrast::{
    filter_clean, find_hallucinated, generate_candidates, CandidateRecord, ContrastError, TrainingPair,
};
use crate::corpus::{CorpusError, Example};
use crate::eval::{build_report, BootstrapSettings, EvalError, EvalReport, IdentificationMode, ReportInputs};
use crate::fixtures::gold_flags;
use crate::ner::{BuiltinRecognizer, EntityLabel, EntityMention, ExternalRecognizer, Gazetteer, NerError, Recognizer};
use crate::ranker::{self, load_model, BuiltinScorer, ExternalScorer, RankerError, RankerModel, Scorer, TrainReport};
use crate::select::{select_best, SelectionOutcome};

/// Any stage failure, tagged with the module it came from.
#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("config: {0}")]
    Config(#[from] ConfigInvalid),
    #[error("corpus: {0}")]
    Corpus(#[from] CorpusError),
    #[error("ner: {0}")]
    Ner(#[from] NerError),
    #[error("contrast: {0}")]
    Contrast(#[from] ContrastError),
    #[error("ranker: {0}")]
    Ranker(#[from] RankerError),
    #[error("eval: {0}")]
    Eval(#[from] EvalError),
    #[error("config: the built-in scorer needs a model file (scorer.model or --model)")]
    MissingModel,
    #[error("thread pool: {0}")]
    ThreadPool(String),
}

/// Drops mentions whose label is not allowed.
pub struct AllowlistRecognizer {
    inner: Arc<dyn Recognizer>,
    allowed: BTreeSet<EntityLabel>,
}

impl AllowlistRecognizer {
    pub fn new(inner: Arc<dyn Recognizer>, allowed: BTreeSet<EntityLabel>) -> Self {
        Self { inner, allowed }
    }
}

impl Recognizer for AllowlistRecognizer {
    fn recognize(&self, text: &str) -> Result<Vec<EntityMention>, NerError> {
        let mut mentions = self.inner.recognize(text)?;
        mentions.retain(|m| self.allowed.contains(&m.label));
        Ok(mentions)
    }
}

pub fn build_recognizer(config: &PipelineConfig) -> Result<Arc<dyn Recognizer>, PipelineError> {
    let base: Arc<dyn Recognizer> = match &config.recognizer {
        RecognizerConfig::Builtin { gazetteers } => {
            let mut all: Vec<Gazetteer> = Vec::new();
            for path in gazetteers {
                all.extend(Gazetteer::load_tsv(path)?);
            }
            Arc::new(BuiltinRecognizer::new(&all))
        }
        RecognizerConfig::External { endpoint } => Arc::new(ExternalRecognizer::connect(endpoint)?),
    };
    if config.label_allowlist.len() == EntityLabel::ALL.len() {
        Ok(base)
    } else {
        Ok(Arc::new(AllowlistRecognizer::new(base, config.label_allowlist.clone())))
    }
}

/// The configured scorer. `model_override` takes precedence over the
/// config's model path for the built-in scorer.
pub fn build_scorer(
    config: &PipelineConfig,
    recognizer: Arc<dyn Recognizer>,
    model_override: Option<&Path>,
) -> Result<Arc<dyn Scorer>, PipelineError> {
    match &config.scorer {
        ScorerConfig::Builtin { model } => {
            let path = model_override.or(model.as_deref()).ok_or(PipelineError::MissingModel)?;
            let model = load_model(path)?;
            Ok(Arc::new(BuiltinScorer::new(model, recognizer)))
        }
        ScorerConfig::External { endpoint } => Ok(Arc::new(ExternalScorer::connect(endpoint)?)),
    }
}

/// Map `f` over `items` on `threads` workers (sequentially for 0 or 1),
/// keeping input order. The first error in input order wins.
fn fan_out<T, R, F>(items: &[T], threads: usize, f: F) -> Result<Vec<R>, PipelineError>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> Result<R, PipelineError> + Sync + Send,
{
    let results: Vec<Result<R, PipelineError>> = if threads <= 1 {
        items.iter().map(&f).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| PipelineError::ThreadPool(e.to_string()))?;
        pool.install(|| items.par_iter().map(&f).collect())
    };
    results.into_iter().collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionRecord {
    pub id: String,
    pub hallucinated: bool,
    /// Summary mentions with no counterpart in the document.
    pub flagged: Vec<EntityMention>,
}

pub fn run_detect(
    examples: &[Example],
    recognizer: &dyn Recognizer,
    threads: usize,
) -> Result<Vec<DetectionRecord>, PipelineError> {
    fan_out(examples, threads, |ex| {
        let src = recognizer.recognize(&ex.document)?;
        let sum = recognizer.recognize(&ex.summary)?;
        let flagged = find_hallucinated(&ex.document, &src, &sum);
        Ok(DetectionRecord { id: ex.id.clone(), hallucinated: !flagged.is_empty(), flagged })
    })
}

fn candidates_for(
    ex: &Example,
    recognizer: &dyn Recognizer,
    max_candidates: usize,
) -> Result<Vec<crate::contrast::CandidateSummary>, PipelineError> {
    let src = recognizer.recognize(&ex.document)?;
    let sum = recognizer.recognize(&ex.summary)?;
    let flagged = find_hallucinated(&ex.document, &src, &sum);
    Ok(generate_candidates(ex, &src, &sum, &flagged, max_candidates))
}

pub fn run_generate(
    examples: &[Example],
    recognizer: &dyn Recognizer,
    max_candidates: usize,
    threads: usize,
) -> Result<Vec<CandidateRecord>, PipelineError> {
    let per_example = fan_out(examples, threads, |ex| {
        let cands = candidates_for(ex, recognizer, max_candidates)?;
        Ok(cands
            .into_iter()
            .enumerate()
            .map(|(index, c)| CandidateRecord { id: ex.id.clone(), index, text: c.text, provenance: c.provenance })
            .collect::<Vec<_>>())
    })?;
    Ok(per_example.into_iter().flatten().collect())
}

/// Clean-example filtering followed by negative synthesis, seeded from the
/// `synth` stage of `seed`.
pub fn run_synth(
    examples: &[Example],
    recognizer: &dyn Recognizer,
    negatives_per_example: usize,
    seed: u64,
) -> Result<Vec<TrainingPair>, PipelineError> {
    let clean = filter_clean(examples, recognizer)?;
    Ok(crate::contrast::make_training_pairs(&clean, recognizer, negatives_per_example, derive_seed(seed, "synth"))?)
}

/// Train with the config's hyperparameters; the shuffle seed comes from the
/// `train` stage of the top-level seed.
pub fn run_train(
    pairs: &[TrainingPair],
    recognizer: &dyn Recognizer,
    config: &PipelineConfig,
) -> Result<(RankerModel, TrainReport), PipelineError> {
    let mut train_config = config.train.clone();
    train_config.seed = derive_seed(config.seed, "train");
    Ok(ranker::train(pairs, recognizer, &train_config)?)
}

/// Detect, generate, score and select for every example.
pub fn run_correct(
    examples: &[Example],
    recognizer: &dyn Recognizer,
    scorer: &dyn Scorer,
    config: &PipelineConfig,
    threads: usize,
) -> Result<Vec<SelectionOutcome>, PipelineError> {
    fan_out(examples, threads, |ex| {
        let cands = candidates_for(ex, recognizer, config.max_candidates)?;
        Ok(select_best(scorer, ex, &cands, config.min_improvement))
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalOptions {
    pub mode: IdentificationMode,
    pub bootstrap: Option<BootstrapSettings>,
    pub threads: usize,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self { mode: IdentificationMode::Changed, bootstrap: Some(BootstrapSettings::default()), threads: 1 }
    }
}

/// Score outcomes against the examples they came from. References feed
/// ROUGE; identification is reported when every outcome has a gold flag in
/// the example metadata.
pub fn run_eval(
    outcomes: &[SelectionOutcome],
    examples: &[Example],
    options: &EvalOptions,
) -> Result<EvalReport, PipelineError> {
    let references: HashMap<String, String> =
        examples.iter().filter_map(|e| Some((e.id.clone(), e.reference.clone()?))).collect();
    let flags = gold_flags(examples);
    let have_flags = !outcomes.is_empty() && outcomes.iter().all(|o| flags.contains_key(&o.example_id));
    Ok(build_report(&ReportInputs {
        outcomes,
        references: &references,
        gold_flags: have_flags.then_some(&flags),
        mode: options.mode,
        bootstrap: options.bootstrap,
        parallel: options.threads > 1,
    })?)
}
