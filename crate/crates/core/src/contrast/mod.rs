//! Hallucination detection, contrast candidates and synthetic training pairs.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ner::{EntityLabel, EntityMention, NerError};

mod detect;
mod generate;
mod synth;

pub use detect::{find_hallucinated, grounding_mention, SourceIndex};
pub use generate::{generate_candidates, replacement_pool};
pub use synth::{filter_clean, make_training_pairs};

#[derive(Debug, Error)]
pub enum ContrastError {
    #[error("example {0:?} has no reference summary")]
    MissingReference(String),
    #[error(transparent)]
    Ner(#[from] NerError),
}

/// One entity swap: `replaced` lives in the original summary, `replacement`
/// in the source document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Substitution {
    pub replaced: EntityMention,
    pub replacement: EntityMention,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Original,
    Substitutions(Vec<Substitution>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateSummary {
    pub text: String,
    pub provenance: Provenance,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub score: Option<f64>,
}

impl CandidateSummary {
    pub fn original(summary: impl Into<String>) -> Self {
        Self { text: summary.into(), provenance: Provenance::Original, score: None }
    }

    pub fn is_original(&self) -> bool {
        matches!(self.provenance, Provenance::Original)
    }

    pub fn substitutions(&self) -> &[Substitution] {
        match &self.provenance {
            Provenance::Original => &[],
            Provenance::Substitutions(subs) => subs,
        }
    }

    /// Char spans of the inserted replacements within `self.text`, in
    /// left-to-right order.
    pub fn substituted_spans(&self) -> Vec<(usize, usize)> {
        let mut subs: Vec<&Substitution> = self.substitutions().iter().collect();
        subs.sort_by_key(|s| s.replaced.start);
        let mut shift: isize = 0;
        subs.iter()
            .map(|s| {
                let start = (s.replaced.start as isize + shift) as usize;
                let len = s.replacement.surface.chars().count();
                shift += len as isize - s.replaced.len() as isize;
                (start, start + len)
            })
            .collect()
    }

    /// Earliest source offset among the replacements; `None` for the original.
    pub fn first_replacement_offset(&self) -> Option<usize> {
        self.substitutions().iter().map(|s| s.replacement.start).min()
    }
}

/// Candidate record as written by `generate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateRecord {
    pub id: String,
    pub index: usize,
    pub text: String,
    pub provenance: Provenance,
}

/// The single span that differs between a training pair's texts.
///
/// `start..end` indexes the positive summary; `source_start..source_end`
/// locates the replacement in the source and `gold_source_start..
/// gold_source_end` the source mention that grounds the gold entity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorruptedSpan {
    pub replaced: String,
    pub replacement: String,
    pub label: EntityLabel,
    pub start: usize,
    pub end: usize,
    pub source_start: usize,
    pub source_end: usize,
    pub gold_source_start: usize,
    pub gold_source_end: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainingPair {
    pub id: String,
    pub source: String,
    pub positive: String,
    pub negative: String,
    pub corrupted_span: CorruptedSpan,
}

impl TrainingPair {
    /// Both sides as candidates over the same summary slot: the positive
    /// swaps in the gold entity's own source mention, the negative the
    /// corrupting one.
    pub fn as_candidates(&self) -> (CandidateSummary, CandidateSummary) {
        let c = &self.corrupted_span;
        let replaced = EntityMention::from_text(&self.positive, c.start, c.end, c.label)
            .expect("corrupted span indexes the positive text");
        let side = |text: &str, start, end| {
            let replacement = EntityMention::from_text(&self.source, start, end, c.label)
                .expect("source span indexes the source text");
            CandidateSummary {
                text: text.to_string(),
                provenance: Provenance::Substitutions(vec![Substitution { replaced: replaced.clone(), replacement }]),
                score: None,
            }
        };
        (
            side(&self.positive, c.gold_source_start, c.gold_source_end),
            side(&self.negative, c.source_start, c.source_end),
        )
    }
}
