//! Pick the highest-scoring candidate and classify the outcome.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::contrast::CandidateSummary;
use crate::corpus::Example;
use crate::ranker::Scorer;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bucket {
    Changed,
    KeptOriginal,
    /// Only the original was available: nothing flagged, or no compatible
    /// replacement in the source.
    NoCandidates,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredCandidate {
    pub text: String,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionOutcome {
    pub example_id: String,
    pub chosen: CandidateSummary,
    pub bucket: Bucket,
    /// Every candidate with its score, in candidate order. Empty when the
    /// scorer failed.
    pub scored: Vec<ScoredCandidate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostic: Option<String>,
}

impl SelectionOutcome {
    /// The original summary's score, if scoring succeeded.
    pub fn original_score(&self) -> Option<f64> {
        self.scored.first().map(|s| s.score)
    }
}

/// Exact-score tie-break: original first, then the earliest replacement in
/// the source, then text order. `Less` means preferred.
fn tie_break(a: &CandidateSummary, b: &CandidateSummary) -> Ordering {
    b.is_original()
        .cmp(&a.is_original())
        .then_with(|| a.first_replacement_offset().cmp(&b.first_replacement_offset()))
        .then_with(|| a.text.cmp(&b.text))
}

/// Score every candidate (the original included) and keep the best.
///
/// `candidates` must contain the original exactly once, conventionally
/// first. A non-original replaces it only when its score exceeds the
/// original's by at least `min_improvement` (0 means plain argmax). A scorer
/// failure keeps the original and records the error in `diagnostic`.
pub fn select_best(
    scorer: &dyn Scorer,
    example: &Example,
    candidates: &[CandidateSummary],
    min_improvement: f64,
) -> SelectionOutcome {
    let original_idx =
        candidates.iter().position(CandidateSummary::is_original).expect("candidate set contains the original");
    debug_assert_eq!(candidates.iter().filter(|c| c.is_original()).count(), 1);
    let only_original = candidates.len() == 1;

    let fallback = |diagnostic: Option<String>| SelectionOutcome {
        example_id: example.id.clone(),
        chosen: candidates[original_idx].clone(),
        bucket: if only_original { Bucket::NoCandidates } else { Bucket::KeptOriginal },
        scored: Vec::new(),
        diagnostic,
    };

    let scores = match scorer.score_candidates(&example.document, candidates) {
        Ok(s) if s.len() == candidates.len() && s.iter().all(|x| x.is_finite()) => s,
        Ok(s) => return fallback(Some(format!("scorer returned {} unusable scores", s.len()))),
        Err(e) => return fallback(Some(format!("scorer failure: {e}"))),
    };

    let mut best = original_idx;
    for i in 0..candidates.len() {
        let ord = scores[i]
            .partial_cmp(&scores[best])
            .expect("scores are finite")
            .then_with(|| tie_break(&candidates[best], &candidates[i]));
        if ord == Ordering::Greater {
            best = i;
        }
    }
    if best != original_idx && scores[best] - scores[original_idx] < min_improvement {
        best = original_idx;
    }

    let mut chosen = candidates[best].clone();
    chosen.score = Some(scores[best]);
    let bucket = if only_original {
        Bucket::NoCandidates
    } else if chosen.is_original() {
        Bucket::KeptOriginal
    } else {
        Bucket::Changed
    };
    // Keep the original's entry first so `original_score` can find it.
    let mut order: Vec<usize> = (0..candidates.len()).collect();
    order.swap(0, original_idx);
    order[1..].sort_unstable();
    SelectionOutcome {
        example_id: example.id.clone(),
        chosen,
        bucket,
        scored: order
            .into_iter()
            .map(|i| ScoredCandidate { text: candidates[i].text.clone(), score: scores[i] })
            .collect(),
        diagnostic: None,
    }
}
