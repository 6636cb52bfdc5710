use std::collections::HashSet;

use crate::contrast::{find_hallucinated, CandidateSummary};
use crate::ner::EntityMention;
use crate::text::{char_len, is_stopword, word_tokens, Token};

pub const FEATURE_NAMES: [&str; 6] = [
    "grounded_mention_fraction",
    "is_original",
    "source_token_coverage",
    "replacement_log_frequency",
    "replacement_earliness",
    "context_overlap",
];

/// Inclusive bounds per feature, in schema order.
pub const FEATURE_RANGES: [(f64, f64); 6] =
    [(0.0, 1.0), (0.0, 1.0), (0.0, 1.0), (0.0, f64::INFINITY), (0.0, 1.0), (0.0, 1.0)];

const CONTEXT_WINDOW: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector(Vec<f64>);

impl FeatureVector {
    /// Wraps raw values; `None` if any is non-finite or out of range.
    pub fn new(values: Vec<f64>) -> Option<Self> {
        let ok = values.len() == FEATURE_RANGES.len()
            && values.iter().zip(FEATURE_RANGES).all(|(v, (lo, hi))| v.is_finite() && *v >= lo && *v <= hi);
        ok.then_some(Self(values))
    }

    /// Wraps values without range checks, for models over other schemas.
    pub fn unchecked(values: Vec<f64>) -> Self {
        Self(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

fn flank(tokens: &[Token], start: usize, end: usize) -> HashSet<&str> {
    let before = tokens.iter().filter(|t| t.end <= start).collect::<Vec<_>>();
    let after = tokens.iter().filter(|t| t.start >= end).take(CONTEXT_WINDOW);
    before.iter().rev().take(CONTEXT_WINDOW).copied().chain(after).map(|t| t.text.as_str()).collect()
}

fn char_find(haystack: &str, needle: &str) -> Option<usize> {
    haystack.find(needle).map(|b| haystack[..b].chars().count())
}

/// Features of one candidate against its source, in [`FEATURE_NAMES`] order.
///
/// 1. share of candidate mentions not flagged as hallucinated (1 when none);
/// 2. 1 for the original summary, else 0;
/// 3. share of candidate content tokens found in the source (1 when none);
/// 4. mean ln(1 + occurrences of the replacement surface in the source);
/// 5. mean 1 − first source offset of the replacement / source length;
/// 6. mean overlap between the five tokens either side of each inserted span
///    and the five either side of the replacement's source position, as the
///    share of candidate context tokens also in the source context.
///
/// Features 4–6 are 0 for the original.
pub fn featurize(
    source: &str,
    candidate: &CandidateSummary,
    source_mentions: &[EntityMention],
    candidate_mentions: &[EntityMention],
) -> FeatureVector {
    let grounded = if candidate_mentions.is_empty() {
        1.0
    } else {
        let flagged = find_hallucinated(source, source_mentions, candidate_mentions).len();
        1.0 - flagged as f64 / candidate_mentions.len() as f64
    };

    let is_original = if candidate.is_original() { 1.0 } else { 0.0 };

    let source_tokens = word_tokens(source);
    let vocab: HashSet<&str> = source_tokens.iter().map(|t| t.text.as_str()).collect();
    let cand_tokens = word_tokens(&candidate.text);
    let content: Vec<&str> = cand_tokens.iter().map(|t| t.text.as_str()).filter(|t| !is_stopword(t)).collect();
    let coverage = if content.is_empty() {
        1.0
    } else {
        content.iter().filter(|t| vocab.contains(*t)).count() as f64 / content.len() as f64
    };

    let subs = candidate.substitutions();
    let source_len = char_len(source).max(1) as f64;
    let log_freq = mean(subs.iter().map(|s| {
        let count = source.matches(s.replacement.surface.as_str()).count();
        (1.0 + count as f64).ln()
    }));
    let earliness = mean(subs.iter().map(|s| {
        let first = char_find(source, &s.replacement.surface).unwrap_or(s.replacement.start).min(s.replacement.start);
        (1.0 - first as f64 / source_len).clamp(0.0, 1.0)
    }));

    let mut ordered: Vec<_> = subs.iter().collect();
    ordered.sort_by_key(|s| s.replaced.start);
    let overlap = mean(ordered.iter().zip(candidate.substituted_spans()).map(|(s, (cs, ce))| {
        let ours = flank(&cand_tokens, cs, ce);
        if ours.is_empty() {
            return 0.0;
        }
        let theirs = flank(&source_tokens, s.replacement.start, s.replacement.end);
        ours.intersection(&theirs).count() as f64 / ours.len() as f64
    }));

    FeatureVector(vec![grounded, is_original, coverage, log_freq, earliness, overlap])
}
