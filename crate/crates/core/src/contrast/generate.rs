use std::collections::HashSet;

use crate::corpus::Example;
use crate::ner::EntityMention;
use crate::text::splice;

use super::{CandidateSummary, Provenance, Substitution};

/// Same-label source mentions usable as replacements for `target`, one per
/// normalized form, in order of first occurrence in the source.
pub fn replacement_pool(source_mentions: &[EntityMention], target: &EntityMention) -> Vec<EntityMention> {
    let mut sorted: Vec<&EntityMention> = source_mentions.iter().collect();
    sorted.sort_by_key(|m| (m.start, m.end));
    let mut seen = HashSet::new();
    sorted
        .into_iter()
        .filter(|m| m.label == target.label && m.normalized != target.normalized)
        .filter(|m| seen.insert(m.normalized.as_str()))
        .cloned()
        .collect()
}

fn build(summary: &str, subs: Vec<Substitution>) -> CandidateSummary {
    let edits: Vec<(usize, usize, &str)> =
        subs.iter().map(|s| (s.replaced.start, s.replaced.end, s.replacement.surface.as_str())).collect();
    let text = splice(summary, &edits).expect("summary mentions are disjoint and in range");
    CandidateSummary { text, provenance: Provenance::Substitutions(subs), score: None }
}

/// Contrast candidates for one example.
///
/// The original summary always comes first. Then, for each hallucinated
/// mention left to right, one candidate per pool member. When two or more
/// mentions are hallucinated and every one has a non-empty pool, the full
/// cross product of assignments follows in lexicographic order. The result
/// is truncated to `max_candidates`.
pub fn generate_candidates(
    example: &Example,
    source_mentions: &[EntityMention],
    summary_mentions: &[EntityMention],
    hallucinated: &[EntityMention],
    max_candidates: usize,
) -> Vec<CandidateSummary> {
    debug_assert!(hallucinated.iter().all(|h| summary_mentions.contains(h)));
    let limit = max_candidates.max(1);
    let summary = example.summary.as_str();
    let mut out = vec![CandidateSummary::original(summary)];

    let mut targets: Vec<&EntityMention> = hallucinated.iter().collect();
    targets.sort_by_key(|m| m.start);
    let pools: Vec<Vec<EntityMention>> = targets.iter().map(|h| replacement_pool(source_mentions, h)).collect();

    for (h, pool) in targets.iter().zip(&pools) {
        for p in pool {
            if out.len() >= limit {
                return out;
            }
            out.push(build(summary, vec![Substitution { replaced: (*h).clone(), replacement: p.clone() }]));
        }
    }

    if targets.len() < 2 || pools.iter().any(Vec::is_empty) {
        return out;
    }
    let mut choice = vec![0usize; targets.len()];
    loop {
        if out.len() >= limit {
            return out;
        }
        let subs = targets
            .iter()
            .zip(&pools)
            .zip(&choice)
            .map(|((h, pool), &c)| Substitution { replaced: (*h).clone(), replacement: pool[c].clone() })
            .collect();
        out.push(build(summary, subs));

        // Odometer increment, rightmost mention fastest.
        let mut k = choice.len();
        loop {
            if k == 0 {
                return out;
            }
            k -= 1;
            choice[k] += 1;
            if choice[k] < pools[k].len() {
                break;
            }
            choice[k] = 0;
        }
    }
}
