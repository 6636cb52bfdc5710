//! Shared helpers for integration tests: a random instance generator and an
//! independent brute-force candidate enumerator.

#![allow(dead_code)]

use std::collections::BTreeSet;

use entfix::{EntityLabel, EntityMention, Example};
use rand::seq::SliceRandom;
use rand::Rng;

const NAMES: &[(EntityLabel, &[&str])] = &[
    (EntityLabel::Person, &["Ada Byron", "Kurt Godel", "Emmy Noether", "Alan Turing", "Grace Hopper"]),
    (EntityLabel::Gpe, &["Vienna", "Paris", "Leeds", "Oslo", "Quito"]),
    (EntityLabel::Org, &["Acme Corp", "Globex", "Initech", "Umbrella", "Hooli"]),
];
const FILLER: &[&str] = &["the", "report", "said", "that", "on", "monday", "officials", "met", "in", "and"];

pub struct Instance {
    pub example: Example,
    pub source_mentions: Vec<EntityMention>,
    pub summary_mentions: Vec<EntityMention>,
    pub hallucinated: Vec<EntityMention>,
}

fn variant<R: Rng>(name: &str, rng: &mut R) -> String {
    match rng.gen_range(0..4) {
        0 => name.to_uppercase(),
        _ => name.to_string(),
    }
}

/// Builds text from filler words and typed names, returning the mentions.
fn compose<R: Rng>(rng: &mut R, parts: &[(EntityLabel, String)], fillers: usize) -> (String, Vec<EntityMention>) {
    let mut spans = Vec::new();
    let mut text = String::new();
    let mut order: Vec<Option<usize>> = (0..parts.len()).map(Some).collect();
    order.extend(std::iter::repeat_n(None, fillers));
    order.shuffle(rng);
    for slot in order {
        if !text.is_empty() {
            text.push(' ');
        }
        let start = text.chars().count();
        match slot {
            Some(i) => {
                text.push_str(&parts[i].1);
                spans.push((start, text.chars().count(), parts[i].0));
            }
            None => text.push_str(FILLER.choose(rng).unwrap()),
        }
    }
    text.push('.');
    let mentions = spans.into_iter().map(|(s, e, l)| EntityMention::from_text(&text, s, e, l).unwrap()).collect();
    (text, mentions)
}

/// A document/summary pair with up to three flagged summary mentions whose
/// same-label pools hold at most four distinct names each.
pub fn random_instance<R: Rng>(rng: &mut R) -> Instance {
    let mut src_parts = Vec::new();
    for (label, names) in NAMES {
        let k = rng.gen_range(0..=4);
        let chosen: Vec<&&str> = names.choose_multiple(rng, k).collect();
        for name in &chosen {
            for _ in 0..rng.gen_range(1..=2) {
                src_parts.push((*label, variant(name, rng)));
            }
        }
    }
    let fillers = rng.gen_range(3..10);
    let (document, source_mentions) = compose(rng, &src_parts, fillers);

    let n_flagged = rng.gen_range(1..=3);
    let mut sum_parts = Vec::new();
    for _ in 0..n_flagged + rng.gen_range(0..=1) {
        let (label, names) = NAMES.choose(rng).unwrap();
        sum_parts.push((*label, variant(names.choose(rng).unwrap(), rng)));
    }
    let fillers = rng.gen_range(1..6);
    let (summary, summary_mentions) = compose(rng, &sum_parts, fillers);
    let hallucinated = summary_mentions.choose_multiple(rng, n_flagged).cloned().collect();
    Instance { example: Example::new("x", document, summary), source_mentions, summary_mentions, hallucinated }
}

fn key(m: &EntityMention) -> String {
    m.surface.to_lowercase()
}

fn apply(summary: &str, edits: &[(&EntityMention, &EntityMention)]) -> String {
    let mut chars: Vec<char> = summary.chars().collect();
    let mut edits = edits.to_vec();
    edits.sort_by_key(|(t, _)| std::cmp::Reverse(t.start));
    for (t, r) in edits {
        chars.splice(t.start..t.end, r.surface.chars());
    }
    chars.into_iter().collect()
}

/// Every candidate text, enumerated directly: the original, each single
/// swap, and (with two or more targets, all with replacements) every joint
/// assignment.
pub fn brute_force(inst: &Instance) -> BTreeSet<String> {
    let summary = &inst.example.summary;
    let pools: Vec<(&EntityMention, Vec<&EntityMention>)> = inst
        .hallucinated
        .iter()
        .map(|t| {
            let mut seen = BTreeSet::new();
            let mut pool = Vec::new();
            let mut by_pos: Vec<&EntityMention> = inst.source_mentions.iter().collect();
            by_pos.sort_by_key(|m| m.start);
            for s in by_pos {
                if s.label == t.label && key(s) != key(t) && seen.insert(key(s)) {
                    pool.push(s);
                }
            }
            (t, pool)
        })
        .collect();

    let mut out = BTreeSet::from([summary.clone()]);
    for (t, pool) in &pools {
        for r in pool {
            out.insert(apply(summary, &[(t, r)]));
        }
    }
    if pools.len() >= 2 && pools.iter().all(|(_, p)| !p.is_empty()) {
        let mut combos: Vec<Vec<(&EntityMention, &EntityMention)>> = vec![vec![]];
        for (t, pool) in &pools {
            combos = combos
                .into_iter()
                .flat_map(|c| {
                    pool.iter().map(move |r| {
                        let mut c = c.clone();
                        c.push((*t, *r));
                        c
                    })
                })
                .collect();
        }
        for c in combos {
            out.insert(apply(summary, &c));
        }
    }
    out
}
