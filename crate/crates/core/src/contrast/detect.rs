//! Extrinsic hallucination detection over entity mentions.
//!
//! A summary mention counts as grounded when any of these holds:
//!
//! (a) its normalized form, or its case-folded surface, occurs in the
//!     case-folded source text;
//! (b) for name-like labels, its normalized token set is a subset or superset
//!     of some source mention's token set ("Smith" vs "John Smith");
//! (c) for numeric labels, all of its numeric values appear among the values
//!     of a single numeric source mention ("2011" vs "21 June 2011").

use std::collections::HashSet;

use regex::RegexBuilder;

use crate::ner::{numeric_values, EntityMention};
use crate::text::OffsetMap;

/// Pre-folded view of a source document and its mentions.
pub struct SourceIndex<'a> {
    text: &'a str,
    folded: String,
    mentions: &'a [EntityMention],
    token_sets: Vec<HashSet<&'a str>>,
    values: Vec<Option<HashSet<String>>>,
}

impl<'a> SourceIndex<'a> {
    pub fn new(text: &'a str, mentions: &'a [EntityMention]) -> Self {
        let folded = fold(text);
        let token_sets = mentions.iter().map(|m| m.normalized.split_whitespace().collect()).collect();
        let values = mentions
            .iter()
            .map(|m| m.label.is_numeric().then(|| numeric_values(&m.normalized, m.label).into_iter().collect()))
            .collect();
        Self { text, folded, mentions, token_sets, values }
    }

    pub fn mentions(&self) -> &'a [EntityMention] {
        self.mentions
    }

    fn appears_in_text(&self, m: &EntityMention) -> bool {
        self.folded.contains(m.normalized.as_str()) || self.folded.contains(&fold(&m.surface))
    }

    /// Index of the first source mention grounding `m` by rule (b) or (c).
    fn matching_mention(&self, m: &EntityMention) -> Option<usize> {
        if m.label.is_name_like() {
            let tokens: HashSet<&str> = m.normalized.split_whitespace().collect();
            if tokens.is_empty() {
                return None;
            }
            self.token_sets.iter().position(|s| !s.is_empty() && (tokens.is_subset(s) || s.is_subset(&tokens)))
        } else {
            let wanted: HashSet<String> = numeric_values(&m.normalized, m.label).into_iter().collect();
            if wanted.is_empty() {
                return None;
            }
            self.values.iter().position(|v| v.as_ref().is_some_and(|v| wanted.is_subset(v)))
        }
    }

    pub fn is_grounded(&self, m: &EntityMention) -> bool {
        self.appears_in_text(m) || self.matching_mention(m).is_some()
    }

    /// Whether source mention `s` would ground summary mention `m` on its own.
    pub fn mention_grounds(&self, m: &EntityMention, s: &EntityMention) -> bool {
        if m.normalized == s.normalized {
            return true;
        }
        if m.label.is_name_like() {
            let a: HashSet<&str> = m.normalized.split_whitespace().collect();
            let b: HashSet<&str> = s.normalized.split_whitespace().collect();
            !a.is_empty() && !b.is_empty() && (a.is_subset(&b) || b.is_subset(&a))
        } else if s.label.is_numeric() {
            let a: HashSet<String> = numeric_values(&m.normalized, m.label).into_iter().collect();
            let b: HashSet<String> = numeric_values(&s.normalized, s.label).into_iter().collect();
            !a.is_empty() && a.is_subset(&b)
        } else {
            false
        }
    }

    /// The source mention a grounded summary mention refers to: a same-label
    /// mention with equal normalized form, else the first mention matching
    /// under (b)/(c) (same label preferred), else the first case-insensitive
    /// occurrence of its surface in the source.
    pub fn grounding(&self, m: &EntityMention) -> Option<EntityMention> {
        if let Some(s) = self.mentions.iter().find(|s| s.label == m.label && s.normalized == m.normalized) {
            return Some(s.clone());
        }
        if let Some(s) = self.mentions.iter().find(|s| s.label == m.label && self.mention_grounds(m, s)) {
            return Some(s.clone());
        }
        if let Some(i) = self.matching_mention(m) {
            return Some(self.mentions[i].clone());
        }
        let re = RegexBuilder::new(&regex::escape(&m.surface)).case_insensitive(true).build().ok()?;
        let hit = re.find(self.text)?;
        let map = OffsetMap::new(self.text);
        EntityMention::from_text(self.text, map.to_char(hit.start()), map.to_char(hit.end()), m.label)
    }
}

fn fold(s: &str) -> String {
    s.to_lowercase().split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Summary mentions with no similar counterpart in the source.
pub fn find_hallucinated(
    source: &str,
    source_mentions: &[EntityMention],
    summary_mentions: &[EntityMention],
) -> Vec<EntityMention> {
    let index = SourceIndex::new(source, source_mentions);
    summary_mentions.iter().filter(|m| !index.is_grounded(m)).cloned().collect()
}

/// Convenience wrapper around [`SourceIndex::grounding`].
pub fn grounding_mention(
    source: &str,
    source_mentions: &[EntityMention],
    mention: &EntityMention,
) -> Option<EntityMention> {
    SourceIndex::new(source, source_mentions).grounding(mention)
}
