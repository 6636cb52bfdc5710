//! Typed entity and quantity mentions.
//!
//! The built-in recognizer is deterministic: numeric and calendar mentions
//! come from pattern rules, names come only from gazetteers. Capitalized
//! text that no gazetteer lists is left unlabeled. An external recognizer
//! can be attached over the line protocol in [`external`].

use std::collections::{BTreeSet, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::text::{char_slice, OffsetMap};
use crate::wire::WireError;

pub mod external;
mod label;
mod normalize;
mod rules;

pub use external::ExternalRecognizer;
pub use label::{EntityLabel, UnknownLabel};
pub use normalize::{normalize, numeric_values};

#[derive(Debug, Error)]
pub enum NerError {
    #[error(transparent)]
    External(#[from] WireError),
    #[error("gazetteer {path}: {detail}")]
    Gazetteer { path: String, detail: String },
}

/// A labeled span of some owning text. Offsets are char indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EntityMention {
    pub start: usize,
    pub end: usize,
    pub surface: String,
    pub label: EntityLabel,
    pub normalized: String,
}

impl EntityMention {
    /// Build a mention over `text[start..end)`; `None` if the range is empty
    /// or out of bounds.
    pub fn from_text(text: &str, start: usize, end: usize, label: EntityLabel) -> Option<Self> {
        if start >= end {
            return None;
        }
        let surface = char_slice(text, start, end)?.to_string();
        let normalized = normalize(&surface, label);
        Some(Self { start, end, surface, label, normalized })
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }

    pub fn overlaps(&self, other: &EntityMention) -> bool {
        self.start < other.end && other.start < self.end
    }

    /// Checks the offset and surface invariants against `text`.
    pub fn is_valid_for(&self, text: &str) -> bool {
        self.start < self.end && char_slice(text, self.start, self.end) == Some(self.surface.as_str())
    }
}

/// Known names for one label. Entries are stored normalized.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gazetteer {
    pub label: EntityLabel,
    pub entries: BTreeSet<String>,
}

impl Gazetteer {
    pub fn new<I, S>(label: EntityLabel, names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let entries = names.into_iter().map(|n| normalize(n.as_ref(), label)).filter(|n| !n.is_empty()).collect();
        Self { label, entries }
    }

    /// Read a tab-separated file of `LABEL<TAB>name` lines, one gazetteer per
    /// label in first-seen order. Blank lines and `#` comments are skipped.
    pub fn load_tsv(path: impl AsRef<Path>) -> Result<Vec<Gazetteer>, NerError> {
        let path = path.as_ref();
        let err = |detail: String| NerError::Gazetteer { path: path.display().to_string(), detail };
        let raw = std::fs::read_to_string(path).map_err(|e| err(e.to_string()))?;
        let mut order: Vec<EntityLabel> = Vec::new();
        let mut names: HashMap<EntityLabel, Vec<String>> = HashMap::new();
        for (i, line) in raw.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (label, name) =
                line.split_once('\t').ok_or_else(|| err(format!("line {}: expected LABEL<TAB>name", i + 1)))?;
            let label: EntityLabel =
                label.trim().parse().map_err(|e: UnknownLabel| err(format!("line {}: {e}", i + 1)))?;
            if !names.contains_key(&label) {
                order.push(label);
            }
            names.entry(label).or_default().push(name.trim().to_string());
        }
        Ok(order.into_iter().map(|label| Gazetteer::new(label, &names[&label])).collect())
    }
}

/// Anything that turns text into sorted, non-overlapping mentions.
pub trait Recognizer: Send + Sync {
    fn recognize(&self, text: &str) -> Result<Vec<EntityMention>, NerError>;
}

/// Rules plus gazetteer lookup, with the gazetteer index built once.
#[derive(Debug, Clone, Default)]
pub struct BuiltinRecognizer {
    index: HashMap<String, EntityLabel>,
    max_tokens: usize,
}

impl BuiltinRecognizer {
    pub fn new(gazetteers: &[Gazetteer]) -> Self {
        let mut index = HashMap::new();
        let mut max_tokens = 0;
        for g in gazetteers {
            for entry in &g.entries {
                max_tokens = max_tokens.max(entry.split(' ').count());
                index.entry(entry.clone()).or_insert(g.label);
            }
        }
        Self { index, max_tokens }
    }

    pub fn recognize_text(&self, text: &str) -> Vec<EntityMention> {
        let mut found = rule_matches(text);
        found.extend(self.gazetteer_matches(text));
        resolve(text, found)
    }

    fn gazetteer_matches(&self, text: &str) -> Vec<Candidate> {
        if self.index.is_empty() {
            return Vec::new();
        }
        let chars: Vec<char> = text.chars().collect();
        let chunks = chunks(&chars);
        let mut out = Vec::new();
        for i in 0..chunks.len() {
            for j in i..chunks.len().min(i + self.max_tokens) {
                let (start, end) = (chunks[i].0, chunks[j].1);
                let phrase: String = chars[start..end].iter().collect::<String>().to_lowercase();
                let phrase = phrase.split_whitespace().collect::<Vec<_>>().join(" ");
                if let Some(label) = self.index.get(&phrase) {
                    out.push(Candidate::gazetteer(start, end, *label));
                }
                for suffix in ["'s", "’s"] {
                    if let Some(stem) = phrase.strip_suffix(suffix) {
                        if let Some(label) = self.index.get(stem) {
                            out.push(Candidate::gazetteer(start, end - 2, *label));
                        }
                    }
                }
            }
        }
        out
    }
}

impl Recognizer for BuiltinRecognizer {
    fn recognize(&self, text: &str) -> Result<Vec<EntityMention>, NerError> {
        Ok(self.recognize_text(text))
    }
}

/// Run the built-in recognizer with the given gazetteers.
pub fn recognize(text: &str, gazetteers: &[Gazetteer]) -> Vec<EntityMention> {
    BuiltinRecognizer::new(gazetteers).recognize_text(text)
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    start: usize,
    end: usize,
    label: EntityLabel,
    rank: u8,
}

impl Candidate {
    fn gazetteer(start: usize, end: usize, label: EntityLabel) -> Self {
        Self { start, end, label, rank: rules::precedence(None) }
    }

    fn strictly_inside(&self, other: &Candidate) -> bool {
        other.start <= self.start && self.end <= other.end && other.end - other.start > self.end - self.start
    }
}

/// Whitespace-delimited chunks with edge punctuation trimmed, as char ranges.
fn chunks(chars: &[char]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        if chars[i].is_whitespace() {
            i += 1;
            continue;
        }
        let begin = i;
        while i < chars.len() && !chars[i].is_whitespace() {
            i += 1;
        }
        let (mut s, mut e) = (begin, i);
        while s < e && !chars[s].is_alphanumeric() {
            s += 1;
        }
        while e > s && !chars[e - 1].is_alphanumeric() {
            e -= 1;
        }
        if s < e {
            out.push((s, e));
        }
    }
    out
}

fn rule_matches(text: &str) -> Vec<Candidate> {
    let map = OffsetMap::new(text);
    let mut out = Vec::new();
    for rule in rules::RULES.iter() {
        for m in rule.pattern.find_iter(text) {
            out.push(Candidate {
                start: map.to_char(m.start()),
                end: map.to_char(m.end()),
                label: rule.label,
                rank: rules::precedence(Some(rule.label)),
            });
        }
    }
    out
}

/// Drop every candidate strictly contained in another, then keep the longest
/// remaining candidates greedily, breaking length ties by rank.
fn resolve(text: &str, candidates: Vec<Candidate>) -> Vec<EntityMention> {
    let mut kept: Vec<Candidate> = candidates
        .iter()
        .filter(|c| c.start < c.end && !candidates.iter().any(|o| c.strictly_inside(o)))
        .copied()
        .collect();
    kept.sort_by_key(|c| (std::cmp::Reverse(c.end - c.start), c.rank, c.start));
    let mut chosen: Vec<Candidate> = Vec::new();
    for c in kept {
        if chosen.iter().all(|o| c.end <= o.start || o.end <= c.start) {
            chosen.push(c);
        }
    }
    chosen.sort_by_key(|c| c.start);
    chosen.into_iter().filter_map(|c| EntityMention::from_text(text, c.start, c.end, c.label)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn spans(ms: &[EntityMention]) -> Vec<(&str, EntityLabel)> {
        ms.iter().map(|m| (m.surface.as_str(), m.label)).collect()
    }

    #[test]
    fn day_month_year_is_one_date() {
        let ms = recognize("on 21 June 2011, with effect", &[]);
        assert_eq!(spans(&ms), [("21 June 2011", EntityLabel::Date)]);
        assert_eq!((ms[0].start, ms[0].end), (3, 15));
    }

    #[test]
    fn empty_text() {
        assert!(recognize("", &[]).is_empty());
    }

    #[test]
    fn two_currencies_in_parentheses() {
        let ms = recognize("the $9.6bn (£5.03bn) oil spill", &[]);
        assert_eq!(spans(&ms), [("$9.6bn", EntityLabel::Money), ("£5.03bn", EntityLabel::Money)]);
    }

    #[test]
    fn ordinal_word_and_year() {
        let ms = recognize("elected for a second term in 2007", &[]);
        assert_eq!(spans(&ms), [("second", EntityLabel::Ordinal), ("2007", EntityLabel::Date)]);
    }

    #[test]
    fn percent_time_quantity_cardinal() {
        let ms = recognize("Shares rose 5 per cent at 10:30 am after 3 km and 87 votes", &[]);
        assert_eq!(
            spans(&ms),
            [
                ("5 per cent", EntityLabel::Percent),
                ("10:30 am", EntityLabel::Time),
                ("3 km", EntityLabel::Quantity),
                ("87", EntityLabel::Cardinal),
            ]
        );
    }

    #[test]
    fn unknown_capitalized_names_are_skipped() {
        assert!(recognize("Tranmere Rovers have signed Mooney", &[]).is_empty());
    }

    #[test]
    fn gazetteer_names_and_possessives() {
        let gaz = vec![
            Gazetteer::new(EntityLabel::Org, ["Tranmere Rovers", "The United Nations"]),
            Gazetteer::new(EntityLabel::Person, ["Mooney", "Ban Ki-moon"]),
        ];
        let text = "Tranmere Rovers signed Mooney's brother; The United Nations chief Ban Ki-moon spoke.";
        let ms = recognize(text, &gaz);
        assert_eq!(
            spans(&ms),
            [
                ("Tranmere Rovers", EntityLabel::Org),
                ("Mooney", EntityLabel::Person),
                ("United Nations", EntityLabel::Org),
                ("Ban Ki-moon", EntityLabel::Person),
            ]
        );
        assert_eq!(ms[2].normalized, "united nations");
    }

    #[test]
    fn gazetteer_span_containing_a_number_wins() {
        let gaz = vec![Gazetteer::new(EntityLabel::Product, ["Apollo 11"])];
        let ms = recognize("the Apollo 11 mission", &gaz);
        assert_eq!(spans(&ms), [("Apollo 11", EntityLabel::Product)]);
    }

    #[test]
    fn tsv_gazetteer_loading() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("g.tsv");
        std::fs::write(&p, "# names\nPERSON\tJohn Smith\nORG\tBBC\nPERSON\tMooney\n").unwrap();
        let gaz = Gazetteer::load_tsv(&p).unwrap();
        assert_eq!(gaz.len(), 2);
        assert_eq!(gaz[0].label, EntityLabel::Person);
        assert!(gaz[0].entries.contains("john smith"));
        std::fs::write(&p, "MISC\tthing\n").unwrap();
        assert!(Gazetteer::load_tsv(&p).is_err());
    }

    fn prose() -> impl Strategy<Value = String> {
        let words = proptest::sample::select(vec![
            "the",
            "on",
            "21",
            "June",
            "2011",
            "$9.6bn",
            "(£5.03bn)",
            "second",
            "per",
            "cent",
            "5%",
            "10:30",
            "pm",
            "km",
            "3",
            "million",
            "first",
            "Monday",
            "1,200",
            "two",
            "hundred",
            "é",
            "Smith",
            "John",
            ",",
            "in",
            "2007",
            "May",
            "4th",
        ]);
        proptest::collection::vec(words, 0..14).prop_map(|w| w.join(" "))
    }

    proptest! {
        #[test]
        fn mentions_are_sorted_disjoint_and_faithful(text in prose()) {
            let gaz = vec![Gazetteer::new(EntityLabel::Person, ["John Smith", "Smith"])];
            let ms = recognize(&text, &gaz);
            for m in &ms {
                prop_assert!(m.is_valid_for(&text));
                prop_assert_eq!(&m.normalized, &normalize(&m.surface, m.label));
            }
            for pair in ms.windows(2) {
                prop_assert!(pair[0].end <= pair[1].start);
            }
            prop_assert_eq!(recognize(&text, &gaz), ms);
        }

        #[test]
        fn rule_mentions_are_never_strictly_inside_a_rule_match(text in prose()) {
            let all = rule_matches(&text);
            for m in recognize(&text, &[]) {
                let inside = all.iter().any(|o| {
                    o.start <= m.start && m.end <= o.end && (o.end - o.start) > m.len()
                });
                prop_assert!(!inside, "{:?} inside another match in {:?}", m, text);
            }
        }
    }
}
