//! Pattern rules for numeric and calendar mentions.

use std::sync::LazyLock;

use regex::Regex;

use super::EntityLabel;

const NUM: &str = r"(?:\d{1,3}(?:,\d{3})+(?:\.\d+)?|\d+(?:\.\d+)?)";
const MONTHS_FULL: &str = "January|February|March|April|May|June|July|August|September|October|November|December";
const MONTHS_ANY: &str = "January|February|March|April|May|June|July|August|September|October|November|December|Jan|Feb|Mar|Apr|Jun|Jul|Aug|Sept|Sep|Oct|Nov|Dec";
const WEEKDAYS: &str = "Monday|Tuesday|Wednesday|Thursday|Friday|Saturday|Sunday";
const SCALE_WORDS: &str = "bn|billion|m|million|k|thousand|tn|trillion";
const UNITS: &str = "km|kilometres?|kilometers?|miles?|metres?|meters?|cm|mm|kg|kilograms?|grams?|tonnes?|tons?|lbs?|feet|foot|ft|inches|inch|litres?|liters?|gallons?|mph|km/h|acres?|hectares?|degrees?|sq km|square miles|square metres";
const NUMBER_WORDS: &str = "one|two|three|four|five|six|seven|eight|nine|ten|eleven|twelve|thirteen|fourteen|fifteen|sixteen|seventeen|eighteen|nineteen|twenty|thirty|forty|fifty|sixty|seventy|eighty|ninety|hundred|thousand|million|billion|dozen";

/// Rank used to break ties between equally long matches; lower wins.
pub(crate) fn precedence(label: Option<EntityLabel>) -> u8 {
    match label {
        Some(EntityLabel::Money) => 0,
        Some(EntityLabel::Percent) => 1,
        Some(EntityLabel::Date) => 2,
        Some(EntityLabel::Time) => 3,
        Some(EntityLabel::Quantity) => 4,
        Some(EntityLabel::Ordinal) => 5,
        Some(EntityLabel::Cardinal) => 6,
        // Gazetteer matches carry their own label but always rank last.
        _ => 7,
    }
}

pub(crate) struct Rule {
    pub label: EntityLabel,
    pub pattern: Regex,
}

fn rule(label: EntityLabel, pattern: String) -> Rule {
    Rule { label, pattern: Regex::new(&pattern).unwrap_or_else(|e| panic!("bad {label} rule: {e}")) }
}

pub(crate) static RULES: LazyLock<Vec<Rule>> = LazyLock::new(|| {
    use EntityLabel::*;
    vec![
        rule(Money, format!(r"(?:[$£€¥]|\b(?:US\$|USD|GBP|EUR|JPY)\s?){NUM}(?:\s?(?i:{SCALE_WORDS})\b)?")),
        rule(Money, format!(r"\b{NUM}(?:\s?(?i:{SCALE_WORDS}))?\s(?i:dollars|pounds|euros|pence|yen)\b")),
        rule(Money, format!(r"\b{NUM}(?:\s?(?i:{SCALE_WORDS}))?\s(?:USD|GBP|EUR|JPY)\b")),
        rule(Percent, format!(r"\b{NUM}\s?(?:%|(?i:per\s?cent|percent)\b)")),
        rule(Date, format!(r"\b\d{{1,2}}(?:st|nd|rd|th)?\s+(?:{MONTHS_ANY})\b(?:\.?,?\s+[12]\d{{3}}\b)?")),
        rule(Date, format!(r"\b(?:{MONTHS_ANY})\.?\s+\d{{1,2}}(?:st|nd|rd|th)?\b(?:,?\s+[12]\d{{3}}\b)?")),
        rule(Date, format!(r"\b(?:{MONTHS_FULL})\s+[12]\d{{3}}\b")),
        rule(Date, r"\b[12]\d{3}s?\b".to_string()),
        rule(Date, format!(r"\b(?:{MONTHS_FULL}|{WEEKDAYS})\b")),
        rule(Time, r"\b\d{1,2}:\d{2}(?:\s?(?i:[ap]m\b|[ap]\.m\.))?".to_string()),
        rule(Time, r"\b\d{1,2}\s?(?i:[ap]m\b|[ap]\.m\.)".to_string()),
        rule(Quantity, format!(r"\b{NUM}\s?(?i:{UNITS})\b")),
        rule(Ordinal, r"\b\d+(?:st|nd|rd|th)\b".to_string()),
        rule(Ordinal, r"\b(?i:first|second|third|fourth|fifth|sixth|seventh|eighth|ninth|tenth)\b".to_string()),
        rule(Cardinal, format!(r"\b{NUM}(?:\s?(?i:bn|billion|million|thousand|trillion)|(?i:bn|m|k))?\b")),
        rule(Cardinal, format!(r"\b(?i:(?:{NUMBER_WORDS})(?:[\s-]+(?:{NUMBER_WORDS}))*)\b")),
    ]
});
