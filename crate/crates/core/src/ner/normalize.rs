//! Surface-form normalization and numeric value extraction.

use std::sync::LazyLock;

use regex::Regex;

use super::EntityLabel;

static NUMBER_TOKEN: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"^(?P<cur>[$£€¥])?(?P<num>[0-9][0-9,]*(?:\.[0-9]+)?)(?P<suf>bn|tn|m|k)?(?P<pct>%)?$").unwrap()
});

static VALUE_TOKEN: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"^(?P<cur>[$£€¥])?(?P<num>[0-9][0-9,]*(?:\.[0-9]+)?)(?:st|nd|rd|th)?(?P<pct>%)?$").unwrap()
});

static CLOCK_TOKEN: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^[0-9]{1,2}:[0-9]{2}$").unwrap());

fn is_currency(c: char) -> bool {
    matches!(c, '$' | '£' | '€' | '¥')
}

fn is_edge_junk(c: char) -> bool {
    !(c.is_alphanumeric() || is_currency(c) || c == '%')
}

fn strip_edges(s: &str) -> String {
    let mut cur = s.to_string();
    loop {
        let trimmed = cur.trim_matches(is_edge_junk);
        let next = match trimmed.strip_prefix("the ") {
            Some(rest) if !rest.trim().is_empty() => rest,
            _ => trimmed,
        };
        if next == cur {
            return cur;
        }
        cur = next.to_string();
    }
}

/// Canonical form of a surface string for the given label.
///
/// Case-folds, collapses whitespace, strips a leading "the" and trims
/// punctuation at both ends. For money, percent, quantity, cardinal and
/// ordinal mentions, numbers are rewritten without separators and with scale
/// words expanded, so "$9.6bn" becomes "$9600000000". Idempotent.
pub fn normalize(surface: &str, label: EntityLabel) -> String {
    let folded = surface.to_lowercase();
    let collapsed = folded.split_whitespace().collect::<Vec<_>>().join(" ");
    let mut out = strip_edges(&collapsed);
    if rewrites_numbers(label) {
        out = strip_edges(&canonicalize_numbers(&out, label));
    }
    out
}

fn rewrites_numbers(label: EntityLabel) -> bool {
    matches!(
        label,
        EntityLabel::Money
            | EntityLabel::Percent
            | EntityLabel::Quantity
            | EntityLabel::Cardinal
            | EntityLabel::Ordinal
    )
}

fn scale_word(token: &str, label: EntityLabel) -> Option<u32> {
    match token {
        "thousand" => Some(3),
        "million" => Some(6),
        "billion" | "bn" => Some(9),
        "trillion" | "tn" => Some(12),
        "m" if label == EntityLabel::Money => Some(6),
        "k" if label == EntityLabel::Money => Some(3),
        _ => None,
    }
}

fn attached_scale(suffix: &str, label: EntityLabel) -> Option<u32> {
    if !matches!(label, EntityLabel::Money | EntityLabel::Cardinal) {
        return None;
    }
    match suffix {
        "k" => Some(3),
        "m" => Some(6),
        "bn" => Some(9),
        "tn" => Some(12),
        _ => None,
    }
}

fn canonicalize_numbers(s: &str, label: EntityLabel) -> String {
    let tokens: Vec<&str> = s.split(' ').collect();
    let mut out: Vec<String> = Vec::with_capacity(tokens.len());
    let mut i = 0;
    while i < tokens.len() {
        let tok = tokens[i];
        i += 1;
        let Some(caps) = NUMBER_TOKEN.captures(tok) else {
            out.push(tok.to_string());
            continue;
        };
        let mut exponent = 0;
        if let Some(suf) = caps.name("suf") {
            match attached_scale(suf.as_str(), label) {
                Some(e) => exponent += e,
                None => {
                    out.push(tok.to_string());
                    continue;
                }
            }
        }
        let mut percent = caps.name("pct").is_some();
        if !percent {
            while let Some(e) = tokens.get(i).and_then(|t| scale_word(t, label)) {
                exponent += e;
                i += 1;
            }
            match (tokens.get(i).copied(), tokens.get(i + 1).copied()) {
                (Some("per"), Some("cent")) => {
                    percent = true;
                    i += 2;
                }
                (Some("percent" | "%"), _) => {
                    percent = true;
                    i += 1;
                }
                _ => {}
            }
        }
        let mut rendered = String::new();
        if let Some(cur) = caps.name("cur") {
            rendered.push_str(cur.as_str());
        }
        rendered.push_str(&canonical_decimal(&caps["num"], exponent));
        if percent {
            rendered.push('%');
        }
        out.push(rendered);
    }
    out.join(" ")
}

/// Render `digits` (ASCII, optional commas and one decimal point) times
/// 10^exponent without floating point.
fn canonical_decimal(digits: &str, exponent: u32) -> String {
    let cleaned: String = digits.chars().filter(|c| *c != ',').collect();
    let (int_part, frac_part) = cleaned.split_once('.').unwrap_or((cleaned.as_str(), ""));
    let mut all: String = format!("{int_part}{frac_part}");
    let point = int_part.len() + exponent as usize;
    while all.len() < point {
        all.push('0');
    }
    let (int_digits, frac_digits) = all.split_at(point);
    let int_digits = int_digits.trim_start_matches('0');
    let frac_digits = frac_digits.trim_end_matches('0');
    let int_digits = if int_digits.is_empty() { "0" } else { int_digits };
    if frac_digits.is_empty() {
        int_digits.to_string()
    } else {
        format!("{int_digits}.{frac_digits}")
    }
}

const MONTHS: [(&str, &str); 12] = [
    ("january", "jan"),
    ("february", "feb"),
    ("march", "mar"),
    ("april", "apr"),
    ("may", "may"),
    ("june", "jun"),
    ("july", "jul"),
    ("august", "aug"),
    ("september", "sep"),
    ("october", "oct"),
    ("november", "nov"),
    ("december", "dec"),
];

const WEEKDAYS: [&str; 7] = ["monday", "tuesday", "wednesday", "thursday", "friday", "saturday", "sunday"];

const NUMBER_WORDS: [&str; 21] = [
    "zero",
    "one",
    "two",
    "three",
    "four",
    "five",
    "six",
    "seven",
    "eight",
    "nine",
    "ten",
    "eleven",
    "twelve",
    "thirteen",
    "fourteen",
    "fifteen",
    "sixteen",
    "seventeen",
    "eighteen",
    "nineteen",
    "twenty",
];

const TENS: [(&str, u32); 7] =
    [("thirty", 30), ("forty", 40), ("fifty", 50), ("sixty", 60), ("seventy", 70), ("eighty", 80), ("ninety", 90)];

const ORDINAL_WORDS: [&str; 10] =
    ["first", "second", "third", "fourth", "fifth", "sixth", "seventh", "eighth", "ninth", "tenth"];

fn word_value(token: &str) -> Option<String> {
    if let Some(i) =
        MONTHS.iter().position(|(full, short)| token == *full || token == *short || token == "sept" && *short == "sep")
    {
        return Some(format!("month:{}", i + 1));
    }
    if let Some(i) = WEEKDAYS.iter().position(|d| *d == token) {
        return Some(format!("weekday:{}", i + 1));
    }
    if let Some(i) = NUMBER_WORDS.iter().position(|w| *w == token) {
        return Some(i.to_string());
    }
    if let Some((_, v)) = TENS.iter().find(|(w, _)| *w == token) {
        return Some(v.to_string());
    }
    if let Some(i) = ORDINAL_WORDS.iter().position(|w| *w == token) {
        return Some((i + 1).to_string());
    }
    None
}

/// Canonical numeric and calendar values carried by a normalized mention,
/// e.g. "21 june 2011" yields `["21", "month:6", "2011"]`.
pub fn numeric_values(normalized: &str, label: EntityLabel) -> Vec<String> {
    let mut values = Vec::new();
    for raw in normalized.split_whitespace() {
        let tok = raw.trim_matches(is_edge_junk);
        if tok.is_empty() {
            continue;
        }
        let tok = if rewrites_numbers(label) { tok.to_string() } else { canonicalize_numbers(tok, label) };
        if let Some(caps) = VALUE_TOKEN.captures(&tok) {
            let mut v = String::new();
            if let Some(cur) = caps.name("cur") {
                v.push_str(cur.as_str());
            }
            v.push_str(&canonical_decimal(&caps["num"], 0));
            if caps.name("pct").is_some() {
                v.push('%');
            }
            values.push(v);
        } else if CLOCK_TOKEN.is_match(&tok) {
            values.push(tok.trim_start_matches('0').to_string());
        } else if let Some(v) = word_value(&tok) {
            values.push(v);
        }
    }
    values
}
