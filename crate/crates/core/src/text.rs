//! Character-offset helpers and tokenization shared by the pipeline.
//!
//! Every offset handled by this crate is a Unicode scalar index, never a byte
//! index. These helpers translate between the two at the edges.

use std::collections::HashSet;

/// Number of Unicode scalar values in `text`.
pub fn char_len(text: &str) -> usize {
    text.chars().count()
}

/// Byte offset of the `char_idx`-th scalar value; `text.len()` when
/// `char_idx` equals the character length.
pub fn byte_offset(text: &str, char_idx: usize) -> Option<usize> {
    if char_idx == 0 {
        return Some(0);
    }
    let mut count = 0;
    for (b, _) in text.char_indices() {
        if count == char_idx {
            return Some(b);
        }
        count += 1;
    }
    (count == char_idx).then_some(text.len())
}

/// Slice `text` by character range `[start, end)`.
pub fn char_slice(text: &str, start: usize, end: usize) -> Option<&str> {
    if start > end {
        return None;
    }
    let b0 = byte_offset(text, start)?;
    let b1 = byte_offset(text, end)?;
    Some(&text[b0..b1])
}

/// Maps byte offsets of a string onto char offsets.
pub(crate) struct OffsetMap {
    byte_to_char: Vec<usize>,
}

impl OffsetMap {
    pub(crate) fn new(text: &str) -> Self {
        let mut byte_to_char = vec![0; text.len() + 1];
        let mut ci = 0;
        for (b, c) in text.char_indices() {
            for slot in &mut byte_to_char[b..b + c.len_utf8()] {
                *slot = ci;
            }
            ci += 1;
        }
        byte_to_char[text.len()] = ci;
        Self { byte_to_char }
    }

    pub(crate) fn to_char(&self, byte: usize) -> usize {
        self.byte_to_char[byte]
    }
}

/// Replace char ranges with new strings. `edits` must be non-overlapping;
/// they are applied right to left so earlier offsets stay valid.
pub fn splice(text: &str, edits: &[(usize, usize, &str)]) -> Option<String> {
    let mut sorted: Vec<_> = edits.to_vec();
    sorted.sort_by_key(|e| std::cmp::Reverse(e.0));
    for pair in sorted.windows(2) {
        if pair[1].1 > pair[0].0 {
            return None;
        }
    }
    let mut out = text.to_string();
    for (start, end, replacement) in sorted {
        let b0 = byte_offset(text, start)?;
        let b1 = byte_offset(text, end)?;
        out.replace_range(b0..b1, replacement);
    }
    Some(out)
}

/// A lower-cased alphanumeric token with its char span in the owning text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub text: String,
    pub start: usize,
    pub end: usize,
}

/// Maximal alphanumeric runs, case-folded. This is the tokenization used by
/// ROUGE and by the ranker's overlap features.
pub fn word_tokens(text: &str) -> Vec<Token> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    let mut start = 0;
    let mut idx = 0;
    for c in text.chars() {
        if c.is_alphanumeric() {
            if current.is_empty() {
                start = idx;
            }
            current.extend(c.to_lowercase());
        } else if !current.is_empty() {
            tokens.push(Token { text: std::mem::take(&mut current), start, end: idx });
        }
        idx += 1;
    }
    if !current.is_empty() {
        tokens.push(Token { text: current, start, end: idx });
    }
    tokens
}

/// Token strings only.
pub fn tokenize(text: &str) -> Vec<String> {
    word_tokens(text).into_iter().map(|t| t.text).collect()
}

const STOPWORDS: &[&str] = &[
    "a", "an", "and", "are", "as", "at", "be", "been", "but", "by", "for", "from", "had", "has", "have", "he", "her",
    "his", "in", "is", "it", "its", "of", "on", "or", "s", "she", "that", "the", "their", "they", "this", "to", "was",
    "were", "which", "who", "will", "with",
];

pub fn is_stopword(token: &str) -> bool {
    STOPWORDS.contains(&token)
}

pub fn token_set(text: &str) -> HashSet<String> {
    tokenize(text).into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn char_slice_handles_multibyte() {
        let text = "£5.03bn oil";
        assert_eq!(char_slice(text, 0, 7), Some("£5.03bn"));
        assert_eq!(char_slice(text, 8, 11), Some("oil"));
        assert_eq!(char_slice(text, 8, 12), None);
    }

    #[test]
    fn offset_map_agrees_with_char_indices() {
        let text = "é£ab";
        let map = OffsetMap::new(text);
        assert_eq!(map.to_char(0), 0);
        assert_eq!(map.to_char(2), 1);
        assert_eq!(map.to_char(4), 2);
        assert_eq!(map.to_char(text.len()), 4);
    }

    #[test]
    fn splice_right_to_left() {
        let out = splice("ab cd ef", &[(0, 2, "XYZ"), (6, 8, "Q")]).unwrap();
        assert_eq!(out, "XYZ cd Q");
        assert!(splice("abcdef", &[(0, 3, "x"), (2, 4, "y")]).is_none());
    }

    #[test]
    fn word_tokens_fold_case() {
        let toks = word_tokens("The Cat, sat!");
        let texts: Vec<_> = toks.iter().map(|t| t.text.as_str()).collect();
        assert_eq!(texts, ["the", "cat", "sat"]);
        assert_eq!((toks[1].start, toks[1].end), (4, 7));
    }
}
