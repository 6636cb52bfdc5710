use std::collections::HashMap;

use super::Prf;
use crate::text::tokenize;

fn ngram_counts(tokens: &[String], n: usize) -> HashMap<&[String], usize> {
    let mut counts = HashMap::new();
    if tokens.len() >= n {
        for gram in tokens.windows(n) {
            *counts.entry(gram).or_insert(0) += 1;
        }
    }
    counts
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// ROUGE-N over case-folded alphanumeric tokens with clipped n-gram counts.
///
/// # Panics
/// If `n` is 0.
pub fn rouge_n(candidate: &str, reference: &str, n: usize) -> Prf {
    assert!(n >= 1, "rouge_n needs n >= 1");
    let cand = tokenize(candidate);
    let refr = tokenize(reference);
    let c = ngram_counts(&cand, n);
    let r = ngram_counts(&refr, n);
    let matched: usize = c.iter().map(|(gram, &k)| k.min(r.get(gram).copied().unwrap_or(0))).sum();
    let cand_total = cand.len().saturating_sub(n - 1);
    let ref_total = refr.len().saturating_sub(n - 1);
    Prf::new(ratio(matched, cand_total), ratio(matched, ref_total))
}

fn lcs_len(a: &[String], b: &[String]) -> usize {
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for x in a {
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = if x == y { prev[j] + 1 } else { cur[j].max(prev[j + 1]) };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// ROUGE-L from the longest common subsequence of the whole token sequences.
pub fn rouge_l(candidate: &str, reference: &str) -> Prf {
    let cand = tokenize(candidate);
    let refr = tokenize(reference);
    let l = lcs_len(&cand, &refr);
    Prf::new(ratio(l, cand.len()), ratio(l, refr.len()))
}
