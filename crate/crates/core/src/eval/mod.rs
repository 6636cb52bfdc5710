//! ROUGE, identification precision/recall, outcome buckets and bootstrap
//! confidence intervals.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::select::{Bucket, SelectionOutcome};

mod report;
mod rouge;

pub use report::{build_report, BootstrapSettings, EvalReport, MeanPrf, ReportInputs};
pub use rouge::{rouge_l, rouge_n};

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("confusion counts are all zero")]
    AllZeroCounts,
    #[error("no gold flag for example {0:?}")]
    MissingGoldFlag(String),
    #[error("no outcomes to evaluate")]
    EmptyOutcomes,
    #[error("no labels to resample")]
    EmptyLabels,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl Prf {
    /// Harmonic-mean F1; 0 when both inputs are 0.
    pub fn new(precision: f64, recall: f64) -> Self {
        let f1 = if precision + recall > 0.0 { 2.0 * precision * recall / (precision + recall) } else { 0.0 };
        Self { precision, recall, f1 }
    }
}

pub fn prf_from_confusion(tp: u64, fp: u64, fn_: u64) -> Result<Prf, EvalError> {
    if tp + fp + fn_ == 0 {
        return Err(EvalError::AllZeroCounts);
    }
    let div = |a: u64, b: u64| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    Ok(Prf::new(div(tp, tp + fp), div(tp, tp + fn_)))
}

/// How an outcome counts as "flagged as hallucinated".
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IdentificationMode {
    /// The system changed the summary.
    Changed,
    /// The original summary scored below the threshold. An outcome without
    /// scores never counts as flagged.
    Threshold(f64),
}

impl IdentificationMode {
    pub fn predicts(&self, outcome: &SelectionOutcome) -> bool {
        match *self {
            Self::Changed => outcome.bucket == Bucket::Changed,
            Self::Threshold(t) => outcome.original_score().is_some_and(|s| s < t),
        }
    }
}

/// Per-outcome (predicted, gold) pairs in outcome order.
pub fn identification_labels(
    outcomes: &[SelectionOutcome],
    gold_flags: &HashMap<String, bool>,
    mode: IdentificationMode,
) -> Result<Vec<(bool, bool)>, EvalError> {
    outcomes
        .iter()
        .map(|o| {
            let gold =
                *gold_flags.get(&o.example_id).ok_or_else(|| EvalError::MissingGoldFlag(o.example_id.clone()))?;
            Ok((mode.predicts(o), gold))
        })
        .collect()
}

pub fn identification_eval(
    outcomes: &[SelectionOutcome],
    gold_flags: &HashMap<String, bool>,
    mode: IdentificationMode,
) -> Result<Prf, EvalError> {
    let (mut tp, mut fp, mut fn_) = (0, 0, 0);
    for (pred, gold) in identification_labels(outcomes, gold_flags, mode)? {
        match (pred, gold) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            (false, false) => {}
        }
    }
    if tp + fp + fn_ == 0 {
        // Every prediction and gold flag negative: nothing to find, nothing missed.
        return Ok(Prf::new(1.0, 1.0));
    }
    prf_from_confusion(tp, fp, fn_)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BucketFractions {
    pub changed: f64,
    pub kept: f64,
    pub none: f64,
}

pub fn bucket_stats(outcomes: &[SelectionOutcome]) -> Result<BucketFractions, EvalError> {
    if outcomes.is_empty() {
        return Err(EvalError::EmptyOutcomes);
    }
    let count = |b: Bucket| outcomes.iter().filter(|o| o.bucket == b).count();
    let n = outcomes.len() as f64;
    let changed = count(Bucket::Changed);
    let none = count(Bucket::NoCandidates);
    let kept = outcomes.len() - changed - none;
    Ok(BucketFractions { changed: changed as f64 / n, kept: kept as f64 / n, none: none as f64 / n })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapCi {
    /// Mean of the resample means.
    pub mean: f64,
    /// Standard deviation of the resample means.
    pub std_dev: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub resamples: usize,
    pub seed: u64,
    pub z: f64,
}

/// Normal-approximation interval from resampling `labels` with replacement:
/// mean ± z·sd of the resample means, clipped to [0, 1].
pub fn bootstrap_ci(labels: &[bool], resamples: usize, seed: u64, z: f64) -> Result<BootstrapCi, EvalError> {
    if labels.is_empty() {
        return Err(EvalError::EmptyLabels);
    }
    let resamples = resamples.max(1);
    let n = labels.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let means: Vec<f64> =
        (0..resamples).map(|_| (0..n).filter(|_| labels[rng.gen_range(0..n)]).count() as f64 / n as f64).collect();
    let mean = means.iter().sum::<f64>() / resamples as f64;
    let var = means.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / resamples as f64;
    let std_dev = var.sqrt();
    Ok(BootstrapCi {
        mean,
        std_dev,
        ci_low: (mean - z * std_dev).clamp(0.0, 1.0),
        ci_high: (mean + z * std_dev).clamp(0.0, 1.0),
        resamples,
        seed,
        z,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contrast::CandidateSummary;
    use crate::select::ScoredCandidate;

    pub(super) fn outcome(id: &str, bucket: Bucket, original_score: f64) -> SelectionOutcome {
        SelectionOutcome {
            example_id: id.into(),
            chosen: CandidateSummary::original("s"),
            bucket,
            scored: vec![ScoredCandidate { text: "s".into(), score: original_score }],
            diagnostic: None,
        }
    }

    #[test]
    fn confusion_arithmetic() {
        let p = prf_from_confusion(3, 1, 2).unwrap();
        assert_eq!((p.precision, p.recall), (0.75, 0.6));
        assert!((p.f1 - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(prf_from_confusion(5, 0, 0).unwrap(), Prf::new(1.0, 1.0));
        assert_eq!(prf_from_confusion(0, 0, 0), Err(EvalError::AllZeroCounts));
        let p = prf_from_confusion(0, 0, 4).unwrap();
        assert_eq!((p.precision, p.recall, p.f1), (0.0, 0.0, 0.0));
    }

    #[test]
    fn ptgen_row_is_consistent() {
        let p = Prf::new(79.86, 58.38);
        assert!((p.f1 - 67.45).abs() <= 0.01);
    }

    #[test]
    fn ten_example_fixture() {
        // tp: e0..e3, fp: e4, fn: e5 e6, tn: e7..e9
        let cases =
            [(true, true); 4].into_iter().chain([(true, false)]).chain([(false, true); 2]).chain([(false, false); 3]);
        let mut outcomes = Vec::new();
        let mut gold = HashMap::new();
        for (i, (pred, g)) in cases.enumerate() {
            let id = format!("e{i}");
            let bucket = if pred { Bucket::Changed } else { Bucket::KeptOriginal };
            outcomes.push(outcome(&id, bucket, if pred { 0.2 } else { 0.8 }));
            gold.insert(id, g);
        }
        let p = identification_eval(&outcomes, &gold, IdentificationMode::Changed).unwrap();
        assert!((p.precision - 0.8).abs() < 1e-12);
        assert!((p.recall - 2.0 / 3.0).abs() < 1e-12);
        let t = identification_eval(&outcomes, &gold, IdentificationMode::Threshold(0.5)).unwrap();
        assert_eq!(t, p);

        gold.remove("e3");
        assert_eq!(
            identification_eval(&outcomes, &gold, IdentificationMode::Changed),
            Err(EvalError::MissingGoldFlag("e3".into()))
        );
    }

    #[test]
    fn all_negative_predictions() {
        let outcomes = vec![outcome("a", Bucket::KeptOriginal, 0.9), outcome("b", Bucket::NoCandidates, 0.9)];
        let gold = HashMap::from([("a".to_string(), true), ("b".to_string(), false)]);
        let p = identification_eval(&outcomes, &gold, IdentificationMode::Changed).unwrap();
        assert_eq!((p.precision, p.recall), (0.0, 0.0));
    }

    #[test]
    fn bucket_fractions() {
        let o = [Bucket::Changed, Bucket::KeptOriginal, Bucket::KeptOriginal, Bucket::NoCandidates]
            .iter()
            .enumerate()
            .map(|(i, b)| outcome(&i.to_string(), *b, 0.5))
            .collect::<Vec<_>>();
        let f = bucket_stats(&o).unwrap();
        assert_eq!((f.changed, f.kept, f.none), (0.25, 0.5, 0.25));
        assert_eq!(bucket_stats(&[]), Err(EvalError::EmptyOutcomes));
    }

    #[test]
    fn bootstrap_of_constant_labels() {
        let ci = bootstrap_ci(&[true; 20], 200, 3, 1.96).unwrap();
        assert_eq!((ci.mean, ci.ci_low, ci.ci_high), (1.0, 1.0, 1.0));
        assert_eq!(bootstrap_ci(&[], 10, 0, 1.96), Err(EvalError::EmptyLabels));
    }

    #[test]
    fn bootstrap_is_seeded() {
        let labels: Vec<bool> = (0..50).map(|i| i % 3 == 0).collect();
        assert_eq!(bootstrap_ci(&labels, 100, 9, 1.96), bootstrap_ci(&labels, 100, 9, 1.96));
        assert_ne!(bootstrap_ci(&labels, 100, 9, 1.96), bootstrap_ci(&labels, 100, 10, 1.96));
    }
}
