use std::collections::{BTreeMap, HashMap};
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    bootstrap_ci, bucket_stats, identification_eval, identification_labels, rouge_l, rouge_n, BootstrapCi,
    BucketFractions, EvalError, IdentificationMode, Prf,
};
use crate::select::{Bucket, SelectionOutcome};

/// Corpus means of per-example precision, recall and F1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanPrf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub examples: usize,
}

impl MeanPrf {
    fn of(values: &[Prf]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        // Fixed left-to-right reduction keeps the sums reproducible.
        let sum = |f: fn(&Prf) -> f64| values.iter().map(f).fold(0.0, |a, b| a + b) / n;
        Some(Self {
            precision: sum(|p| p.precision),
            recall: sum(|p| p.recall),
            f1: sum(|p| p.f1),
            examples: values.len(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapSettings {
    pub resamples: usize,
    pub seed: u64,
    pub z: f64,
}

impl Default for BootstrapSettings {
    fn default() -> Self {
        Self { resamples: 1000, seed: 0, z: 1.96 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub outcomes: usize,
    pub rouge1: Option<MeanPrf>,
    pub rouge2: Option<MeanPrf>,
    #[serde(rename = "rougeL")]
    pub rouge_l: Option<MeanPrf>,
    pub identification: Option<Prf>,
    pub identification_mode: IdentificationMode,
    pub buckets: BucketFractions,
    pub bootstrap: Option<BootstrapCi>,
    /// Scores computed elsewhere (for example model-based faithfulness
    /// metrics), passed through unchanged.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub external: BTreeMap<String, f64>,
}

pub struct ReportInputs<'a> {
    pub outcomes: &'a [SelectionOutcome],
    /// Reference summaries by example id; outcomes without one are left out
    /// of the ROUGE means.
    pub references: &'a HashMap<String, String>,
    /// Gold "summary is hallucinated" flags by example id.
    pub gold_flags: Option<&'a HashMap<String, bool>>,
    pub mode: IdentificationMode,
    pub bootstrap: Option<BootstrapSettings>,
    pub parallel: bool,
}

/// Assemble the full report. Bootstrap labels are per-example
/// identification correctness when gold flags are given, else whether the
/// summary was changed.
pub fn build_report(inputs: &ReportInputs<'_>) -> Result<EvalReport, EvalError> {
    let buckets = bucket_stats(inputs.outcomes)?;

    let pairs: Vec<(&str, &str)> = inputs
        .outcomes
        .iter()
        .filter_map(|o| inputs.references.get(&o.example_id).map(|r| (o.chosen.text.as_str(), r.as_str())))
        .collect();
    let score = |(c, r): &(&str, &str)| [rouge_n(c, r, 1), rouge_n(c, r, 2), rouge_l(c, r)];
    let per_example: Vec<[Prf; 3]> =
        if inputs.parallel { pairs.par_iter().map(score).collect() } else { pairs.iter().map(score).collect() };
    let column = |k: usize| MeanPrf::of(&per_example.iter().map(|row| row[k]).collect::<Vec<_>>());

    let identification = match inputs.gold_flags {
        Some(gold) => Some(identification_eval(inputs.outcomes, gold, inputs.mode)?),
        None => None,
    };

    let bootstrap = match inputs.bootstrap {
        Some(s) => {
            let labels: Vec<bool> = match inputs.gold_flags {
                Some(gold) => identification_labels(inputs.outcomes, gold, inputs.mode)?
                    .into_iter()
                    .map(|(pred, gold)| pred == gold)
                    .collect(),
                None => inputs.outcomes.iter().map(|o| o.bucket == Bucket::Changed).collect(),
            };
            Some(bootstrap_ci(&labels, s.resamples, s.seed, s.z)?)
        }
        None => None,
    };

    Ok(EvalReport {
        outcomes: inputs.outcomes.len(),
        rouge1: column(0),
        rouge2: column(1),
        rouge_l: column(2),
        identification,
        identification_mode: inputs.mode,
        buckets,
        bootstrap,
        external: BTreeMap::new(),
    })
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "outcomes: {}", self.outcomes)?;
        writeln!(f, "{:<16} {:>9} {:>9} {:>9}", "metric", "P", "R", "F1")?;
        let mut row = |name: &str, p: f64, r: f64, f1: f64| writeln!(f, "{name:<16} {:>9.4} {:>9.4} {:>9.4}", p, r, f1);
        for (name, m) in [("rouge1", self.rouge1), ("rouge2", self.rouge2), ("rougeL", self.rouge_l)] {
            if let Some(m) = m {
                row(name, m.precision, m.recall, m.f1)?;
            }
        }
        if let Some(p) = self.identification {
            row("identification", p.precision, p.recall, p.f1)?;
        }
        writeln!(
            f,
            "buckets: changed {:.4}  kept {:.4}  none {:.4}",
            self.buckets.changed, self.buckets.kept, self.buckets.none
        )?;
        if let Some(b) = &self.bootstrap {
            writeln!(
                f,
                "bootstrap: mean {:.4}  sd {:.4}  ci [{:.4}, {:.4}]  ({} resamples, seed {}, z {})",
                b.mean, b.std_dev, b.ci_low, b.ci_high, b.resamples, b.seed, b.z
            )?;
        }
        for (k, v) in &self.external {
            writeln!(f, "{k}: {v}")?;
        }
        Ok(())
    }
}
