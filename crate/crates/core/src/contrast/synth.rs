use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::derive_seed;
use crate::corpus::Example;
use crate::ner::Recognizer;
use crate::text::splice;

use super::detect::SourceIndex;
use super::{ContrastError, CorruptedSpan, TrainingPair};

fn reference(ex: &Example) -> Result<&str, ContrastError> {
    ex.reference.as_deref().ok_or_else(|| ContrastError::MissingReference(ex.id.clone()))
}

/// Keep examples whose reference summary has no hallucinated mention.
pub fn filter_clean(examples: &[Example], recognizer: &dyn Recognizer) -> Result<Vec<Example>, ContrastError> {
    let mut kept = Vec::new();
    for ex in examples {
        let gold = reference(ex)?;
        let src = recognizer.recognize(&ex.document)?;
        let ref_mentions = recognizer.recognize(gold)?;
        let index = SourceIndex::new(&ex.document, &src);
        if ref_mentions.iter().all(|m| index.is_grounded(m)) {
            kept.push(ex.clone());
        }
    }
    Ok(kept)
}

/// Corrupt each clean reference summary one span at a time.
///
/// Every reference mention is swapped for each same-label source mention of
/// a different normalized form that does not itself ground the mention
/// ("John Smith" never corrupts "Smith"). When an example yields more than
/// `negatives_per_example` negatives, a seeded shuffle picks which to keep;
/// the kept pairs stay in enumeration order.
pub fn make_training_pairs(
    clean: &[Example],
    recognizer: &dyn Recognizer,
    negatives_per_example: usize,
    seed: u64,
) -> Result<Vec<TrainingPair>, ContrastError> {
    let mut pairs = Vec::new();
    for ex in clean {
        let gold = reference(ex)?;
        let src = recognizer.recognize(&ex.document)?;
        let ref_mentions = recognizer.recognize(gold)?;
        let index = SourceIndex::new(&ex.document, &src);

        let mut local = Vec::new();
        for g in &ref_mentions {
            let Some(anchor) = index.grounding(g) else {
                continue;
            };
            let pool = super::replacement_pool(&src, g);
            for s in pool.iter().filter(|s| !index.mention_grounds(g, s)) {
                let negative =
                    splice(gold, &[(g.start, g.end, s.surface.as_str())]).expect("mention lies inside its owning text");
                local.push(TrainingPair {
                    id: ex.id.clone(),
                    source: ex.document.clone(),
                    positive: gold.to_string(),
                    negative,
                    corrupted_span: CorruptedSpan {
                        replaced: g.surface.clone(),
                        replacement: s.surface.clone(),
                        label: g.label,
                        start: g.start,
                        end: g.end,
                        source_start: s.start,
                        source_end: s.end,
                        gold_source_start: anchor.start,
                        gold_source_end: anchor.end,
                    },
                });
            }
        }

        if local.len() > negatives_per_example {
            let mut order: Vec<usize> = (0..local.len()).collect();
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &ex.id));
            order.shuffle(&mut rng);
            let mut keep = order[..negatives_per_example].to_vec();
            keep.sort_unstable();
            let mut slots: Vec<Option<TrainingPair>> = local.into_iter().map(Some).collect();
            local = keep.into_iter().map(|i| slots[i].take().expect("unique index")).collect();
        }
        pairs.extend(local);
    }
    Ok(pairs)
}
