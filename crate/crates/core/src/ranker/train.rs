use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{
    featurize, pair_gradient, pair_loss, score, FeatureVector, Gradient, RankerError, RankerModel, TrainConfig,
};
use crate::contrast::TrainingPair;
use crate::ner::Recognizer;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub pairs: usize,
    /// Mean pair loss per epoch, measured on each batch before its update.
    pub epoch_losses: Vec<f64>,
    /// Share of training pairs with ŷ⁺ > ŷ⁻ under the final model.
    pub pairwise_accuracy: f64,
}

pub(super) fn config_digest(config: &TrainConfig) -> String {
    let bytes = serde_json::to_vec(config).expect("config serializes");
    Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Featurize every pair and train on the resulting vectors.
pub fn train(
    pairs: &[TrainingPair],
    recognizer: &dyn Recognizer,
    config: &TrainConfig,
) -> Result<(RankerModel, TrainReport), RankerError> {
    if pairs.is_empty() {
        return Err(RankerError::EmptyTrainingSet);
    }
    let mut vectors = Vec::with_capacity(pairs.len());
    for pair in pairs {
        let source_mentions = recognizer.recognize(&pair.source)?;
        let (pos, neg) = pair.as_candidates();
        let pos_mentions = recognizer.recognize(&pos.text)?;
        let neg_mentions = recognizer.recognize(&neg.text)?;
        vectors.push((
            featurize(&pair.source, &pos, &source_mentions, &pos_mentions),
            featurize(&pair.source, &neg, &source_mentions, &neg_mentions),
        ));
    }
    train_features(&vectors, config)
}

/// Mini-batch gradient descent on the pair objective, starting from zeros.
/// The pair order is reshuffled every epoch from `config.seed`.
pub fn train_features(
    pairs: &[(FeatureVector, FeatureVector)],
    config: &TrainConfig,
) -> Result<(RankerModel, TrainReport), RankerError> {
    config.validate()?;
    if pairs.is_empty() {
        return Err(RankerError::EmptyTrainingSet);
    }
    let mut model = RankerModel::zeros(config.margin);
    model.epsilon = config.epsilon;
    model.config_digest = config_digest(config);
    let n_features = model.weights.len();

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..pairs.len()).collect();
    let mut epoch_losses = Vec::with_capacity(config.epochs);
    let mut step = 0;

    for _ in 0..config.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for batch in order.chunks(config.batch_size) {
            let mut grad = Gradient::zeros(n_features);
            for &i in batch {
                let (pos, neg) = &pairs[i];
                let loss = pair_loss(score(&model, pos)?, score(&model, neg)?, config.margin);
                if !loss.is_finite() {
                    return Err(RankerError::NonFiniteLoss { step });
                }
                epoch_loss += loss;
                grad.add_scaled(&pair_gradient(&model, pos, neg, config.margin)?, 1.0);
            }
            let scale = config.learning_rate / batch.len() as f64;
            for (w, g) in model.weights.iter_mut().zip(&grad.weights) {
                *w -= scale * g;
            }
            model.bias -= scale * grad.bias;
            if !(model.bias.is_finite() && model.weights.iter().all(|w| w.is_finite())) {
                return Err(RankerError::NonFiniteLoss { step });
            }
            step += 1;
        }
        epoch_losses.push(epoch_loss / pairs.len() as f64);
    }

    let mut correct = 0;
    for (pos, neg) in pairs {
        if score(&model, pos)? > score(&model, neg)? {
            correct += 1;
        }
    }
    let report =
        TrainReport { pairs: pairs.len(), epoch_losses, pairwise_accuracy: correct as f64 / pairs.len() as f64 };
    Ok((model, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    /// Pairs separable by the first feature alone; the rest is noise shared
    /// in distribution between the two sides.
    fn separable(n: usize, seed: u64) -> Vec<(FeatureVector, FeatureVector)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                let neg_grounded = rng.gen_range(0.0..0.67);
                let mut side = |grounded: f64| {
                    FeatureVector::new(vec![
                        grounded,
                        0.0,
                        rng.gen_range(0.5..1.0),
                        rng.gen_range(0.0..1.5),
                        rng.gen_range(0.0..1.0),
                        rng.gen_range(0.0..1.0),
                    ])
                    .unwrap()
                };
                let pos = side(1.0);
                let neg = side(neg_grounded);
                (pos, neg)
            })
            .collect()
    }

    #[test]
    fn separable_pairs_are_learned() {
        let train_set = separable(400, 1);
        let held_out = separable(200, 2);
        let (model, report) = train_features(&train_set, &TrainConfig::default()).unwrap();
        let correct = held_out.iter().filter(|(p, n)| score(&model, p).unwrap() > score(&model, n).unwrap()).count();
        assert!(correct as f64 / held_out.len() as f64 >= 0.95, "held-out accuracy {correct}/200");
        assert!(report.pairwise_accuracy >= 0.95);
        assert!(model.weights[0] > 0.0);
    }

    #[test]
    fn epoch_losses_do_not_rise_more_than_five_percent() {
        let (_, report) = train_features(&separable(400, 3), &TrainConfig::default()).unwrap();
        assert_eq!(report.epoch_losses.len(), 3);
        let rises = report.epoch_losses.windows(2).filter(|w| w[1] > w[0]).collect::<Vec<_>>();
        assert!(rises.len() <= 1);
        assert!(rises.iter().all(|w| w[1] <= w[0] * 1.05), "{:?}", report.epoch_losses);
    }

    #[test]
    fn training_is_bit_identical_across_runs() {
        let data = separable(100, 4);
        let cfg = TrainConfig { seed: 99, ..Default::default() };
        let (a, _) = train_features(&data, &cfg).unwrap();
        let (b, _) = train_features(&data, &cfg).unwrap();
        let bits = |m: &RankerModel| m.weights.iter().map(|w| w.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
        assert_eq!(a.bias.to_bits(), b.bias.to_bits());
    }

    #[test]
    fn empty_training_set() {
        assert!(matches!(train_features(&[], &TrainConfig::default()), Err(RankerError::EmptyTrainingSet)));
    }

    #[test]
    fn runaway_learning_rate_is_reported() {
        let data = vec![(FeatureVector::unchecked(vec![1e300; 6]), FeatureVector::unchecked(vec![-1e300; 6]))];
        let cfg = TrainConfig { learning_rate: 1e300, ..Default::default() };
        assert!(matches!(train_features(&data, &cfg), Err(RankerError::NonFiniteLoss { .. })));
    }
}
