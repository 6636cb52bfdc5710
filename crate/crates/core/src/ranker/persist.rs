//! Model files: pretty-printed JSON with a version tag.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{FeatureSchema, RankerError, RankerModel};

pub const MODEL_SCHEMA_VERSION: &str = "entfix-ranker/1";

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    schema_version: String,
    features: Vec<String>,
    weights: Vec<f64>,
    bias: f64,
    margin: f64,
    epsilon: f64,
    config_digest: String,
}

pub fn save_model(model: &RankerModel, path: impl AsRef<Path>) -> Result<(), RankerError> {
    let file = ModelFile {
        schema_version: model.schema.version.clone(),
        features: model.schema.names.clone(),
        weights: model.weights.clone(),
        bias: model.bias,
        margin: model.margin,
        epsilon: model.epsilon,
        config_digest: model.config_digest.clone(),
    };
    let mut text = serde_json::to_string_pretty(&file).map_err(|e| RankerError::CorruptModelFile(e.to_string()))?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

pub fn load_model(path: impl AsRef<Path>) -> Result<RankerModel, RankerError> {
    let raw = std::fs::read(path)?;
    let value: Value = serde_json::from_slice(&raw).map_err(|e| RankerError::CorruptModelFile(e.to_string()))?;
    let version = value
        .get("schema_version")
        .and_then(Value::as_str)
        .ok_or_else(|| RankerError::CorruptModelFile("missing schema_version".into()))?;
    if version != MODEL_SCHEMA_VERSION {
        return Err(RankerError::SchemaVersionMismatch {
            expected: MODEL_SCHEMA_VERSION.into(),
            found: version.into(),
        });
    }
    let file: ModelFile = serde_json::from_value(value).map_err(|e| RankerError::CorruptModelFile(e.to_string()))?;
    if file.weights.len() != file.features.len() {
        return Err(RankerError::CorruptModelFile(format!(
            "{} weights for {} features",
            file.weights.len(),
            file.features.len()
        )));
    }
    let finite = file.weights.iter().chain([&file.bias, &file.margin, &file.epsilon]).all(|v| v.is_finite());
    if !finite || file.margin < 0.0 || !(file.epsilon > 0.0 && file.epsilon < 0.5) {
        return Err(RankerError::CorruptModelFile("parameter out of range".into()));
    }
    Ok(RankerModel {
        schema: FeatureSchema { version: file.schema_version, names: file.features },
        weights: file.weights,
        bias: file.bias,
        margin: file.margin,
        epsilon: file.epsilon,
        config_digest: file.config_digest,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ranker::{score, FeatureVector};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn odd_model() -> RankerModel {
        RankerModel {
            weights: vec![0.1 + 0.2, -1.0 / 3.0, 1e-300, 123456.789, -0.0, std::f64::consts::PI],
            bias: -2.0f64.sqrt(),
            margin: 0.25,
            config_digest: "abc".into(),
            ..RankerModel::zeros(0.0)
        }
    }

    #[test]
    fn round_trip_preserves_scores_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.json");
        let m = odd_model();
        save_model(&m, &p).unwrap();
        let back = load_model(&p).unwrap();
        assert_eq!(back, m);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let phi = FeatureVector::unchecked((0..6).map(|_| rng.gen_range(0.0..2.0)).collect());
            assert_eq!(score(&m, &phi).unwrap().to_bits(), score(&back, &phi).unwrap().to_bits());
        }
    }

    #[test]
    fn edited_version_tag() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.json");
        save_model(&odd_model(), &p).unwrap();
        let text = std::fs::read_to_string(&p).unwrap().replace(MODEL_SCHEMA_VERSION, "entfix-ranker/0");
        std::fs::write(&p, text).unwrap();
        assert!(matches!(load_model(&p), Err(RankerError::SchemaVersionMismatch { .. })));
    }

    #[test]
    fn truncated_file_is_corrupt() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.json");
        save_model(&odd_model(), &p).unwrap();
        let bytes = std::fs::read(&p).unwrap();
        std::fs::write(&p, &bytes[..bytes.len() / 2]).unwrap();
        assert!(matches!(load_model(&p), Err(RankerError::CorruptModelFile(_))));
    }

    #[test]
    fn weight_count_mismatch_is_corrupt() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.json");
        let mut m = odd_model();
        m.weights.pop();
        save_model(&m, &p).unwrap();
        assert!(matches!(load_model(&p), Err(RankerError::CorruptModelFile(_))));
    }
}
