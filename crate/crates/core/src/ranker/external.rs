//! Client for an external scorer.
//!
//! Request: `{"id": "...", "op": "score", "document": "...", "candidates": ["..."]}`.
//! Response: `{"id": "...", "scores": [0.93, 0.12]}`, one finite score per
//! candidate in request order.

use std::sync::Mutex;

use serde_json::{json, Map, Value};

use super::{RankerError, Scorer};
use crate::contrast::CandidateSummary;
use crate::wire::{Endpoint, LineClient, WireError};

pub struct ExternalScorer {
    client: Mutex<LineClient>,
}

impl ExternalScorer {
    pub fn connect(endpoint: &Endpoint) -> Result<Self, RankerError> {
        Ok(Self { client: Mutex::new(LineClient::connect(endpoint)?) })
    }
}

impl Scorer for ExternalScorer {
    fn score_candidates(&self, source: &str, candidates: &[CandidateSummary]) -> Result<Vec<f64>, RankerError> {
        let mut client = self.client.lock().expect("scorer client poisoned");
        let texts: Vec<&str> = candidates.iter().map(|c| c.text.as_str()).collect();
        let Value::Object(req) = json!({"op": "score", "document": source, "candidates": texts}) else {
            unreachable!()
        };
        let resp = client.call(req)?;
        parse_scores(&resp, candidates.len())
    }
}

/// One-shot scoring over a fresh connection.
pub fn score_external(
    endpoint: &Endpoint,
    source: &str,
    candidates: &[CandidateSummary],
) -> Result<Vec<f64>, RankerError> {
    ExternalScorer::connect(endpoint)?.score_candidates(source, candidates)
}

pub fn parse_scores(response: &Map<String, Value>, expected: usize) -> Result<Vec<f64>, RankerError> {
    let scores = response
        .get("scores")
        .and_then(Value::as_array)
        .ok_or_else(|| WireError::ProtocolViolation("missing scores array".into()))?;
    if scores.len() != expected {
        return Err(RankerError::CountMismatch { expected, got: scores.len() });
    }
    scores
        .iter()
        .enumerate()
        .map(|(i, v)| match v.as_f64() {
            Some(x) if x.is_finite() => Ok(x),
            _ => Err(WireError::ProtocolViolation(format!("score {i} is not a finite number: {v}")).into()),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wire::testing::serve;

    fn cands(n: usize) -> Vec<CandidateSummary> {
        (0..n).map(|i| CandidateSummary::original(format!("c{i}"))).collect()
    }

    #[test]
    fn three_scores_pass_through() {
        let addr = serve(|req| {
            assert_eq!(req["op"], "score");
            assert_eq!(req["candidates"].as_array().unwrap().len(), 3);
            Some(json!({"id": req["id"], "scores": [0.9, 0.1, 0.5]}).to_string())
        });
        let out = score_external(&Endpoint::tcp(addr), "doc", &cands(3)).unwrap();
        assert_eq!(out, vec![0.9, 0.1, 0.5]);
    }

    #[test]
    fn short_response_is_count_mismatch() {
        let addr = serve(|req| Some(json!({"id": req["id"], "scores": [0.9, 0.1]}).to_string()));
        assert!(matches!(
            score_external(&Endpoint::tcp(addr), "doc", &cands(3)),
            Err(RankerError::CountMismatch { expected: 3, got: 2 })
        ));
    }

    #[test]
    fn non_finite_score_is_a_violation() {
        for bad in [r#""NaN""#, "null", "1e999"] {
            let bad = bad.to_string();
            let addr = serve(move |req| Some(format!(r#"{{"id":{},"scores":[0.5,{bad},0.2]}}"#, req["id"])));
            assert!(matches!(
                score_external(&Endpoint::tcp(addr), "doc", &cands(3)),
                Err(RankerError::External(WireError::ProtocolViolation(_)))
            ));
        }
    }
}
