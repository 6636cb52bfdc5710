//! Client for an external recognizer speaking the line protocol.
//!
//! Request: `{"id": "...", "op": "ner", "text": "..."}`.
//! Response: `{"id": "...", "entities": [{"start": 0, "end": 4, "label": "ORG"}]}`.
//! Offsets are char indices into `text`.

use std::sync::Mutex;

use serde_json::{json, Map, Value};

use super::{EntityLabel, EntityMention, NerError, Recognizer};
use crate::wire::{Endpoint, LineClient, WireError};

/// Mentions accepted from a response, plus a note for each one dropped.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ExternalMentions {
    pub mentions: Vec<EntityMention>,
    pub dropped: Vec<String>,
}

pub struct ExternalRecognizer {
    client: Mutex<LineClient>,
    dropped: Mutex<Vec<String>>,
}

impl ExternalRecognizer {
    pub fn connect(endpoint: &Endpoint) -> Result<Self, NerError> {
        Ok(Self { client: Mutex::new(LineClient::connect(endpoint)?), dropped: Mutex::new(Vec::new()) })
    }

    pub fn recognize_external(&self, text: &str) -> Result<ExternalMentions, NerError> {
        let mut client = self.client.lock().expect("recognizer client poisoned");
        let response = client.call(request(text))?;
        Ok(parse_response(text, &response)?)
    }

    /// Send all texts before reading any response.
    pub fn recognize_batch(&self, texts: &[&str]) -> Result<Vec<ExternalMentions>, NerError> {
        let mut client = self.client.lock().expect("recognizer client poisoned");
        let responses = client.call_many(texts.iter().map(|t| request(t)).collect())?;
        texts.iter().zip(&responses).map(|(t, r)| parse_response(t, r).map_err(NerError::from)).collect()
    }

    /// Diagnostics for mentions dropped so far by [`Recognizer::recognize`].
    pub fn take_diagnostics(&self) -> Vec<String> {
        std::mem::take(&mut *self.dropped.lock().expect("diagnostics poisoned"))
    }
}

impl Recognizer for ExternalRecognizer {
    fn recognize(&self, text: &str) -> Result<Vec<EntityMention>, NerError> {
        let out = self.recognize_external(text)?;
        if !out.dropped.is_empty() {
            self.dropped.lock().expect("diagnostics poisoned").extend(out.dropped);
        }
        Ok(out.mentions)
    }
}

fn request(text: &str) -> Map<String, Value> {
    let Value::Object(map) = json!({"op": "ner", "text": text}) else { unreachable!() };
    map
}

/// Validate a response against `text`. Unknown labels and malformed entries
/// are protocol violations; out-of-range or overlapping spans are dropped.
pub fn parse_response(text: &str, response: &Map<String, Value>) -> Result<ExternalMentions, WireError> {
    let violation = |d: String| WireError::ProtocolViolation(d);
    let entities =
        response.get("entities").and_then(Value::as_array).ok_or_else(|| violation("missing entities array".into()))?;
    let text_len = crate::text::char_len(text);

    let mut raw = Vec::with_capacity(entities.len());
    for (i, e) in entities.iter().enumerate() {
        let start = e.get("start").and_then(Value::as_u64);
        let end = e.get("end").and_then(Value::as_u64);
        let label = e.get("label").and_then(Value::as_str);
        let (Some(start), Some(end), Some(label)) = (start, end, label) else {
            return Err(violation(format!("entity {i} lacks start/end/label")));
        };
        let label: EntityLabel = label.parse().map_err(|e| violation(format!("entity {i}: {e}")))?;
        raw.push((i, start as usize, end as usize, label));
    }

    let mut out = ExternalMentions::default();
    raw.sort_by_key(|&(i, start, end, _)| (start, end, i));
    for (i, start, end, label) in raw {
        if start >= end || end > text_len {
            out.dropped.push(format!("entity {i}: span {start}..{end} outside text of length {text_len}"));
            continue;
        }
        if out.mentions.last().is_some_and(|prev| prev.end > start) {
            out.dropped.push(format!("entity {i}: span {start}..{end} overlaps a previous mention"));
            continue;
        }
        let mention = EntityMention::from_text(text, start, end, label).expect("range checked above");
        out.mentions.push(mention);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wire::testing::serve;

    fn resp(entities: Value) -> Map<String, Value> {
        json!({"id": "0", "entities": entities}).as_object().unwrap().clone()
    }

    #[test]
    fn two_valid_mentions_pass_through() {
        let text = "Mooney joined Tranmere";
        let r = resp(json!([
            {"start": 14, "end": 22, "label": "ORG"},
            {"start": 0, "end": 6, "label": "PERSON"}
        ]));
        let out = parse_response(text, &r).unwrap();
        assert_eq!(out.mentions.len(), 2);
        assert_eq!(out.mentions[0].surface, "Mooney");
        assert_eq!(out.mentions[1].label, EntityLabel::Org);
        assert!(out.dropped.is_empty());
    }

    #[test]
    fn span_past_end_is_dropped_with_diagnostic() {
        let r = resp(json!([{"start": 0, "end": 40, "label": "ORG"}]));
        let out = parse_response("short", &r).unwrap();
        assert!(out.mentions.is_empty());
        assert_eq!(out.dropped.len(), 1);
    }

    #[test]
    fn overlapping_span_is_dropped() {
        let r = resp(json!([
            {"start": 0, "end": 4, "label": "ORG"},
            {"start": 2, "end": 6, "label": "ORG"}
        ]));
        let out = parse_response("abcdefgh", &r).unwrap();
        assert_eq!(out.mentions.len(), 1);
        assert_eq!(out.dropped.len(), 1);
    }

    #[test]
    fn unknown_label_is_a_violation() {
        let r = resp(json!([{"start": 0, "end": 2, "label": "MISC"}]));
        assert!(matches!(parse_response("ab", &r), Err(WireError::ProtocolViolation(_))));
    }

    #[test]
    fn end_to_end_over_tcp() {
        let addr = serve(|req| {
            assert_eq!(req["op"], "ner");
            let text = req["text"].as_str().unwrap();
            let n = text.chars().count();
            Some(
                json!({"id": req["id"], "entities": [
                    {"start": 0, "end": 3, "label": "GPE"},
                    {"start": 0, "end": n + 5, "label": "GPE"}
                ]})
                .to_string(),
            )
        });
        let rec = ExternalRecognizer::connect(&Endpoint::tcp(addr)).unwrap();
        let ms = rec.recognize("Ürü is a town").unwrap();
        assert_eq!(ms.len(), 1);
        assert_eq!(ms[0].surface, "Ürü");
        assert_eq!(rec.take_diagnostics().len(), 1);
        let batch = rec.recognize_batch(&["abc one", "xyz two"]).unwrap();
        assert_eq!(batch[1].mentions[0].surface, "xyz");
    }

    #[test]
    fn unknown_label_over_tcp_surfaces_as_ner_error() {
        let addr = serve(|req| {
            Some(json!({"id": req["id"], "entities": [{"start": 0, "end": 1, "label": "MISC"}]}).to_string())
        });
        let rec = ExternalRecognizer::connect(&Endpoint::tcp(addr)).unwrap();
        assert!(matches!(rec.recognize("a"), Err(NerError::External(WireError::ProtocolViolation(_)))));
    }
}
