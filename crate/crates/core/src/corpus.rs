//! Corpus records and line-delimited JSON I/O.
//!
//! One JSON object per line. `Example` records carry the required keys `id`,
//! `document`, `summary` and the optional keys `reference` and `metadata`.
//! Blank lines are ignored. Control characters inside strings are escaped
//! by the JSON encoder, so a record never spans more than one line.

use std::collections::{BTreeMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const SCHEMA_VERSION: &str = "entfix-corpus/1";

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read {path}: {source}")]
    FileUnreadable { path: PathBuf, source: std::io::Error },
    #[error("malformed record on line {line}: {detail}")]
    MalformedRecord { line: usize, detail: String },
    #[error("duplicate example id {0:?}")]
    DuplicateId(String),
    #[error("i/o failure on {path}: {source}")]
    IoFailure { path: PathBuf, source: std::io::Error },
    #[error("record {index} could not be serialized: {detail}")]
    SerializationFailure { index: usize, detail: String },
}

/// One corpus record: a source document and the summary under test.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Example {
    pub id: String,
    pub document: String,
    pub summary: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metadata: Option<BTreeMap<String, String>>,
}

impl Example {
    pub fn new(id: impl Into<String>, document: impl Into<String>, summary: impl Into<String>) -> Self {
        Self { id: id.into(), document: document.into(), summary: summary.into(), reference: None, metadata: None }
    }

    pub fn with_reference(mut self, reference: impl Into<String>) -> Self {
        self.reference = Some(reference.into());
        self
    }

    fn validate(&self) -> Result<(), String> {
        if self.id.is_empty() {
            return Err("empty id".into());
        }
        if self.document.trim().is_empty() {
            return Err("empty document".into());
        }
        if self.summary.trim().is_empty() {
            return Err("empty summary".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusHandle {
    pub path: PathBuf,
    pub count: usize,
    pub schema_version: String,
}

/// Outcome of parsing, kept alongside the records.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LoadDiagnostics {
    /// Non-blank lines seen.
    pub total: usize,
    pub skipped: usize,
    /// `(line number, reason)` for each skipped line.
    pub problems: Vec<(usize, String)>,
}

#[derive(Debug, Clone)]
pub struct LoadedCorpus {
    pub handle: CorpusHandle,
    pub examples: Vec<Example>,
    pub diagnostics: LoadDiagnostics,
}

/// Load `Example` records in file order.
///
/// In strict mode the first malformed line aborts the load; otherwise it is
/// skipped and recorded. Duplicate ids are always an error.
pub fn load_examples(path: impl AsRef<Path>, strict: bool) -> Result<LoadedCorpus, CorpusError> {
    let path = path.as_ref();
    let reader = open(path)?;
    let mut examples = Vec::new();
    let mut diagnostics = LoadDiagnostics::default();
    let mut seen = HashSet::new();

    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|source| CorpusError::FileUnreadable { path: path.to_path_buf(), source })?;
        if line.trim().is_empty() {
            continue;
        }
        diagnostics.total += 1;
        let parsed =
            serde_json::from_str::<Example>(&line).map_err(|e| e.to_string()).and_then(|ex| ex.validate().map(|_| ex));
        match parsed {
            Ok(ex) => {
                if !seen.insert(ex.id.clone()) {
                    return Err(CorpusError::DuplicateId(ex.id));
                }
                examples.push(ex);
            }
            Err(detail) if strict => return Err(CorpusError::MalformedRecord { line: line_no, detail }),
            Err(detail) => {
                diagnostics.skipped += 1;
                diagnostics.problems.push((line_no, detail));
            }
        }
    }

    Ok(LoadedCorpus {
        handle: CorpusHandle {
            path: path.to_path_buf(),
            count: examples.len(),
            schema_version: SCHEMA_VERSION.to_string(),
        },
        examples,
        diagnostics,
    })
}

/// Read any record type, one per line, failing on the first bad line.
pub fn read_records<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<Vec<T>, CorpusError> {
    let path = path.as_ref();
    let reader = open(path)?;
    let mut out = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|source| CorpusError::FileUnreadable { path: path.to_path_buf(), source })?;
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(&line)
            .map_err(|e| CorpusError::MalformedRecord { line: idx + 1, detail: e.to_string() })?;
        out.push(record);
    }
    Ok(out)
}

/// Write records one per line. Returns the number written.
pub fn write_records<T: Serialize>(path: impl AsRef<Path>, records: &[T]) -> Result<usize, CorpusError> {
    let path = path.as_ref();
    let io_err = |source| CorpusError::IoFailure { path: path.to_path_buf(), source };
    let mut buf = Vec::new();
    for (index, record) in records.iter().enumerate() {
        serde_json::to_writer(&mut buf, record)
            .map_err(|e| CorpusError::SerializationFailure { index, detail: e.to_string() })?;
        buf.push(b'\n');
    }
    let file = File::create(path).map_err(io_err)?;
    let mut writer = BufWriter::new(file);
    writer.write_all(&buf).map_err(io_err)?;
    writer.flush().map_err(io_err)?;
    Ok(records.len())
}

fn open(path: &Path) -> Result<BufReader<File>, CorpusError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|source| CorpusError::FileUnreadable { path: path.to_path_buf(), source })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ex(id: &str) -> Example {
        Example::new(id, format!("doc {id}"), format!("sum {id}"))
    }

    #[test]
    fn two_lines_load_in_order() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.jsonl");
        write_records(&p, &[ex("b"), ex("a")]).unwrap();
        let loaded = load_examples(&p, true).unwrap();
        let ids: Vec<_> = loaded.examples.iter().map(|e| e.id.as_str()).collect();
        assert_eq!(ids, ["b", "a"]);
        assert_eq!(loaded.handle.count, 2);
    }

    #[test]
    fn empty_file_is_empty_corpus() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("empty.jsonl");
        assert_eq!(write_records::<Example>(&p, &[]).unwrap(), 0);
        assert_eq!(std::fs::read(&p).unwrap().len(), 0);
        let loaded = load_examples(&p, true).unwrap();
        assert!(loaded.examples.is_empty());
        assert_eq!(loaded.diagnostics, LoadDiagnostics::default());
    }

    #[test]
    fn lenient_mode_skips_missing_summary() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.jsonl");
        let text = concat!(
            r#"{"id":"1","document":"d1","summary":"s1"}"#,
            "\n",
            r#"{"id":"2","document":"d2"}"#,
            "\n\n",
            r#"{"id":"3","document":"d3","summary":"s3"}"#,
            "\n"
        );
        std::fs::write(&p, text).unwrap();
        let loaded = load_examples(&p, false).unwrap();
        assert_eq!(loaded.examples.len(), 2);
        assert_eq!(loaded.diagnostics.skipped, 1);
        assert_eq!(loaded.diagnostics.problems[0].0, 2);
        assert_eq!(loaded.diagnostics.total, loaded.examples.len() + loaded.diagnostics.skipped);

        match load_examples(&p, true) {
            Err(CorpusError::MalformedRecord { line: 2, .. }) => {}
            other => panic!("expected malformed line 2, got {other:?}"),
        }
    }

    #[test]
    fn whitespace_only_summary_is_malformed() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("w.jsonl");
        std::fs::write(&p, "{\"id\":\"1\",\"document\":\"d\",\"summary\":\"  \"}\n").unwrap();
        assert!(matches!(load_examples(&p, true), Err(CorpusError::MalformedRecord { line: 1, .. })));
    }

    #[test]
    fn duplicate_ids_fail_even_when_lenient() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("d.jsonl");
        write_records(&p, &[ex("x"), ex("x")]).unwrap();
        assert!(matches!(load_examples(&p, false), Err(CorpusError::DuplicateId(id)) if id == "x"));
    }

    #[test]
    fn missing_file_is_unreadable() {
        assert!(matches!(load_examples("/nonexistent/nope.jsonl", true), Err(CorpusError::FileUnreadable { .. })));
    }

    #[test]
    fn control_characters_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("ctl.jsonl");
        let mut e = ex("ctl");
        e.document = "line one\nline two\r\n\ttab \u{0001} \"quoted\" \\ end".into();
        e.summary = "multi\nline".into();
        write_records(&p, std::slice::from_ref(&e)).unwrap();
        let raw = std::fs::read_to_string(&p).unwrap();
        assert_eq!(raw.lines().count(), 1);
        assert_eq!(load_examples(&p, true).unwrap().examples, vec![e]);
    }

    fn arb_example() -> impl Strategy<Value = Example> {
        (
            "[a-z0-9]{1,8}",
            "\\PC*[a-z]\\PC*",
            "[ -~\n\t]*[A-Z][ -~\n\t]*",
            proptest::option::of(".*"),
            proptest::option::of(proptest::collection::btree_map("[a-z]{1,4}", ".*", 0..3)),
        )
            .prop_map(|(id, document, summary, reference, metadata)| Example {
                id,
                document,
                summary,
                reference,
                metadata,
            })
    }

    proptest! {
        #[test]
        fn write_then_load_is_identity(examples in proptest::collection::vec(arb_example(), 0..6)) {
            let mut seen = HashSet::new();
            let examples: Vec<_> = examples.into_iter().filter(|e| seen.insert(e.id.clone())).collect();
            let dir = tempfile::tempdir().unwrap();
            let p = dir.path().join("rt.jsonl");
            write_records(&p, &examples).unwrap();
            let loaded = load_examples(&p, true).unwrap();
            prop_assert_eq!(loaded.examples, examples);
        }
    }
}
