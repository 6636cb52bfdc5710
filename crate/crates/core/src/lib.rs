//! Post-hoc correction of entity and quantity hallucinations in abstractive
//! summaries.
//!
//! The pipeline recognizes typed mentions in a document and its summary,
//! flags summary mentions with no matching counterpart in the document,
//! builds contrast candidates by swapping each flagged mention for
//! same-typed mentions from the document, scores every candidate (the
//! original included) with a discriminatively trained ranker, and keeps the
//! best one.

pub mod config;
pub mod contrast;
pub mod corpus;
pub mod eval;
pub mod fixtures;
pub mod ner;
pub mod pipeline;
pub mod ranker;
pub mod select;
pub mod text;
pub mod wire;

pub use contrast::{CandidateSummary, Provenance, Substitution, TrainingPair};
pub use corpus::Example;
pub use ner::{EntityLabel, EntityMention, Recognizer};
