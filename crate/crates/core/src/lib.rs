//! Question-answering retrieval workbench.
//!
//! * [`text`]: tokenizer, stopword lists and n-gram profiles.
//! * [`sim`]: n-gram similarity metrics and Gold Standard scoring.
//! * [`reform`]: rule-based reformulation of question series.
//! * [`corpus`]: corpus ingestion, inverted index and ranked retrieval.
//! * [`eval`]: answer-key judging, coverage, redundancy and difficult questions.
//! * [`expand`]: extension-word mining and blind relevance feedback.

pub mod corpus;
pub mod error;
pub mod eval;
pub mod expand;
pub mod jsonl;
pub mod questions;
pub mod reform;
pub mod sim;
pub mod text;

pub use error::{Error, Result};
