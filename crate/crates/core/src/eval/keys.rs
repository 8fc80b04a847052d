use std::collections::{BTreeMap, BTreeSet};
use std::ops::Range;
use std::path::Path;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jsonl;

/// One line of an answer-key file.
///
/// Patterns use the `regex` crate syntax and are case-sensitive unless they
/// start with `(?i)`. `judged_docs` lists documents known to support the
/// answer; it is never assumed complete.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnswerKey {
    pub question_id: String,
    pub patterns: Vec<String>,
    #[serde(default)]
    pub judged_docs: BTreeSet<String>,
}

/// An answer key with its patterns compiled.
#[derive(Debug, Clone)]
pub struct CompiledKey {
    pub question_id: String,
    pub patterns: Vec<Regex>,
    pub judged_docs: BTreeSet<String>,
}

impl CompiledKey {
    pub fn compile(key: &AnswerKey) -> Result<Self> {
        if key.patterns.is_empty() {
            return Err(Error::data(
                format!("answer key {}", key.question_id),
                "no answer patterns",
            ));
        }
        let patterns = key
            .patterns
            .iter()
            .map(|p| {
                Regex::new(p).map_err(|e| {
                    Error::data(
                        format!("answer key {}", key.question_id),
                        format!("bad pattern {p:?}: {e}"),
                    )
                })
            })
            .collect::<Result<_>>()?;
        Ok(CompiledKey {
            question_id: key.question_id.clone(),
            patterns,
            judged_docs: key.judged_docs.clone(),
        })
    }

    /// Whether any pattern matches `text`.
    pub fn matches(&self, text: &str) -> bool {
        self.patterns.iter().any(|p| p.is_match(text))
    }

    /// Byte ranges of all pattern matches in `text`.
    pub fn match_ranges(&self, text: &str) -> Vec<Range<usize>> {
        self.patterns
            .iter()
            .flat_map(|p| p.find_iter(text).map(|m| m.range()))
            .collect()
    }

    pub fn is_judged(&self, doc_id: &str) -> bool {
        self.judged_docs.contains(doc_id)
    }
}

/// Compiled keys by question id.
#[derive(Debug, Clone, Default)]
pub struct AnswerKeys {
    keys: BTreeMap<String, CompiledKey>,
}

impl AnswerKeys {
    pub fn new(keys: &[AnswerKey]) -> Result<Self> {
        let mut map = BTreeMap::new();
        for k in keys {
            if map.insert(k.question_id.clone(), CompiledKey::compile(k)?).is_some() {
                return Err(Error::data(
                    "answer keys",
                    format!("duplicate key for {}", k.question_id),
                ));
            }
        }
        Ok(AnswerKeys { keys: map })
    }

    pub fn get(&self, question_id: &str) -> Option<&CompiledKey> {
        self.keys.get(question_id)
    }

    /// Like [`get`](Self::get) but a missing key is a data error.
    pub fn require(&self, question_id: &str) -> Result<&CompiledKey> {
        self.get(question_id)
            .ok_or_else(|| Error::data("answer keys", format!("no answer key for question {question_id}")))
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }
}

pub fn parse_answer_keys(source: &str, text: &str) -> Result<AnswerKeys> {
    let keys: Vec<AnswerKey> = jsonl::parse(source, text)?;
    AnswerKeys::new(&keys).map_err(|e| match e {
        Error::Data { location, message } => Error::data(format!("{source}: {location}"), message),
        other => other,
    })
}

pub fn read_answer_keys(path: &Path) -> Result<AnswerKeys> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_answer_keys(&path.display().to_string(), &text)
}
