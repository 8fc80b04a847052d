//! Corpus ingestion, passage chunking, the inverted index and ranked
//! retrieval.

mod index;
mod rank;
mod run;
mod sgml;

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jsonl;

pub use index::{build_index, Index, Posting};
pub use rank::{retrieve, RankingConfig, Scheme, ScoredUnit};
pub use run::{read_run, retrieve_run, write_run, RetrievalRun};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Document {
    pub doc_id: String,
    pub paragraphs: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Document,
    Passage,
}

impl Level {
    pub fn name(self) -> &'static str {
        match self {
            Level::Document => "document",
            Level::Passage => "passage",
        }
    }

    /// Column label used in coverage grids.
    pub fn short(self) -> &'static str {
        match self {
            Level::Document => "Doc",
            Level::Passage => "Para",
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Level {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "document" | "doc" => Ok(Level::Document),
            "passage" | "para" | "paragraph" => Ok(Level::Passage),
            _ => Err(Error::contract(format!("unknown index level {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CorpusFormat {
    #[serde(rename = "trec-sgml")]
    TrecSgml,
    #[serde(rename = "jsonl")]
    Jsonl,
}

impl FromStr for CorpusFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "trec-sgml" => Ok(CorpusFormat::TrecSgml),
            "jsonl" => Ok(CorpusFormat::Jsonl),
            _ => Err(Error::contract(format!(
                "unknown corpus format {s:?} (expected trec-sgml or jsonl)"
            ))),
        }
    }
}

/// A retrievable unit: a whole document or one of its paragraphs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexUnit {
    pub unit_id: String,
    pub text: String,
    pub parent_doc_id: String,
}

/// `doc#ordinal` identifier of a passage unit.
pub fn passage_id(doc_id: &str, ordinal: usize) -> String {
    format!("{doc_id}#{ordinal}")
}

/// Splits a passage unit id back into `(doc_id, ordinal)`. Document-level
/// ids (no `#`) return `None`.
pub fn parse_passage_id(unit_id: &str) -> Option<(&str, usize)> {
    let (doc, ord) = unit_id.rsplit_once('#')?;
    Some((doc, ord.parse().ok()?))
}

pub fn ingest_corpus(path: &Path, format: CorpusFormat) -> Result<Vec<Document>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_corpus(&path.display().to_string(), &text, format)
}

/// Parses corpus text in either format and checks document invariants.
pub fn parse_corpus(source: &str, text: &str, format: CorpusFormat) -> Result<Vec<Document>> {
    let docs = match format {
        CorpusFormat::TrecSgml => sgml::parse(source, text)?,
        CorpusFormat::Jsonl => jsonl::parse::<Document>(source, text)?,
    };
    let mut seen = HashSet::new();
    for d in &docs {
        if d.doc_id.is_empty() || d.doc_id.contains('#') || d.doc_id.contains(char::is_whitespace) {
            return Err(Error::data(
                source,
                format!(
                    "invalid document id {:?} (must be non-empty, no '#' or whitespace)",
                    d.doc_id
                ),
            ));
        }
        if !seen.insert(d.doc_id.as_str()) {
            return Err(Error::data(source, format!("duplicate document id {}", d.doc_id)));
        }
        if d.paragraphs.is_empty() {
            return Err(Error::data(source, format!("document {} has no paragraphs", d.doc_id)));
        }
    }
    Ok(docs)
}

/// One passage unit per paragraph, ids `doc#0`, `doc#1`, ...
pub fn chunk(docs: &[Document]) -> Vec<IndexUnit> {
    docs.iter()
        .flat_map(|d| {
            d.paragraphs.iter().enumerate().map(|(i, p)| IndexUnit {
                unit_id: passage_id(&d.doc_id, i),
                text: p.clone(),
                parent_doc_id: d.doc_id.clone(),
            })
        })
        .collect()
}

/// One unit per document, paragraphs joined by a newline.
pub fn wrap(docs: &[Document]) -> Vec<IndexUnit> {
    docs.iter()
        .map(|d| IndexUnit {
            unit_id: d.doc_id.clone(),
            text: d.paragraphs.join("\n"),
            parent_doc_id: d.doc_id.clone(),
        })
        .collect()
}

pub fn units_at(docs: &[Document], level: Level) -> Vec<IndexUnit> {
    match level {
        Level::Document => wrap(docs),
        Level::Passage => chunk(docs),
    }
}

/// Unit lookup by id, used to resolve retrieved ids back to text.
#[derive(Debug, Clone, Default)]
pub struct UnitStore {
    units: BTreeMap<String, IndexUnit>,
}

impl UnitStore {
    pub fn new(units: impl IntoIterator<Item = IndexUnit>) -> Self {
        UnitStore {
            units: units.into_iter().map(|u| (u.unit_id.clone(), u)).collect(),
        }
    }

    pub fn get(&self, unit_id: &str) -> Option<&IndexUnit> {
        self.units.get(unit_id)
    }

    pub fn iter(&self) -> impl Iterator<Item = &IndexUnit> {
        self.units.values()
    }

    pub fn len(&self) -> usize {
        self.units.len()
    }

    pub fn is_empty(&self) -> bool {
        self.units.is_empty()
    }
}
