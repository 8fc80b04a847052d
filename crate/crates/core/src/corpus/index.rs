use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{IndexUnit, Level};
use crate::error::{Error, Result};
use crate::text::tokenize;

const HEADER: &str = "qalab-index 1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Posting {
    /// Position of the unit in [`Index::unit_ids`] order.
    pub unit: u32,
    pub tf: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct UnitEntry {
    unit_id: String,
    parent: String,
    length: u32,
}

/// Immutable inverted index over units of a single level.
///
/// Units are stored sorted by id, so posting lists (sorted by unit
/// position) are also sorted by unit id. Stopwords are indexed like any other
/// term.
#[derive(Debug, Clone, PartialEq)]
pub struct Index {
    level: Level,
    units: Vec<UnitEntry>,
    terms: Vec<String>,
    postings: Vec<Vec<Posting>>,
    /// Per unit: `(term position, tf)` sorted by term.
    forward: Vec<Vec<(u32, u32)>>,
    total_length: u64,
}

pub fn build_index(units: &[IndexUnit], level: Level) -> Result<Index> {
    let mut seen = HashSet::new();
    for u in units {
        if !seen.insert(u.unit_id.as_str()) {
            return Err(Error::data("index build", format!("duplicate unit id {}", u.unit_id)));
        }
    }
    let mut sorted: Vec<&IndexUnit> = units.iter().collect();
    sorted.sort_by(|a, b| a.unit_id.cmp(&b.unit_id));

    let counted: Vec<(u32, BTreeMap<String, u32>)> = sorted
        .par_iter()
        .map(|u| {
            let tokens = tokenize(&u.text);
            let mut counts = BTreeMap::new();
            for t in tokens.iter() {
                *counts.entry(t.to_string()).or_insert(0u32) += 1;
            }
            (tokens.len() as u32, counts)
        })
        .collect();

    let mut merged: BTreeMap<String, Vec<Posting>> = BTreeMap::new();
    for (pos, (_, counts)) in counted.iter().enumerate() {
        for (term, &tf) in counts {
            merged
                .entry(term.clone())
                .or_default()
                .push(Posting { unit: pos as u32, tf });
        }
    }
    let entries = sorted
        .iter()
        .zip(&counted)
        .map(|(u, (len, _))| UnitEntry {
            unit_id: u.unit_id.clone(),
            parent: u.parent_doc_id.clone(),
            length: *len,
        })
        .collect();
    let (terms, postings) = merged.into_iter().unzip();
    Ok(Index::assemble(level, entries, terms, postings))
}

impl Index {
    fn assemble(level: Level, units: Vec<UnitEntry>, terms: Vec<String>, postings: Vec<Vec<Posting>>) -> Index {
        let mut forward = vec![Vec::new(); units.len()];
        for (t, list) in postings.iter().enumerate() {
            for p in list {
                forward[p.unit as usize].push((t as u32, p.tf));
            }
        }
        let total_length = units.iter().map(|u| u64::from(u.length)).sum();
        Index {
            level,
            units,
            terms,
            postings,
            forward,
            total_length,
        }
    }

    pub fn level(&self) -> Level {
        self.level
    }

    pub fn unit_count(&self) -> usize {
        self.units.len()
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn total_length(&self) -> u64 {
        self.total_length
    }

    /// Mean unit length in tokens; 0 for an empty index.
    pub fn average_length(&self) -> f64 {
        if self.units.is_empty() {
            0.0
        } else {
            self.total_length as f64 / self.units.len() as f64
        }
    }

    pub fn unit_id(&self, pos: u32) -> &str {
        &self.units[pos as usize].unit_id
    }

    pub fn parent_doc(&self, pos: u32) -> &str {
        &self.units[pos as usize].parent
    }

    pub fn unit_length(&self, pos: u32) -> u32 {
        self.units[pos as usize].length
    }

    pub fn unit_ids(&self) -> impl Iterator<Item = &str> {
        self.units.iter().map(|u| u.unit_id.as_str())
    }

    pub fn position(&self, unit_id: &str) -> Option<u32> {
        self.units
            .binary_search_by(|u| u.unit_id.as_str().cmp(unit_id))
            .ok()
            .map(|p| p as u32)
    }

    pub fn postings(&self, term: &str) -> &[Posting] {
        match self.terms.binary_search_by(|t| t.as_str().cmp(term)) {
            Ok(i) => &self.postings[i],
            Err(_) => &[],
        }
    }

    pub fn doc_freq(&self, term: &str) -> usize {
        self.postings(term).len()
    }

    /// Term frequencies of one unit, in term order.
    pub fn unit_terms(&self, pos: u32) -> impl Iterator<Item = (&str, u32)> {
        self.forward[pos as usize]
            .iter()
            .map(|&(t, tf)| (self.terms[t as usize].as_str(), tf))
    }

    pub fn terms(&self) -> impl Iterator<Item = &str> {
        self.terms.iter().map(String::as_str)
    }

    /// Line-delimited serialization: a version header, one metadata line,
    /// one line per unit, then one line per term.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(HEADER);
        out.push('\n');
        let meta = Meta {
            level: self.level,
            units: self.units.len(),
            terms: self.terms.len(),
        };
        writeln!(out, "{}", serde_json::to_string(&meta).expect("meta serializes")).unwrap();
        for u in &self.units {
            writeln!(out, "{}", serde_json::to_string(u).expect("unit serializes")).unwrap();
        }
        for (term, list) in self.terms.iter().zip(&self.postings) {
            let line = TermLine {
                term: term.clone(),
                postings: list.iter().map(|p| (p.unit, p.tf)).collect(),
            };
            writeln!(out, "{}", serde_json::to_string(&line).expect("term serializes")).unwrap();
        }
        out
    }

    pub fn from_text(source: &str, text: &str) -> Result<Index> {
        let mut lines = text.lines().enumerate();
        let at = |n: usize| format!("{source}:{}", n + 1);
        match lines.next() {
            Some((_, HEADER)) => {}
            Some((n, other)) => {
                return Err(Error::data(
                    at(n),
                    format!("expected header {HEADER:?}, found {other:?}"),
                ))
            }
            None => return Err(Error::data(source, "empty index file")),
        }
        let (n, meta_line) = lines
            .next()
            .ok_or_else(|| Error::data(source, "missing metadata line"))?;
        let meta: Meta = serde_json::from_str(meta_line).map_err(|e| Error::data(at(n), e.to_string()))?;

        let mut units: Vec<UnitEntry> = Vec::with_capacity(meta.units);
        for _ in 0..meta.units {
            let (n, line) = lines
                .next()
                .ok_or_else(|| Error::data(source, "truncated unit table"))?;
            let unit: UnitEntry = serde_json::from_str(line).map_err(|e| Error::data(at(n), e.to_string()))?;
            if units.last().is_some_and(|prev| prev.unit_id >= unit.unit_id) {
                return Err(Error::data(at(n), "unit ids not strictly increasing"));
            }
            units.push(unit);
        }

        let mut terms = Vec::with_capacity(meta.terms);
        let mut postings = Vec::with_capacity(meta.terms);
        let mut lengths = vec![0u64; units.len()];
        for _ in 0..meta.terms {
            let (n, line) = lines
                .next()
                .ok_or_else(|| Error::data(source, "truncated term table"))?;
            let t: TermLine = serde_json::from_str(line).map_err(|e| Error::data(at(n), e.to_string()))?;
            if terms.last().is_some_and(|prev: &String| *prev >= t.term) {
                return Err(Error::data(at(n), "terms not strictly increasing"));
            }
            let mut list = Vec::with_capacity(t.postings.len());
            for (unit, tf) in t.postings {
                if unit as usize >= units.len() || tf == 0 {
                    return Err(Error::data(at(n), format!("bad posting ({unit}, {tf})")));
                }
                if list.last().is_some_and(|p: &Posting| p.unit >= unit) {
                    return Err(Error::data(at(n), "postings not sorted by unit"));
                }
                lengths[unit as usize] += u64::from(tf);
                list.push(Posting { unit, tf });
            }
            terms.push(t.term);
            postings.push(list);
        }
        if let Some((n, _)) = lines.find(|(_, l)| !l.trim().is_empty()) {
            return Err(Error::data(at(n), "trailing data after term table"));
        }
        for (u, len) in units.iter().zip(&lengths) {
            if u64::from(u.length) != *len {
                return Err(Error::data(
                    source,
                    format!("unit {} length {} disagrees with postings ({len})", u.unit_id, u.length),
                ));
            }
        }
        Ok(Index::assemble(meta.level, units, terms, postings))
    }

    pub fn write_to(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn read_from(path: &Path) -> Result<Index> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Index::from_text(&path.display().to_string(), &text)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Meta {
    level: Level,
    units: usize,
    terms: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TermLine {
    term: String,
    postings: Vec<(u32, u32)>,
}
