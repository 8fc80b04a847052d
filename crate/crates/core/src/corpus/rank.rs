//! Bag-of-words ranking over an [`Index`].
//!
//! Two schemes stand in for different engine configurations:
//!
//! * `TfIdf`: `score(u) = Σ_t qtf(t) · tf(t,u) · ln(1 + N/df(t))`, unit length
//!   ignored.
//! * `Bm25`: `score(u) = Σ_t qtf(t) · idf(t) · tf·(k1+1) / (tf + k1·(1 − b + b·|u|/avgdl))`
//!   with `idf(t) = ln(1 + (N − df + 0.5)/(df + 0.5))`, which is never negative.
//!
//! Query terms are summed in lexicographic order so that scores are
//! bit-for-bit reproducible.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::corpus::Index;
use crate::error::{Error, Result};
use crate::text::{strip_stopwords, tokenize, StopwordList};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scheme", rename_all = "lowercase")]
pub enum Scheme {
    TfIdf,
    Bm25 { k1: f64, b: f64 },
}

impl Scheme {
    pub const BM25_DEFAULT: Scheme = Scheme::Bm25 { k1: 1.2, b: 0.75 };

    pub fn validate(&self) -> Result<()> {
        match *self {
            Scheme::TfIdf => Ok(()),
            Scheme::Bm25 { k1, b } => {
                if !(k1.is_finite() && k1 > 0.0) {
                    return Err(Error::contract(format!("BM25 k1 must be > 0, got {k1}")));
                }
                if !(0.0..=1.0).contains(&b) {
                    return Err(Error::contract(format!("BM25 b must be in [0, 1], got {b}")));
                }
                Ok(())
            }
        }
    }

    /// Weight of a single term occurrence pattern in one unit.
    #[inline]
    pub fn term_weight(&self, tf: f64, df: f64, units: f64, unit_len: f64, avg_len: f64) -> f64 {
        match *self {
            Scheme::TfIdf => tf * (1.0 + units / df).ln(),
            Scheme::Bm25 { k1, b } => {
                let idf = (1.0 + (units - df + 0.5) / (df + 0.5)).ln();
                let norm = if avg_len > 0.0 { unit_len / avg_len } else { 0.0 };
                idf * (tf * (k1 + 1.0)) / (tf + k1 * (1.0 - b + b * norm))
            }
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scheme::TfIdf => write!(f, "tfidf"),
            Scheme::Bm25 { k1, b } => write!(f, "bm25(k1={k1}, b={b})"),
        }
    }
}

/// A named ranking configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RankingConfig {
    pub name: String,
    pub scheme: Scheme,
}

impl RankingConfig {
    pub fn new(name: impl Into<String>, scheme: Scheme) -> Result<Self> {
        scheme.validate()?;
        let name = name.into();
        if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
            return Err(Error::contract(format!(
                "ranking config name {name:?} must be non-empty ASCII letters, digits, '-' or '_'"
            )));
        }
        Ok(RankingConfig { name, scheme })
    }

    pub fn tfidf(name: impl Into<String>) -> Self {
        RankingConfig::new(name, Scheme::TfIdf).expect("valid tfidf config")
    }

    pub fn bm25(name: impl Into<String>) -> Self {
        RankingConfig::new(name, Scheme::BM25_DEFAULT).expect("valid bm25 config")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredUnit {
    pub unit_id: String,
    pub score: f64,
}

/// Query terms after stopword removal, with multiplicities.
pub(crate) fn query_bag(query: &str, stops: &StopwordList) -> BTreeMap<String, usize> {
    let mut bag = BTreeMap::new();
    for t in strip_stopwords(&tokenize(query), stops).into_vec() {
        *bag.entry(t).or_insert(0) += 1;
    }
    bag
}

/// Top `n` units with positive score, by descending score then ascending
/// unit id.
pub fn retrieve(
    index: &Index,
    query: &str,
    stops: &StopwordList,
    n: usize,
    config: &RankingConfig,
) -> Result<Vec<ScoredUnit>> {
    if n == 0 {
        return Err(Error::contract("retrieval cutoff must be at least 1"));
    }
    let units = index.unit_count() as f64;
    let avg = index.average_length();
    let mut scores: HashMap<u32, f64> = HashMap::new();
    for (term, qtf) in query_bag(query, stops) {
        let postings = index.postings(&term);
        let df = postings.len() as f64;
        for p in postings {
            let w = config
                .scheme
                .term_weight(f64::from(p.tf), df, units, f64::from(index.unit_length(p.unit)), avg);
            *scores.entry(p.unit).or_insert(0.0) += qtf as f64 * w;
        }
    }
    let mut ranked: Vec<(u32, f64)> = scores.into_iter().filter(|&(_, s)| s > 0.0).collect();
    // Unit positions follow unit-id order, so ties break by ascending id.
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    ranked.truncate(n);
    Ok(ranked
        .into_iter()
        .map(|(pos, score)| ScoredUnit {
            unit_id: index.unit_id(pos).to_string(),
            score,
        })
        .collect())
}
