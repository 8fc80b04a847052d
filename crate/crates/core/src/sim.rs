//! N-gram similarity metrics and gold-standard scoring of reformulations.
//!
//! Four measures are supported. Jaccard and Dice compare the *sets* of grams
//! (multiplicity ignored); Cosine and BlockDistance compare gram *count*
//! vectors. Scores are combined across gram orders with [`GramWeights`] and a
//! candidate is scored against a gold entry by its best-matching reference.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jsonl;
use crate::reform::{QuestionSeries, TargetType};
use crate::text::{ngrams, tokenize, NGramProfile, TokenStream};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MetricKind {
    #[default]
    Jaccard,
    Dice,
    Cosine,
    BlockDistance,
}

impl MetricKind {
    pub const ALL: [MetricKind; 4] = [
        MetricKind::Jaccard,
        MetricKind::Dice,
        MetricKind::Cosine,
        MetricKind::BlockDistance,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MetricKind::Jaccard => "jaccard",
            MetricKind::Dice => "dice",
            MetricKind::Cosine => "cosine",
            MetricKind::BlockDistance => "block-distance",
        }
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MetricKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        MetricKind::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| {
            Error::contract(format!(
                "unknown metric {s:?} (expected jaccard, dice, cosine or block-distance)"
            ))
        })
    }
}

/// Non-negative weights for the unigram, bigram and trigram scores.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GramWeights([f64; 3]);

impl GramWeights {
    pub fn new(unigram: f64, bigram: f64, trigram: f64) -> Result<Self> {
        let w = [unigram, bigram, trigram];
        if w.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(Error::contract(format!(
                "gram weights must be finite and non-negative, got {w:?}"
            )));
        }
        if w.iter().sum::<f64>() <= 0.0 {
            return Err(Error::contract("gram weights must not all be zero"));
        }
        Ok(GramWeights(w))
    }

    /// Weight for gram order `n` (1-based).
    pub fn get(&self, n: usize) -> f64 {
        self.0[n - 1]
    }

    pub fn as_array(&self) -> [f64; 3] {
        self.0
    }
}

impl Default for GramWeights {
    /// Unigrams 2, bigrams 1, trigrams 0.
    fn default() -> Self {
        GramWeights([2.0, 1.0, 0.0])
    }
}

/// Similarity in `[0, 1]` between two profiles of the same order.
///
/// Two empty profiles are identical (1); exactly one empty profile scores 0.
pub fn base_similarity(kind: MetricKind, a: &NGramProfile, b: &NGramProfile) -> Result<f64> {
    if a.n() != b.n() {
        return Err(Error::contract(format!(
            "cannot compare {}-gram and {}-gram profiles",
            a.n(),
            b.n()
        )));
    }
    match (a.is_empty(), b.is_empty()) {
        (true, true) => return Ok(1.0),
        (true, false) | (false, true) => return Ok(0.0),
        _ => {}
    }
    let value = match kind {
        MetricKind::Jaccard => {
            let shared = shared_grams(a, b);
            let union = a.distinct() + b.distinct() - shared;
            shared as f64 / union as f64
        }
        MetricKind::Dice => {
            let shared = shared_grams(a, b);
            (2 * shared) as f64 / (a.distinct() + b.distinct()) as f64
        }
        MetricKind::Cosine => {
            let dot: u64 = a.grams().iter().map(|(g, &ca)| (ca * b.count(g)) as u64).sum();
            let norm_a: u64 = a.grams().values().map(|&c| (c * c) as u64).sum();
            let norm_b: u64 = b.grams().values().map(|&c| (c * c) as u64).sum();
            // sqrt of the product keeps identical profiles at exactly 1.
            (dot as f64 / ((norm_a as f64) * (norm_b as f64)).sqrt()).min(1.0)
        }
        MetricKind::BlockDistance => {
            let mut l1 = 0usize;
            for (g, &ca) in a.grams() {
                l1 += ca.abs_diff(b.count(g));
            }
            for (g, &cb) in b.grams() {
                if a.count(g) == 0 {
                    l1 += cb;
                }
            }
            // One division keeps the result the correctly rounded ratio.
            let total = a.total() + b.total();
            (total - l1) as f64 / total as f64
        }
    };
    Ok(value)
}

fn shared_grams(a: &NGramProfile, b: &NGramProfile) -> usize {
    a.grams().keys().filter(|g| b.count(g) > 0).count()
}

/// Weighted combination of per-order similarities of two token streams.
/// Orders with zero weight are skipped entirely.
pub fn weighted_token_similarity(kind: MetricKind, a: &TokenStream, b: &TokenStream, weights: &GramWeights) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for n in 1..=3 {
        let w = weights.get(n);
        if w == 0.0 {
            continue;
        }
        // Orders 1..=3 are always valid and both profiles share `n`.
        let pa = ngrams(a, n).expect("valid order");
        let pb = ngrams(b, n).expect("valid order");
        num += w * base_similarity(kind, &pa, &pb).expect("same order");
        den += w;
    }
    num / den
}

/// `(w1·sim1 + w2·sim2 + w3·sim3) / (w1 + w2 + w3)` over the tokenized strings.
pub fn weighted_similarity(kind: MetricKind, s1: &str, s2: &str, weights: &GramWeights) -> f64 {
    weighted_token_similarity(kind, &tokenize(s1), &tokenize(s2), weights)
}

/// One question's hand-built reference reformulations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GoldStandardEntry {
    pub series_id: String,
    pub question_id: String,
    pub target: String,
    pub target_type: TargetType,
    pub question: String,
    pub reformulations: Vec<String>,
}

/// Best weighted similarity of `candidate` against any of the entry's
/// reformulations.
pub fn score_against_gold(
    candidate: &str,
    gold: &GoldStandardEntry,
    kind: MetricKind,
    weights: &GramWeights,
) -> Result<f64> {
    if gold.reformulations.is_empty() {
        return Err(Error::contract(format!(
            "gold entry {} has no reformulations",
            gold.question_id
        )));
    }
    let cand = tokenize(candidate);
    Ok(gold
        .reformulations
        .iter()
        .map(|r| weighted_token_similarity(kind, &cand, &tokenize(r), weights))
        .fold(0.0, f64::max))
}

/// Checks the gold invariants: non-empty reformulations and unique ids.
pub fn validate_gold(source: &str, gold: &[GoldStandardEntry]) -> Result<()> {
    let mut seen = BTreeMap::new();
    for (i, entry) in gold.iter().enumerate() {
        if entry.reformulations.is_empty() || entry.reformulations.iter().any(|r| r.trim().is_empty()) {
            return Err(Error::data(
                format!("{source}: record {}", i + 1),
                format!(
                    "question {} needs at least one non-empty reformulation",
                    entry.question_id
                ),
            ));
        }
        if seen
            .insert((entry.series_id.as_str(), entry.question_id.as_str()), i)
            .is_some()
        {
            return Err(Error::data(
                format!("{source}: record {}", i + 1),
                format!(
                    "duplicate gold entry for series {} question {}",
                    entry.series_id, entry.question_id
                ),
            ));
        }
    }
    Ok(())
}

pub fn read_gold(path: &Path) -> Result<Vec<GoldStandardEntry>> {
    let gold: Vec<GoldStandardEntry> = jsonl::read(path)?;
    validate_gold(&path.display().to_string(), &gold)?;
    Ok(gold)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DatasetKind {
    WithoutTarget,
    WithTarget,
    Identical,
}

impl DatasetKind {
    pub const ALL: [DatasetKind; 3] = [
        DatasetKind::WithoutTarget,
        DatasetKind::WithTarget,
        DatasetKind::Identical,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DatasetKind::WithoutTarget => "without-target",
            DatasetKind::WithTarget => "with-target",
            DatasetKind::Identical => "identical",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetItem {
    pub series_id: String,
    pub question_id: String,
    pub text: String,
}

/// A named list of candidate reformulations, one per question.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TestDataset {
    pub name: String,
    pub items: Vec<DatasetItem>,
}

/// Builds the without-target, with-target and identical datasets, one item
/// per gold entry, in gold order.
pub fn generate_test_datasets(series: &[QuestionSeries], gold: &[GoldStandardEntry]) -> Result<[TestDataset; 3]> {
    let mut lookup = HashMap::new();
    for s in series {
        for q in &s.questions {
            lookup.insert((s.series_id.as_str(), q.question_id.as_str()), (s, q));
        }
    }

    let unmatched: Vec<String> = gold
        .iter()
        .filter(|g| !lookup.contains_key(&(g.series_id.as_str(), g.question_id.as_str())))
        .map(|g| format!("{}/{}", g.series_id, g.question_id))
        .collect();
    if !unmatched.is_empty() {
        return Err(Error::data(
            "gold standard",
            format!("entries without a matching series question: {}", unmatched.join(", ")),
        ));
    }

    let build = |kind: DatasetKind| TestDataset {
        name: kind.name().to_string(),
        items: gold
            .iter()
            .map(|g| {
                let (s, q) = lookup[&(g.series_id.as_str(), g.question_id.as_str())];
                let text = match kind {
                    DatasetKind::WithoutTarget => q.text.clone(),
                    DatasetKind::WithTarget => format!("{} {}", q.text, s.target),
                    DatasetKind::Identical => g.reformulations[0].clone(),
                };
                DatasetItem {
                    series_id: g.series_id.clone(),
                    question_id: g.question_id.clone(),
                    text,
                }
            })
            .collect(),
    };
    Ok(DatasetKind::ALL.map(build))
}

/// Per-item scores of one dataset plus their summary.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetReport {
    pub name: String,
    pub scores: Vec<(String, f64)>,
}

impl DatasetReport {
    /// Arithmetic mean of the item scores; 0 for an empty dataset.
    pub fn mean(&self) -> f64 {
        if self.scores.is_empty() {
            return 0.0;
        }
        self.scores.iter().map(|(_, s)| s).sum::<f64>() / self.scores.len() as f64
    }

    pub fn min(&self) -> f64 {
        self.scores.iter().map(|(_, s)| *s).reduce(f64::min).unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.scores.iter().map(|(_, s)| *s).reduce(f64::max).unwrap_or(0.0)
    }
}

/// Scores every item against its gold entry (matched by series and
/// question id). Items are scored in parallel; output keeps item order.
pub fn evaluate_dataset(
    dataset: &TestDataset,
    gold: &[GoldStandardEntry],
    kind: MetricKind,
    weights: &GramWeights,
) -> Result<DatasetReport> {
    let by_id: HashMap<(&str, &str), &GoldStandardEntry> = gold
        .iter()
        .map(|g| ((g.series_id.as_str(), g.question_id.as_str()), g))
        .collect();
    let missing: Vec<String> = dataset
        .items
        .iter()
        .filter(|it| !by_id.contains_key(&(it.series_id.as_str(), it.question_id.as_str())))
        .map(|it| format!("{}/{}", it.series_id, it.question_id))
        .collect();
    if !missing.is_empty() {
        return Err(Error::data(
            format!("dataset {}", dataset.name),
            format!("items without a gold entry: {}", missing.join(", ")),
        ));
    }
    let scores = dataset
        .items
        .par_iter()
        .map(|it| {
            let g = by_id[&(it.series_id.as_str(), it.question_id.as_str())];
            score_against_gold(&it.text, g, kind, weights).map(|s| (it.question_id.clone(), s))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DatasetReport {
        name: dataset.name.clone(),
        scores,
    })
}
