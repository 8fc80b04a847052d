//! Retrieval scored by scanning every unit's words, with no index.

use std::collections::BTreeMap;

use qalab_core::corpus::{IndexUnit, Scheme, ScoredUnit};
use qalab_core::text::StopwordList;
use rand::Rng;

pub const VOCAB: [&str; 8] = ["the", "of", "red", "blue", "green", "fox", "owl", "cat"];

/// Units `u00`, `u01`, ... whose texts are space-separated vocabulary words.
pub fn units_from(texts: Vec<Vec<&str>>) -> Vec<IndexUnit> {
    texts
        .into_iter()
        .enumerate()
        .map(|(i, words)| IndexUnit {
            unit_id: format!("u{i:02}"),
            text: words.join(" "),
            parent_doc_id: format!("u{i:02}"),
        })
        .collect()
}

/// Up to 50 units of up to 11 words each.
pub fn random_corpus(rng: &mut impl Rng) -> Vec<IndexUnit> {
    let texts = (0..rng.gen_range(0..=50))
        .map(|_| {
            (0..rng.gen_range(0..12))
                .map(|_| VOCAB[rng.gen_range(0..VOCAB.len())])
                .collect()
        })
        .collect();
    units_from(texts)
}

pub fn random_query(rng: &mut impl Rng) -> String {
    (0..rng.gen_range(0..5))
        .map(|_| VOCAB[rng.gen_range(0..VOCAB.len())])
        .collect::<Vec<_>>()
        .join(" ")
}

/// Scores every unit with positive score and keeps the top `n` by
/// descending score, then ascending unit id. Texts must be space-separated
/// lowercase words.
pub fn linear_scan(
    units: &[IndexUnit],
    query: &str,
    stops: &StopwordList,
    n: usize,
    scheme: Scheme,
) -> Vec<ScoredUnit> {
    let docs: Vec<Vec<&str>> = units
        .iter()
        .map(|u| u.text.split(' ').filter(|w| !w.is_empty()).collect())
        .collect();
    let total: usize = docs.iter().map(Vec::len).sum();
    let count = units.len() as f64;
    let avg = if units.is_empty() { 0.0 } else { total as f64 / count };
    let mut qtf: BTreeMap<&str, usize> = BTreeMap::new();
    for w in query.split(' ').filter(|w| !w.is_empty() && !stops.contains(w)) {
        *qtf.entry(w).or_default() += 1;
    }
    let mut scored = Vec::new();
    for (u, words) in units.iter().zip(&docs) {
        let mut score = 0.0;
        for (&term, &q) in &qtf {
            let tf = words.iter().filter(|w| **w == term).count() as f64;
            if tf == 0.0 {
                continue;
            }
            let df = docs.iter().filter(|d| d.contains(&term)).count() as f64;
            let w = match scheme {
                Scheme::TfIdf => tf * (1.0 + count / df).ln(),
                Scheme::Bm25 { k1, b } => {
                    let idf = (1.0 + (count - df + 0.5) / (df + 0.5)).ln();
                    let norm = words.len() as f64 / avg;
                    idf * tf * (k1 + 1.0) / (tf + k1 * (1.0 - b + b * norm))
                }
            };
            score += q as f64 * w;
        }
        if score > 0.0 {
            scored.push(ScoredUnit {
                unit_id: u.unit_id.clone(),
                score,
            });
        }
    }
    scored.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.unit_id.cmp(&b.unit_id)));
    scored.truncate(n);
    scored
}
