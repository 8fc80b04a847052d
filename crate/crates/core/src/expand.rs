//! Query expansion experiments on difficult questions.
//!
//! * Candidate extension words come from answer-bearing passages: every
//!   passage token that is not a stopword, not a question token and not part
//!   of a pattern-matched answer.
//! * A candidate is a helpful extension word (HEW) when appending it to the
//!   question lifts redundancy@n above zero.
//! * Blind relevance feedback appends the `k` most frequent terms of the
//!   top `r` initially retrieved units.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{retrieve, Index, Level, RankingConfig, UnitStore};
use crate::error::{Error, Result};
use crate::eval::{coverage, judge_ranked, AnswerKeys, CompiledKey, DifficultSet, JudgedRun, Mode};
use crate::questions::QuestionRecord;
use crate::text::{token_spans, tokenize, StopwordList};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtensionCandidate {
    pub question_id: String,
    pub word: String,
    pub source_unit_id: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtensionOutcome {
    pub question_id: String,
    pub word: String,
    pub redundancy_before: usize,
    pub redundancy_after: usize,
    pub helpful: bool,
}

/// Retrieval and judging settings shared by the expansion experiments.
#[derive(Debug, Clone, Copy)]
pub struct ExpansionContext<'a> {
    pub index: &'a Index,
    /// Units of `index`, used to judge retrieved ids.
    pub units: &'a UnitStore,
    pub keys: &'a AnswerKeys,
    pub stops: &'a StopwordList,
    pub config: &'a RankingConfig,
    pub n: usize,
    pub mode: Mode,
}

impl ExpansionContext<'_> {
    /// Redundancy@n of `query` judged against `key`.
    pub fn redundancy(&self, question_id: &str, query: &str, key: &CompiledKey) -> Result<usize> {
        let ranked = retrieve(self.index, query, self.stops, self.n, self.config)?;
        let judged = judge_ranked(question_id, &ranked, key, self.units)?;
        Ok(judged.iter().filter(|j| j.positive(self.mode)).count())
    }
}

fn token_set(text: &str) -> HashSet<String> {
    tokenize(text).into_vec().into_iter().collect()
}

/// Candidate words from every passage that matches one of the question's
/// answer patterns. Passages are scanned in unit-id order and each word is
/// reported once, with the first passage it was seen in.
pub fn extract_candidates(
    question: &QuestionRecord,
    keys: &AnswerKeys,
    passages: &UnitStore,
    stops: &StopwordList,
) -> Result<Vec<ExtensionCandidate>> {
    let key = keys.require(&question.question_id)?;
    let question_tokens = token_set(&question.text);
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for unit in passages.iter() {
        let ranges = key.match_ranges(&unit.text);
        if ranges.is_empty() {
            continue;
        }
        let answer_tokens: HashSet<String> = ranges.iter().flat_map(|r| token_set(&unit.text[r.clone()])).collect();
        for span in token_spans(&unit.text) {
            let w = span.token;
            if stops.contains(&w) || question_tokens.contains(&w) || answer_tokens.contains(&w) {
                continue;
            }
            if seen.insert(w.clone()) {
                out.push(ExtensionCandidate {
                    question_id: question.question_id.clone(),
                    word: w,
                    source_unit_id: unit.unit_id.clone(),
                });
            }
        }
    }
    Ok(out)
}

/// Re-runs the question with `word` appended and reports whether that
/// lifts redundancy@n above zero.
pub fn test_extension(ctx: &ExpansionContext<'_>, question: &QuestionRecord, word: &str) -> Result<ExtensionOutcome> {
    if word.trim().is_empty() {
        return Err(Error::contract("extension word must be non-empty"));
    }
    let key = ctx.keys.require(&question.question_id)?;
    let before = ctx.redundancy(&question.question_id, &question.text, key)?;
    let after = ctx.redundancy(&question.question_id, &format!("{} {word}", question.text), key)?;
    Ok(ExtensionOutcome {
        question_id: question.question_id.clone(),
        word: word.to_string(),
        redundancy_before: before,
        redundancy_after: after,
        helpful: after > 0,
    })
}

/// Helpful extension words of every difficult question, sorted by word.
/// Every difficult question gets an entry, possibly empty. Questions that
/// already have a positive redundancy@n without expansion get no words,
/// since no extension can lift them above zero.
pub fn mine_hew(
    ctx: &ExpansionContext<'_>,
    difficult: &DifficultSet,
    questions: &[QuestionRecord],
    passages: &UnitStore,
) -> Result<BTreeMap<String, Vec<ExtensionOutcome>>> {
    let by_id: BTreeMap<&str, &QuestionRecord> = questions.iter().map(|q| (q.question_id.as_str(), q)).collect();
    let mut jobs = Vec::new();
    for qid in &difficult.question_ids {
        let q = by_id
            .get(qid.as_str())
            .ok_or_else(|| Error::data("question set", format!("difficult question {qid} not found")))?;
        let key = ctx.keys.require(qid)?;
        if ctx.redundancy(qid, &q.text, key)? > 0 {
            continue;
        }
        for c in extract_candidates(q, ctx.keys, passages, ctx.stops)? {
            jobs.push((*q, c.word));
        }
    }
    let outcomes = jobs
        .par_iter()
        .map(|(q, w)| test_extension(ctx, q, w))
        .collect::<Result<Vec<_>>>()?;
    let mut hew: BTreeMap<String, Vec<ExtensionOutcome>> =
        difficult.question_ids.iter().map(|q| (q.clone(), Vec::new())).collect();
    for o in outcomes.into_iter().filter(|o| o.helpful) {
        hew.get_mut(&o.question_id).expect("difficult question").push(o);
    }
    for list in hew.values_mut() {
        list.sort_by(|a, b| a.word.cmp(&b.word));
    }
    Ok(hew)
}

/// Feedback terms harvested for one question.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RfSelection {
    pub question_id: String,
    pub r: usize,
    /// (term, aggregate tf) by descending tf, then term.
    pub terms: Vec<(String, u64)>,
}

impl RfSelection {
    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.terms.iter().map(|(t, _)| t.as_str())
    }

    /// The question text with each selected term appended once.
    pub fn expand(&self, question: &str) -> String {
        let mut q = question.to_string();
        for w in self.words() {
            q.push(' ');
            q.push_str(w);
        }
        q
    }
}

/// The `k` most frequent non-stopword, non-question terms of the top `r`
/// units retrieved for the question.
pub fn blind_rf_terms(
    index: &Index,
    question: &QuestionRecord,
    r: usize,
    k: usize,
    stops: &StopwordList,
    config: &RankingConfig,
) -> Result<RfSelection> {
    if r == 0 || k == 0 {
        return Err(Error::contract(format!(
            "feedback depth r and term count k must be >= 1 (r={r}, k={k})"
        )));
    }
    let question_tokens = token_set(&question.text);
    let mut tf: BTreeMap<&str, u64> = BTreeMap::new();
    for hit in retrieve(index, &question.text, stops, r, config)? {
        let pos = index.position(&hit.unit_id).expect("retrieved unit is indexed");
        for (term, count) in index.unit_terms(pos) {
            if !stops.contains(term) && !question_tokens.contains(term) {
                *tf.entry(term).or_insert(0) += u64::from(count);
            }
        }
    }
    let mut terms: Vec<(String, u64)> = tf.into_iter().map(|(t, c)| (t.to_string(), c)).collect();
    terms.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    terms.truncate(k);
    Ok(RfSelection {
        question_id: question.question_id.clone(),
        r,
        terms,
    })
}

/// A column of the relevance-feedback coverage grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RfColumn {
    Expanded { r: usize, level: Level },
    Baseline,
}

impl RfColumn {
    pub fn label(&self) -> String {
        match self {
            RfColumn::Expanded { r, level } => format!("r={r} {}", level.short()),
            RfColumn::Baseline => "Baseline".to_string(),
        }
    }
}

/// Coverage at each rank (rows) for each feedback setting (columns).
#[derive(Debug, Clone, PartialEq)]
pub struct RfGrid {
    pub ranks: Vec<usize>,
    pub columns: Vec<RfColumn>,
    pub cells: Vec<Vec<f64>>,
}

impl RfGrid {
    pub fn baseline(&self, row: usize) -> f64 {
        let col = self
            .columns
            .iter()
            .position(|c| *c == RfColumn::Baseline)
            .expect("baseline column");
        self.cells[row][col]
    }
}

/// Inputs of the relevance-feedback experiment.
///
/// Feedback terms are harvested from each index in `feedback` (one per
/// level) and the expanded queries are run and judged against `ctx.index`.
#[derive(Debug, Clone)]
pub struct RfExperiment<'a> {
    pub ctx: ExpansionContext<'a>,
    pub feedback: Vec<&'a Index>,
    pub rs: Vec<usize>,
    pub k: usize,
    pub ranks: Vec<usize>,
}

fn judged_queries(
    ctx: &ExpansionContext<'_>,
    queries: &[(&QuestionRecord, String)],
    depth: usize,
    label: &str,
) -> Result<JudgedRun> {
    let judgements = queries
        .par_iter()
        .map(|(q, text)| {
            let key = ctx.keys.require(&q.question_id)?;
            let ranked = retrieve(ctx.index, text, ctx.stops, depth, ctx.config)?;
            Ok((
                q.question_id.clone(),
                judge_ranked(&q.question_id, &ranked, key, ctx.units)?,
            ))
        })
        .collect::<Result<BTreeMap<_, _>>>()?;
    Ok(JudgedRun {
        run_id: label.to_string(),
        config: ctx.config.name.clone(),
        level: ctx.index.level(),
        cutoff: depth,
        judgements,
    })
}

/// Coverage (in `ctx.mode`) of the unexpanded questions and of each
/// (r, feedback level) expansion, at every rank.
pub fn rf_experiment(exp: &RfExperiment<'_>, questions: &[QuestionRecord]) -> Result<RfGrid> {
    let depth = *exp
        .ranks
        .iter()
        .max()
        .ok_or_else(|| Error::contract("the coverage grid needs at least one rank"))?;
    if exp.ranks.contains(&0) {
        return Err(Error::contract("ranks must be >= 1"));
    }
    let mut columns = Vec::new();
    let mut runs = Vec::new();
    for &r in &exp.rs {
        for fb in &exp.feedback {
            let queries = questions
                .par_iter()
                .map(|q| {
                    Ok((
                        q,
                        blind_rf_terms(fb, q, r, exp.k, exp.ctx.stops, exp.ctx.config)?.expand(&q.text),
                    ))
                })
                .collect::<Result<Vec<_>>>()?;
            let column = RfColumn::Expanded { r, level: fb.level() };
            runs.push(judged_queries(&exp.ctx, &queries, depth, &column.label())?);
            columns.push(column);
        }
    }
    let base: Vec<_> = questions.iter().map(|q| (q, q.text.clone())).collect();
    runs.push(judged_queries(&exp.ctx, &base, depth, "Baseline")?);
    columns.push(RfColumn::Baseline);

    let cells = exp
        .ranks
        .iter()
        .map(|&n| {
            runs.iter()
                .map(|run| coverage(run, n, exp.ctx.mode))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RfGrid {
        ranks: exp.ranks.clone(),
        columns,
        cells,
    })
}

/// Row labels of the intersection statistics, in report order.
pub const INTERSECTION_ROWS: [&str; 3] = ["HEW found in IRT", "IRT containing HEW", "RF words in HEW"];

/// Overlap between helpful words, initially retrieved texts (IRT) and
/// feedback words, as pooled percentages in [0, 100].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntersectionStats {
    pub hew_in_irt: f64,
    pub irt_with_hew: f64,
    pub rf_in_hew: f64,
}

impl IntersectionStats {
    pub fn as_array(&self) -> [f64; 3] {
        [self.hew_in_irt, self.irt_with_hew, self.rf_in_hew]
    }
}

fn percent(hits: usize, pool: usize) -> f64 {
    if pool == 0 {
        0.0
    } else {
        100.0 * hits as f64 / pool as f64
    }
}

/// Pools counts over questions:
///
/// * HEW found in IRT: helpful words occurring in some IRT unit of their
///   question, over all helpful words.
/// * IRT containing HEW: IRT units containing a helpful word of their
///   question, over all IRT units.
/// * RF words in HEW: feedback words that are helpful words of their
///   question, over all feedback words.
///
/// An empty pool gives 0. All three maps must have the same question ids.
pub fn intersection_stats(
    hew: &BTreeMap<String, BTreeSet<String>>,
    irt: &BTreeMap<String, Vec<String>>,
    rf: &BTreeMap<String, Vec<String>>,
) -> Result<IntersectionStats> {
    let ids: BTreeSet<&String> = hew.keys().collect();
    for (name, other) in [
        ("IRT", irt.keys().collect::<BTreeSet<_>>()),
        ("RF", rf.keys().collect()),
    ] {
        if other != ids {
            let diff: Vec<&str> = ids.symmetric_difference(&other).map(|s| s.as_str()).collect();
            return Err(Error::data(
                "intersection statistics",
                format!("HEW and {name} question sets differ: {}", diff.join(", ")),
            ));
        }
    }
    let (mut hew_hits, mut hew_pool) = (0, 0);
    let (mut irt_hits, mut irt_pool) = (0, 0);
    let (mut rf_hits, mut rf_pool) = (0, 0);
    for (qid, words) in hew {
        let texts: Vec<HashSet<String>> = irt[qid].iter().map(|t| token_set(t)).collect();
        hew_pool += words.len();
        hew_hits += words.iter().filter(|w| texts.iter().any(|t| t.contains(*w))).count();
        irt_pool += texts.len();
        irt_hits += texts.iter().filter(|t| words.iter().any(|w| t.contains(w))).count();
        rf_pool += rf[qid].len();
        rf_hits += rf[qid].iter().filter(|w| words.contains(*w)).count();
    }
    Ok(IntersectionStats {
        hew_in_irt: percent(hew_hits, hew_pool),
        irt_with_hew: percent(irt_hits, irt_pool),
        rf_in_hew: percent(rf_hits, rf_pool),
    })
}
