use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{Level, RetrievalRun, ScoredUnit, UnitStore};
use crate::error::{Error, Result};
use crate::eval::{AnswerKeys, CompiledKey, Mode};

/// Verdict on one retrieved unit. `rank` is 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Judgement {
    pub question_id: String,
    pub unit_id: String,
    pub rank: usize,
    pub lenient: bool,
    pub strict: bool,
}

impl Judgement {
    pub fn positive(&self, mode: Mode) -> bool {
        match mode {
            Mode::Strict => self.strict,
            Mode::Lenient => self.lenient,
        }
    }
}

/// A run together with the judgement of every retrieved unit.
#[derive(Debug, Clone, PartialEq)]
pub struct JudgedRun {
    pub run_id: String,
    pub config: String,
    pub level: Level,
    pub cutoff: usize,
    /// Question id to judgements in rank order; questions with no results
    /// map to an empty list.
    pub judgements: BTreeMap<String, Vec<Judgement>>,
}

impl JudgedRun {
    pub fn question_ids(&self) -> impl Iterator<Item = &str> {
        self.judgements.keys().map(String::as_str)
    }

    pub fn question_count(&self) -> usize {
        self.judgements.len()
    }

    /// All judgements, by question id then rank.
    pub fn iter(&self) -> impl Iterator<Item = &Judgement> {
        self.judgements.values().flatten()
    }

    /// Number of positive judgements for one question among its top `n`.
    pub fn positives(&self, question_id: &str, n: usize, mode: Mode) -> usize {
        self.judgements
            .get(question_id)
            .map_or(0, |js| js.iter().take(n).filter(|j| j.positive(mode)).count())
    }
}

/// Judges one ranked list. Units must resolve in `units`.
pub fn judge_ranked(
    question_id: &str,
    ranked: &[ScoredUnit],
    key: &CompiledKey,
    units: &UnitStore,
) -> Result<Vec<Judgement>> {
    ranked
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let unit = units.get(&s.unit_id).ok_or_else(|| {
                Error::data(
                    format!("question {question_id}"),
                    format!("retrieved unit {} is not in the corpus", s.unit_id),
                )
            })?;
            let lenient = key.matches(&unit.text);
            Ok(Judgement {
                question_id: question_id.to_string(),
                unit_id: s.unit_id.clone(),
                rank: i + 1,
                lenient,
                strict: lenient && key.is_judged(&unit.parent_doc_id),
            })
        })
        .collect()
}

/// Judges every retrieved unit of `run`, in parallel over questions.
pub fn judge(run: &RetrievalRun, keys: &AnswerKeys, units: &UnitStore) -> Result<JudgedRun> {
    let judgements = run
        .results
        .par_iter()
        .map(|(qid, ranked)| Ok((qid.clone(), judge_ranked(qid, ranked, keys.require(qid)?, units)?)))
        .collect::<Result<BTreeMap<_, _>>>()?;
    Ok(JudgedRun {
        run_id: run.run_id.clone(),
        config: run.config.clone(),
        level: run.level,
        cutoff: run.cutoff,
        judgements,
    })
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    run_id: String,
    config: String,
    level: Level,
    cutoff: usize,
    questions: Vec<String>,
}

impl JudgedRun {
    /// Line-delimited form: a header naming the run and its question set,
    /// then one judgement per line.
    pub fn to_text(&self) -> String {
        let header = Header {
            run_id: self.run_id.clone(),
            config: self.config.clone(),
            level: self.level,
            cutoff: self.cutoff,
            questions: self.judgements.keys().cloned().collect(),
        };
        let mut out = serde_json::to_string(&header).expect("header serializes");
        out.push('\n');
        for j in self.iter() {
            out.push_str(&serde_json::to_string(j).expect("judgement serializes"));
            out.push('\n');
        }
        out
    }

    pub fn from_text(source: &str, text: &str) -> Result<JudgedRun> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let at = |n: usize| format!("{source}:{}", n + 1);
        let (n, first) = lines
            .next()
            .ok_or_else(|| Error::data(source, "empty judgement file"))?;
        let header: Header = serde_json::from_str(first).map_err(|e| Error::data(at(n), e.to_string()))?;
        let mut judgements: BTreeMap<String, Vec<Judgement>> =
            header.questions.iter().map(|q| (q.clone(), Vec::new())).collect();
        for (n, line) in lines {
            let j: Judgement = serde_json::from_str(line).map_err(|e| Error::data(at(n), e.to_string()))?;
            if j.strict && !j.lenient {
                return Err(Error::data(at(n), "strict judgement that is not lenient"));
            }
            let Some(list) = judgements.get_mut(&j.question_id) else {
                return Err(Error::data(at(n), format!("question {} not in header", j.question_id)));
            };
            if j.rank != list.len() + 1 || j.rank > header.cutoff {
                return Err(Error::data(at(n), format!("unexpected rank {}", j.rank)));
            }
            list.push(j);
        }
        Ok(JudgedRun {
            run_id: header.run_id,
            config: header.config,
            level: header.level,
            cutoff: header.cutoff,
            judgements,
        })
    }
}
