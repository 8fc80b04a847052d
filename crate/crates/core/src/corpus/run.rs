use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{retrieve, Index, Level, RankingConfig, ScoredUnit};
use crate::error::{Error, Result};
use crate::questions::QuestionRecord;
use crate::text::StopwordList;

/// Ranked results of one configuration at one level for a question set.
#[derive(Debug, Clone, PartialEq)]
pub struct RetrievalRun {
    pub run_id: String,
    pub config: String,
    pub level: Level,
    pub cutoff: usize,
    /// Question id to ranked units; every question of the set is present,
    /// possibly with no results.
    pub results: BTreeMap<String, Vec<ScoredUnit>>,
}

impl RetrievalRun {
    pub fn question_ids(&self) -> impl Iterator<Item = &str> {
        self.results.keys().map(String::as_str)
    }
}

/// Retrieves the top `cutoff` units for every question, in parallel.
pub fn retrieve_run(
    run_id: &str,
    index: &Index,
    questions: &[QuestionRecord],
    stops: &StopwordList,
    cutoff: usize,
    config: &RankingConfig,
) -> Result<RetrievalRun> {
    let results = questions
        .par_iter()
        .map(|q| Ok((q.question_id.clone(), retrieve(index, &q.text, stops, cutoff, config)?)))
        .collect::<Result<BTreeMap<_, _>>>()?;
    Ok(RetrievalRun {
        run_id: run_id.to_string(),
        config: config.name.clone(),
        level: index.level(),
        cutoff,
        results,
    })
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RunHeader {
    run_id: String,
    config: String,
    level: Level,
    cutoff: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RunLine {
    question_id: String,
    results: Vec<(String, f64)>,
}

/// Run file: a header record followed by one record per question.
pub fn render_run(run: &RetrievalRun) -> String {
    let mut out = String::new();
    let header = RunHeader {
        run_id: run.run_id.clone(),
        config: run.config.clone(),
        level: run.level,
        cutoff: run.cutoff,
    };
    out.push_str(&serde_json::to_string(&header).expect("header serializes"));
    out.push('\n');
    for (qid, results) in &run.results {
        let line = RunLine {
            question_id: qid.clone(),
            results: results.iter().map(|s| (s.unit_id.clone(), s.score)).collect(),
        };
        out.push_str(&serde_json::to_string(&line).expect("run line serializes"));
        out.push('\n');
    }
    out
}

pub fn parse_run(source: &str, text: &str) -> Result<RetrievalRun> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let at = |n: usize| format!("{source}:{}", n + 1);
    let (n, first) = lines.next().ok_or_else(|| Error::data(source, "empty run file"))?;
    let header: RunHeader = serde_json::from_str(first).map_err(|e| Error::data(at(n), e.to_string()))?;
    let mut results = BTreeMap::new();
    for (n, line) in lines {
        let rec: RunLine = serde_json::from_str(line).map_err(|e| Error::data(at(n), e.to_string()))?;
        if rec.results.len() > header.cutoff {
            return Err(Error::data(at(n), format!("more than {} results", header.cutoff)));
        }
        if rec.results.windows(2).any(|w| w[1].1 > w[0].1) {
            return Err(Error::data(at(n), "scores must be non-increasing"));
        }
        let ranked = rec
            .results
            .into_iter()
            .map(|(unit_id, score)| ScoredUnit { unit_id, score })
            .collect();
        if results.insert(rec.question_id.clone(), ranked).is_some() {
            return Err(Error::data(at(n), format!("duplicate question {}", rec.question_id)));
        }
    }
    Ok(RetrievalRun {
        run_id: header.run_id,
        config: header.config,
        level: header.level,
        cutoff: header.cutoff,
        results,
    })
}

pub fn read_run(path: &Path) -> Result<RetrievalRun> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_run(&path.display().to_string(), &text)
}

pub fn write_run(path: &Path, run: &RetrievalRun) -> Result<()> {
    std::fs::write(path, render_run(run)).map_err(|e| Error::io(path, e))
}
