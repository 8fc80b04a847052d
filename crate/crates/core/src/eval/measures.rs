use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::{JudgedRun, Mode};
use crate::questions::QuestionRecord;

fn check_depth(run: &JudgedRun, n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::contract("evaluation depth n must be at least 1"));
    }
    if n > run.cutoff {
        return Err(Error::contract(format!(
            "evaluation depth {n} exceeds the cutoff {} of run {}",
            run.cutoff, run.run_id
        )));
    }
    Ok(())
}

/// Fraction of questions with at least one positive judgement in the top
/// `n`. A run without questions has coverage 0.
pub fn coverage(run: &JudgedRun, n: usize, mode: Mode) -> Result<f64> {
    check_depth(run, n)?;
    if run.question_count() == 0 {
        return Ok(0.0);
    }
    let covered = run.question_ids().filter(|q| run.positives(q, n, mode) > 0).count();
    Ok(covered as f64 / run.question_count() as f64)
}

/// Per-question redundancy@n and its macro average.
#[derive(Debug, Clone, PartialEq)]
pub struct Redundancy {
    pub per_question: BTreeMap<String, usize>,
    pub mean: f64,
}

/// Counts positive judgements per question in the top `n`. Each retrieved
/// unit counts once, so two answer-bearing passages of one document count
/// twice.
pub fn redundancy(run: &JudgedRun, n: usize, mode: Mode) -> Result<Redundancy> {
    check_depth(run, n)?;
    let per_question: BTreeMap<String, usize> = run
        .question_ids()
        .map(|q| (q.to_string(), run.positives(q, n, mode)))
        .collect();
    let mean = if per_question.is_empty() {
        0.0
    } else {
        per_question.values().sum::<usize>() as f64 / per_question.len() as f64
    };
    Ok(Redundancy { per_question, mean })
}

/// Fails with a data error naming the symmetric difference when the runs
/// do not cover the same questions.
fn check_aligned<'a>(runs: impl IntoIterator<Item = &'a JudgedRun>) -> Result<()> {
    let mut runs = runs.into_iter();
    let Some(first) = runs.next() else {
        return Ok(());
    };
    let expected: BTreeSet<&str> = first.question_ids().collect();
    for run in runs {
        let got: BTreeSet<&str> = run.question_ids().collect();
        if got != expected {
            let diff: Vec<&str> = expected.symmetric_difference(&got).copied().collect();
            return Err(Error::data(
                format!("runs {} and {}", first.run_id, run.run_id),
                format!("question sets differ: {}", diff.join(", ")),
            ));
        }
    }
    Ok(())
}

/// Redundancy@n of every question under each selected (run, mode) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct RedundancyTable {
    pub n: usize,
    pub columns: Vec<(String, Mode)>,
    /// Question id to one count per column.
    pub rows: BTreeMap<String, Vec<usize>>,
}

pub fn redundancy_table(runs: &[&JudgedRun], modes: &[Mode], n: usize) -> Result<RedundancyTable> {
    check_aligned(runs.iter().copied())?;
    let mut columns = Vec::new();
    let mut rows: BTreeMap<String, Vec<usize>> = runs
        .first()
        .map(|r| r.question_ids().map(|q| (q.to_string(), Vec::new())).collect())
        .unwrap_or_default();
    for run in runs {
        check_depth(run, n)?;
        for &mode in modes {
            columns.push((run.run_id.clone(), mode));
            for (q, counts) in rows.iter_mut() {
                counts.push(run.positives(q, n, mode));
            }
        }
    }
    Ok(RedundancyTable { n, columns, rows })
}

/// Arithmetic mean of one question's redundancy over the table's columns.
pub fn mean_redundancy(question_id: &str, table: &RedundancyTable) -> Result<f64> {
    if table.columns.is_empty() {
        return Err(Error::contract(
            "mean redundancy needs at least one (run, mode) selection",
        ));
    }
    let counts = table
        .rows
        .get(question_id)
        .ok_or_else(|| Error::data("redundancy table", format!("unknown question {question_id}")))?;
    Ok(counts.iter().sum::<usize>() as f64 / counts.len() as f64)
}

/// Which measures decide that a question is difficult.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DifficultPolicy {
    pub threshold: f64,
    pub runs: Vec<String>,
    pub modes: Vec<Mode>,
    pub n: usize,
}

/// Questions whose mean redundancy is at or below the policy threshold,
/// with the policy that selected them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DifficultSet {
    pub question_ids: Vec<String>,
    pub policy: DifficultPolicy,
}

pub fn find_difficult(runs: &[JudgedRun], policy: &DifficultPolicy) -> Result<DifficultSet> {
    if !policy.threshold.is_finite() || policy.threshold < 0.0 {
        return Err(Error::contract(format!(
            "threshold must be finite and >= 0, got {}",
            policy.threshold
        )));
    }
    let selected = policy
        .runs
        .iter()
        .map(|id| {
            runs.iter()
                .find(|r| &r.run_id == id)
                .ok_or_else(|| Error::contract(format!("policy names unknown run {id}")))
        })
        .collect::<Result<Vec<_>>>()?;
    let table = redundancy_table(&selected, &policy.modes, policy.n)?;
    let mut question_ids = Vec::new();
    for q in table.rows.keys() {
        if mean_redundancy(q, &table)? <= policy.threshold {
            question_ids.push(q.clone());
        }
    }
    Ok(DifficultSet {
        question_ids,
        policy: policy.clone(),
    })
}

/// The difficult questions as a question set, in the order of `questions`.
pub fn export_question_set(set: &DifficultSet, questions: &[QuestionRecord]) -> Result<Vec<QuestionRecord>> {
    let known: BTreeSet<&str> = questions.iter().map(|q| q.question_id.as_str()).collect();
    if let Some(missing) = set.question_ids.iter().find(|q| !known.contains(q.as_str())) {
        return Err(Error::data(
            "question set",
            format!("difficult question {missing} not found"),
        ));
    }
    let wanted: BTreeSet<&str> = set.question_ids.iter().map(String::as_str).collect();
    Ok(questions
        .iter()
        .filter(|q| wanted.contains(q.question_id.as_str()))
        .cloned()
        .collect())
}

/// Coverage and mean redundancy per rank (rows) and (run, mode) (columns).
#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub ranks: Vec<usize>,
    pub columns: Vec<(String, Mode)>,
    pub coverage: Vec<Vec<f64>>,
    pub mean_redundancy: Vec<Vec<f64>>,
}

pub fn compare_runs(runs: &[JudgedRun], ranks: &[usize], modes: &[Mode]) -> Result<Comparison> {
    check_aligned(runs)?;
    let columns: Vec<(String, Mode)> = runs
        .iter()
        .flat_map(|r| modes.iter().map(|&m| (r.run_id.clone(), m)))
        .collect();
    let mut coverage_rows = Vec::with_capacity(ranks.len());
    let mut redundancy_rows = Vec::with_capacity(ranks.len());
    for &n in ranks {
        let mut cov = Vec::with_capacity(columns.len());
        let mut red = Vec::with_capacity(columns.len());
        for run in runs {
            for &mode in modes {
                cov.push(coverage(run, n, mode)?);
                red.push(redundancy(run, n, mode)?.mean);
            }
        }
        coverage_rows.push(cov);
        redundancy_rows.push(red);
    }
    Ok(Comparison {
        ranks: ranks.to_vec(),
        columns,
        coverage: coverage_rows,
        mean_redundancy: redundancy_rows,
    })
}
