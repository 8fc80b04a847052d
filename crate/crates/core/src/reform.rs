//! Rule-based reformulation of question series into context-independent
//! questions.
//!
//! A reformulation only ever substitutes text: pronouns are replaced by the
//! series target or the previous answer, and partial mentions of the target
//! are replaced by the full target string. Nothing else in the question is
//! rewritten.

use std::borrow::Cow;
use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jsonl;
use crate::text::{token_spans, StopwordList, TokenSpan, PREVIOUS_ANSWER};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TargetType {
    Person,
    Other,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Question {
    pub question_id: String,
    pub text: String,
}

/// What is known about the answer to one series question. `answer` is
/// `None` when the question is known to have an answer of `answer_type` but
/// the answer itself has not been found.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PreviousAnswer {
    #[serde(default)]
    pub answer: Option<String>,
    pub answer_type: TargetType,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuestionSeries {
    pub series_id: String,
    pub target: String,
    pub target_type: TargetType,
    pub questions: Vec<Question>,
    /// Keyed by the id of the question the answer belongs to.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub previous_answers: BTreeMap<String, PreviousAnswer>,
}

impl QuestionSeries {
    pub fn validate(&self) -> Result<()> {
        let loc = format!("series {}", self.series_id);
        if self.target.trim().is_empty() {
            return Err(Error::data(loc, "empty target"));
        }
        if self.questions.is_empty() {
            return Err(Error::data(loc, "series has no questions"));
        }
        let mut seen = HashSet::new();
        for q in &self.questions {
            if !seen.insert(q.question_id.as_str()) {
                return Err(Error::data(loc, format!("duplicate question id {}", q.question_id)));
            }
            if q.text.trim().is_empty() {
                return Err(Error::data(loc, format!("question {} is empty", q.question_id)));
            }
        }
        expand_bracket_variants(&self.target).map_err(|e| Error::data(loc, e.to_string()))?;
        Ok(())
    }

    /// `(head, bracketed part)` when the target has a parenthesized segment.
    pub fn bracketed(&self) -> Result<Option<(String, String)>> {
        let variants = expand_bracket_variants(&self.target)?;
        Ok(match variants.as_slice() {
            [_, head, part] => Some((head.clone(), part.clone())),
            _ => None,
        })
    }

    fn position(&self, question_id: &str) -> Option<usize> {
        self.questions.iter().position(|q| q.question_id == question_id)
    }

    /// Answer record of the question preceding position `idx`, if any.
    fn previous_answer(&self, idx: usize) -> Option<&PreviousAnswer> {
        let prev = self.questions.get(idx.checked_sub(1)?)?;
        self.previous_answers.get(&prev.question_id)
    }
}

pub fn read_series(path: &Path) -> Result<Vec<QuestionSeries>> {
    let series: Vec<QuestionSeries> = jsonl::read(path)?;
    let mut ids = HashSet::new();
    for s in &series {
        s.validate()
            .map_err(|e| Error::data(path.display().to_string(), e.to_string()))?;
        if !ids.insert(s.series_id.as_str()) {
            return Err(Error::data(
                path.display().to_string(),
                format!("duplicate series id {}", s.series_id),
            ));
        }
    }
    Ok(series)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reformulation {
    pub question_id: String,
    pub text: String,
    pub uses_previous_answer: bool,
}

impl Reformulation {
    fn new(question_id: &str, text: String) -> Self {
        Reformulation {
            question_id: question_id.to_string(),
            uses_previous_answer: text.contains(PREVIOUS_ANSWER),
            text,
        }
    }
}

/// One line of a reformulation output file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReformulationRecord {
    pub series_id: String,
    pub question_id: String,
    pub variant_index: usize,
    pub text: String,
    pub uses_previous_answer: bool,
}

/// Numbers the variants of each question in output order.
pub fn to_records(series_id: &str, reforms: &[Reformulation]) -> Vec<ReformulationRecord> {
    let mut counters: BTreeMap<&str, usize> = BTreeMap::new();
    reforms
        .iter()
        .map(|r| {
            let idx = counters.entry(r.question_id.as_str()).or_insert(0);
            let rec = ReformulationRecord {
                series_id: series_id.to_string(),
                question_id: r.question_id.clone(),
                variant_index: *idx,
                text: r.text.clone(),
                uses_previous_answer: r.uses_previous_answer,
            };
            *idx += 1;
            rec
        })
        .collect()
}

/// `[full, without brackets, bracketed part]` for a target with a
/// parenthesized segment, otherwise `[target]`.
pub fn expand_bracket_variants(target: &str) -> Result<Vec<String>> {
    let mut outside = String::new();
    let mut inside: Vec<String> = Vec::new();
    let mut current: Option<String> = None;
    for (i, c) in target.char_indices() {
        match (c, current.as_mut()) {
            ('(', None) => current = Some(String::new()),
            ('(', Some(_)) => {
                return Err(Error::data(
                    format!("target {target:?}"),
                    format!("nested bracket at byte {i}"),
                ))
            }
            (')', None) => {
                return Err(Error::data(
                    format!("target {target:?}"),
                    format!("unbalanced ')' at byte {i}"),
                ))
            }
            (')', Some(_)) => inside.extend(current.take()),
            (c, Some(buf)) => buf.push(c),
            (c, None) => outside.push(c),
        }
    }
    if current.is_some() {
        return Err(Error::data(format!("target {target:?}"), "unbalanced '('"));
    }
    if inside.is_empty() {
        return Ok(vec![target.to_string()]);
    }
    let squash = |s: &str| s.split_whitespace().collect::<Vec<_>>().join(" ");
    let mut variants = vec![target.to_string()];
    for v in [squash(&outside), squash(&inside.join(" "))] {
        if !v.is_empty() && !variants.contains(&v) {
            variants.push(v);
        }
    }
    Ok(variants)
}

/// Locates the span of `question` to be replaced by the target.
///
/// The match is the longest run of question content words (stopwords
/// skipped) equal to a contiguous run of target content words; ties go to
/// the leftmost. Question stopwords just before (after) the run are pulled
/// into the span when they repeat the target's leading (trailing)
/// stopwords, so that a target such as "The Eiffel Tower" replaces
/// "the tower" whole.
fn find_target_span(spans: &[TokenSpan], target: &str, stops: &StopwordList) -> Option<(usize, usize)> {
    let target_spans = token_spans(target);
    let target_tokens: Vec<&str> = target_spans.iter().map(|s| s.token.as_str()).collect();
    let t_content: Vec<usize> = (0..target_tokens.len())
        .filter(|&i| !stops.contains(target_tokens[i]))
        .collect();
    let q_content: Vec<usize> = (0..spans.len()).filter(|&i| !stops.contains(&spans[i].token)).collect();

    // (length, question content start)
    let mut best: Option<(usize, usize)> = None;
    for qi in 0..q_content.len() {
        for ti in 0..t_content.len() {
            let mut len = 0;
            while qi + len < q_content.len()
                && ti + len < t_content.len()
                && spans[q_content[qi + len]].token == target_tokens[t_content[ti + len]]
            {
                len += 1;
            }
            if len > 0 && best.is_none_or(|(l, _)| len > l) {
                best = Some((len, qi));
            }
        }
    }
    let (len, qi) = best?;

    // Target stopwords before its first and after its last content word.
    let lead = &target_tokens[..t_content[0]];
    let trail = &target_tokens[t_content[t_content.len() - 1] + 1..];
    let mut first = q_content[qi];
    let mut last = q_content[qi + len - 1];
    let mut k = lead.len();
    while k > 0 && first > 0 && spans[first - 1].token == lead[k - 1] {
        first -= 1;
        k -= 1;
    }
    let mut k = 0;
    while k < trail.len() && last + 1 < spans.len() && spans[last + 1].token == trail[k] {
        last += 1;
        k += 1;
    }
    Some((spans[first].start, spans[last].end))
}

fn substitute_span(question: &str, match_target: &str, replacement: &str, stops: &StopwordList) -> String {
    let spans = token_spans(question);
    match find_target_span(&spans, match_target, stops) {
        Some((start, end)) => format!("{}{}{}", &question[..start], replacement, &question[end..]),
        None => question.to_string(),
    }
}

/// Replaces the part of `question` that mentions the target (ignoring
/// stopwords when matching) with the full target. Returns the question
/// unchanged when no content word of the target occurs in it.
pub fn substitute_target(question: &str, target: &str, stops: &StopwordList) -> String {
    substitute_span(question, target, target, stops)
}

enum Referent<'a> {
    Text(Cow<'a, str>),
    PreviousAnswer,
}

fn pronoun_referent<'a>(
    token: &str,
    ctx: &'a QuestionSeries,
    idx: usize,
    target: &'a str,
) -> Option<(Referent<'a>, bool)> {
    let prev = ctx.previous_answer(idx);
    let person = || match prev {
        Some(PreviousAnswer {
            answer_type: TargetType::Person,
            answer,
        }) => Some(match answer {
            Some(a) => Referent::Text(Cow::Borrowed(a.as_str())),
            None => Referent::PreviousAnswer,
        }),
        _ if ctx.target_type == TargetType::Person => Some(Referent::Text(Cow::Borrowed(target))),
        _ => None,
    };
    match token {
        "it" => {
            let known = prev.and_then(|p| p.answer.as_deref());
            Some((Referent::Text(Cow::Borrowed(known.unwrap_or(target))), false))
        }
        "he" | "she" => person().map(|r| (r, false)),
        "his" | "her" | "hers" | "their" => person().map(|r| (r, true)),
        _ => None,
    }
}

fn inline_question(reformulation: &str) -> &str {
    reformulation.trim_end_matches(|c: char| c.is_whitespace() || matches!(c, '?' | '.' | '!'))
}

/// Pronoun resolution for the question at position `idx`, substituting
/// `target` for target references. `prev_reformulation` is the first
/// reformulation of the preceding question.
fn resolve_at(
    question: &str,
    ctx: &QuestionSeries,
    idx: usize,
    target: &str,
    prev_reformulation: Option<&str>,
) -> Vec<String> {
    let spans = token_spans(question);
    let edits: Vec<(&TokenSpan, Referent<'_>, bool)> = spans
        .iter()
        .filter_map(|s| pronoun_referent(&s.token, ctx, idx, target).map(|(r, p)| (s, r, p)))
        .collect();
    if edits.is_empty() {
        return vec![question.to_string()];
    }

    let uses_placeholder = edits.iter().any(|(_, r, _)| matches!(r, Referent::PreviousAnswer));
    let mut fills = vec![PREVIOUS_ANSWER];
    if uses_placeholder {
        if let Some(prev) = prev_reformulation {
            fills.push(inline_question(prev));
        }
    }

    let mut out: Vec<String> = Vec::new();
    for fill in fills {
        let mut text = String::with_capacity(question.len() + 32);
        let mut cursor = 0;
        for (span, referent, possessive) in &edits {
            text.push_str(&question[cursor..span.start]);
            match referent {
                Referent::Text(t) => text.push_str(t),
                Referent::PreviousAnswer => text.push_str(fill),
            }
            if *possessive {
                text.push_str("'s");
            }
            cursor = span.end;
        }
        text.push_str(&question[cursor..]);
        if !out.contains(&text) {
            out.push(text);
        }
        if !uses_placeholder {
            break;
        }
    }
    out
}

/// Resolves the pronouns of `question`, interpreted as question `question_id`
/// of the series. Returns every distinct variant; two variants are produced
/// when a pronoun refers to an unknown previous answer (one with the
/// placeholder, one with the previous question inlined).
pub fn resolve_pronouns(
    question: &str,
    ctx: &QuestionSeries,
    question_id: &str,
    stops: &StopwordList,
) -> Result<Vec<String>> {
    let idx = ctx.position(question_id).ok_or_else(|| {
        Error::contract(format!(
            "question {question_id} is not part of series {}",
            ctx.series_id
        ))
    })?;
    let prev = if idx > 0 {
        let mut prefix = ctx.clone();
        prefix.questions.truncate(idx);
        reformulate(&prefix, stops)?
            .into_iter()
            .find(|r| r.question_id == ctx.questions[idx - 1].question_id)
            .map(|r| r.text)
    } else {
        None
    };
    Ok(resolve_at(question, ctx, idx, &ctx.target, prev.as_deref()))
}

/// Reformulates every question of the series: pronoun resolution followed by
/// target substitution, once per bracket variant of the target. Variants are
/// deduplicated keeping first occurrence; output follows question order.
pub fn reformulate(ctx: &QuestionSeries, stops: &StopwordList) -> Result<Vec<Reformulation>> {
    ctx.validate()?;
    let variants = expand_bracket_variants(&ctx.target)?;
    let mut out = Vec::new();
    let mut prev: Option<String> = None;
    for (idx, q) in ctx.questions.iter().enumerate() {
        let mut texts: Vec<String> = Vec::new();
        for v in &variants {
            for resolved in resolve_at(&q.text, ctx, idx, v, prev.as_deref()) {
                let text = substitute_span(&resolved, &ctx.target, v, stops);
                if !texts.contains(&text) {
                    texts.push(text);
                }
            }
        }
        prev = texts.first().cloned();
        out.extend(texts.into_iter().map(|t| Reformulation::new(&q.question_id, t)));
    }
    Ok(out)
}

/// Naive baseline: every question with the full target appended.
pub fn baseline_append_target(ctx: &QuestionSeries) -> Vec<Reformulation> {
    ctx.questions
        .iter()
        .map(|q| Reformulation::new(&q.question_id, format!("{} {}", q.text, ctx.target)))
        .collect()
}
