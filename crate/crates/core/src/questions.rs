//! Question-set files: one `{question_id, series_id, text}` record per line.

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jsonl;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuestionRecord {
    pub question_id: String,
    pub series_id: String,
    pub text: String,
}

pub fn parse_questions(source: &str, text: &str) -> Result<Vec<QuestionRecord>> {
    let questions: Vec<QuestionRecord> = jsonl::parse(source, text)?;
    let mut seen = HashSet::new();
    for q in &questions {
        if !seen.insert(q.question_id.as_str()) {
            return Err(Error::data(source, format!("duplicate question id {}", q.question_id)));
        }
    }
    Ok(questions)
}

pub fn read_questions(path: &Path) -> Result<Vec<QuestionRecord>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_questions(&path.display().to_string(), &text)
}

pub fn render_questions(questions: &[QuestionRecord]) -> String {
    jsonl::render(questions)
}

pub fn write_questions(path: &Path, questions: &[QuestionRecord]) -> Result<()> {
    jsonl::write(path, questions)
}
