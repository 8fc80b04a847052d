//! Judging retrieval runs against answer keys and the measures built on
//! those judgements.
//!
//! A retrieved unit is *lenient*-correct when any answer pattern matches its
//! text, and *strict*-correct when, in addition, its parent document is in
//! the key's judged list. Coverage@n and redundancy@n are computed from the
//! judgements of the top `n` units of each question.

mod judge;
mod keys;
mod measures;
mod store;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use judge::{judge, judge_ranked, JudgedRun, Judgement};
pub use keys::{parse_answer_keys, read_answer_keys, AnswerKey, AnswerKeys, CompiledKey};
pub use measures::{
    compare_runs, coverage, export_question_set, find_difficult, mean_redundancy, redundancy, redundancy_table,
    Comparison, DifficultPolicy, DifficultSet, Redundancy, RedundancyTable,
};
pub use store::FailureStore;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Strict,
    Lenient,
}

impl Mode {
    pub const ALL: [Mode; 2] = [Mode::Strict, Mode::Lenient];

    pub fn name(self) -> &'static str {
        match self {
            Mode::Strict => "strict",
            Mode::Lenient => "lenient",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "strict" => Ok(Mode::Strict),
            "lenient" => Ok(Mode::Lenient),
            _ => Err(Error::contract(format!(
                "unknown match mode {s:?} (expected strict or lenient)"
            ))),
        }
    }
}
