//! Seeded random retrieval fixtures and brute-force judgement counts.

use qalab_core::corpus::{build_index, retrieve_run, IndexUnit, Level, RankingConfig, UnitStore};
use qalab_core::eval::{judge, AnswerKey, AnswerKeys, JudgedRun, Mode};
use qalab_core::questions::QuestionRecord;
use qalab_core::text::StopwordList;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

const WORDS: [&str; 10] = [
    "amber", "basalt", "cedar", "delta", "ember", "fjord", "glacier", "harbor", "isle", "jade",
];

pub struct Fixture {
    pub units: Vec<IndexUnit>,
    pub keys: AnswerKeys,
    pub questions: Vec<QuestionRecord>,
}

/// Passages over a small vocabulary, some carrying answer tokens `ansN`,
/// with a random subset of documents judged.
pub fn fixture(seed: u64) -> Fixture {
    let mut rng = StdRng::seed_from_u64(seed);
    let docs = rng.gen_range(1..12);
    let nq = rng.gen_range(1..6);
    let mut units = Vec::new();
    for d in 0..docs {
        for p in 0..rng.gen_range(1..4) {
            let mut words: Vec<String> = (0..rng.gen_range(1..8))
                .map(|_| WORDS[rng.gen_range(0..WORDS.len())].to_string())
                .collect();
            if rng.gen_bool(0.4) {
                words.push(format!("ans{}", rng.gen_range(0..nq)));
            }
            units.push(IndexUnit {
                unit_id: format!("d{d}#{p}"),
                text: words.join(" "),
                parent_doc_id: format!("d{d}"),
            });
        }
    }
    let keys: Vec<AnswerKey> = (0..nq)
        .map(|q| AnswerKey {
            question_id: format!("q{q}"),
            patterns: vec![format!(r"\bans{q}\b")],
            judged_docs: (0..docs)
                .filter(|_| rng.gen_bool(0.5))
                .map(|d| format!("d{d}"))
                .collect(),
        })
        .collect();
    let questions = (0..nq)
        .map(|q| QuestionRecord {
            question_id: format!("q{q}"),
            series_id: "s".into(),
            text: (0..rng.gen_range(1..4))
                .map(|_| WORDS[rng.gen_range(0..WORDS.len())])
                .collect::<Vec<_>>()
                .join(" "),
        })
        .collect();
    Fixture {
        units,
        keys: AnswerKeys::new(&keys).unwrap(),
        questions,
    }
}

/// TF-IDF and BM25 runs of depth 20, judged.
pub fn judged_runs(f: &Fixture) -> Vec<JudgedRun> {
    let index = build_index(&f.units, Level::Passage).unwrap();
    let store = UnitStore::new(f.units.clone());
    [RankingConfig::tfidf("tfidf"), RankingConfig::bm25("bm25")]
        .iter()
        .map(|c| {
            let run = retrieve_run(&c.name, &index, &f.questions, StopwordList::english(), 20, c).unwrap();
            judge(&run, &f.keys, &store).unwrap()
        })
        .collect()
}

/// Answer-bearing units in the top `n` of one question, from the unit
/// texts and the answer tokens directly.
pub fn answer_units(f: &Fixture, run: &JudgedRun, question_id: &str, n: usize, mode: Mode) -> usize {
    let token = format!("ans{}", &question_id[1..]);
    let judged: Vec<String> = f.keys.get(question_id).unwrap().judged_docs.iter().cloned().collect();
    run.judgements[question_id]
        .iter()
        .take(n)
        .filter(|j| {
            let unit = f.units.iter().find(|u| u.unit_id == j.unit_id).unwrap();
            let found = unit.text.split(' ').any(|w| w == token);
            match mode {
                Mode::Lenient => found,
                Mode::Strict => found && judged.contains(&unit.parent_doc_id),
            }
        })
        .count()
}
