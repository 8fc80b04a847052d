//! The subcommands. Each reads its declared inputs, writes its outputs
//! under the output directory and returns a one-line summary.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use qalab_core::corpus::{
    build_index, chunk, ingest_corpus, read_run, retrieve, retrieve_run, units_at, write_run, Document, Index, Level,
    RankingConfig, UnitStore,
};
use qalab_core::eval::{
    compare_runs, export_question_set, find_difficult, judge, mean_redundancy, read_answer_keys, redundancy_table,
    AnswerKeys, DifficultPolicy, DifficultSet, FailureStore, JudgedRun, Mode,
};
use qalab_core::expand::{
    blind_rf_terms, intersection_stats, mine_hew, rf_experiment, ExpansionContext, RfExperiment, INTERSECTION_ROWS,
};
use qalab_core::jsonl;
use qalab_core::questions::{read_questions, write_questions, QuestionRecord};
use qalab_core::reform::{baseline_append_target, read_series, reformulate, to_records, ReformulationRecord};
use qalab_core::sim::{evaluate_dataset, generate_test_datasets, read_gold, DatasetItem, TestDataset};
use qalab_core::text::{StopwordList, PREVIOUS_ANSWER};
use qalab_core::Error;
use serde::{Deserialize, Serialize};

use crate::config::WorkbenchConfig;
use crate::report::{emit_report, write_file, Cell, ReportFormat, Table};
use crate::CliError;

const BOTH: [ReportFormat; 2] = [ReportFormat::Csv, ReportFormat::Text];

/// A loaded config plus the command-line overrides.
#[derive(Debug, Clone)]
pub struct Workbench {
    pub config: WorkbenchConfig,
    pub out: PathBuf,
    pub run_id: String,
    pub timestamps: bool,
}

/// One line of a HEW output file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HewRecord {
    pub question_id: String,
    pub word: String,
    pub redundancy_after: usize,
}

fn missing(what: &str, command: &str) -> CliError {
    CliError::Config(format!("`{command}` needs {what} in the config"))
}

fn need_artifact(path: &Path, command: &str) -> Result<(), CliError> {
    if path.exists() {
        Ok(())
    } else {
        Err(CliError::Core(Error::Data {
            location: path.display().to_string(),
            message: format!("not found; run `qalab {command}` first"),
        }))
    }
}

impl Workbench {
    pub fn new(config: WorkbenchConfig, out: Option<PathBuf>, run_id: Option<String>, timestamps: bool) -> Self {
        Workbench {
            out: out.unwrap_or_else(|| config.output_dir.clone()),
            run_id: run_id.unwrap_or_else(|| config.run_id.clone()),
            config,
            timestamps,
        }
    }

    fn path(&self, name: impl AsRef<Path>) -> PathBuf {
        self.out.join(name)
    }

    fn stamp(&self) -> Option<String> {
        self.timestamps.then(|| {
            let secs = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
            format!("at unix time {secs}")
        })
    }

    fn stopwords(&self) -> Result<StopwordList, CliError> {
        Ok(match &self.config.stopwords {
            Some(p) => StopwordList::from_file(p)?,
            None => StopwordList::english().clone(),
        })
    }

    fn documents(&self) -> Result<Vec<Document>, CliError> {
        Ok(ingest_corpus(&self.config.corpus, self.config.corpus_format)?)
    }

    fn questions(&self, command: &str) -> Result<Vec<QuestionRecord>, CliError> {
        let p = self
            .config
            .data
            .questions
            .as_ref()
            .ok_or_else(|| missing("data.questions", command))?;
        Ok(read_questions(p)?)
    }

    fn keys(&self, command: &str) -> Result<AnswerKeys, CliError> {
        let p = self
            .config
            .data
            .answers
            .as_ref()
            .ok_or_else(|| missing("data.answers", command))?;
        Ok(read_answer_keys(p)?)
    }

    fn index_path(&self, level: Level) -> PathBuf {
        self.path(format!("index-{level}.idx"))
    }

    fn load_index(&self, level: Level) -> Result<Index, CliError> {
        let p = self.index_path(level);
        need_artifact(&p, "index")?;
        Ok(Index::read_from(&p)?)
    }

    /// (ranking, level) pairs in config order, level-major.
    fn runs(&self) -> impl Iterator<Item = (&RankingConfig, Level)> {
        self.config
            .levels
            .iter()
            .flat_map(move |&l| self.config.rankings.iter().map(move |r| (r, l)))
    }

    fn run_name(ranking: &RankingConfig, level: Level) -> String {
        format!("{}-{level}", ranking.name)
    }

    fn store(&self) -> Result<FailureStore, CliError> {
        Ok(FailureStore::open(self.path("store"))?)
    }

    fn judged_runs(&self) -> Result<Vec<JudgedRun>, CliError> {
        let store = self.store()?;
        self.runs()
            .map(|(r, l)| {
                let name = Self::run_name(r, l);
                need_artifact(&store.path_for(&name), "judge")?;
                Ok(store.get(&name)?)
            })
            .collect()
    }

    fn difficult_set_path(&self) -> PathBuf {
        self.path(format!("difficult-{}.set.json", self.run_id))
    }

    fn hew_path(&self) -> PathBuf {
        self.path(format!("hew-{}.jsonl", self.run_id))
    }

    fn read_difficult_set(&self) -> Result<DifficultSet, CliError> {
        let p = self.difficult_set_path();
        need_artifact(&p, "difficult")?;
        let text = std::fs::read_to_string(&p).map_err(|e| Error::Io {
            path: p.clone(),
            source: e,
        })?;
        serde_json::from_str(&text).map_err(|e| {
            CliError::Core(Error::Data {
                location: p.display().to_string(),
                message: e.to_string(),
            })
        })
    }

    fn write_jsonl<T: Serialize>(&self, name: &str, records: &[T]) -> Result<PathBuf, CliError> {
        let p = self.path(name);
        jsonl::write(&p, records)?;
        Ok(p)
    }
}

pub fn index(wb: &Workbench) -> Result<String, CliError> {
    let docs = wb.documents()?;
    let mut parts = Vec::new();
    for &level in &wb.config.levels {
        let idx = build_index(&units_at(&docs, level), level)?;
        idx.write_to(&wb.index_path(level))?;
        parts.push(format!(
            "{level} {} units / {} terms",
            idx.unit_count(),
            idx.term_count()
        ));
    }
    Ok(format!("index: {} documents; {}", docs.len(), parts.join(", ")))
}

pub fn retrieve_cmd(wb: &Workbench) -> Result<String, CliError> {
    let questions = wb.questions("retrieve")?;
    let stops = wb.stopwords()?;
    let mut written = 0;
    for &level in &wb.config.levels {
        let idx = wb.load_index(level)?;
        for ranking in &wb.config.rankings {
            let name = Workbench::run_name(ranking, level);
            let run = retrieve_run(&name, &idx, &questions, &stops, wb.config.eval.cutoff, ranking)?;
            write_run(&wb.path(format!("retrieve-{name}.jsonl")), &run)?;
            written += 1;
        }
    }
    Ok(format!(
        "retrieve: {written} runs of {} questions at depth {}",
        questions.len(),
        wb.config.eval.cutoff
    ))
}

pub fn judge_cmd(wb: &Workbench) -> Result<String, CliError> {
    let keys = wb.keys("judge")?;
    let docs = wb.documents()?;
    let store = wb.store()?;
    let mut judged = 0;
    let mut positives = 0;
    for &level in &wb.config.levels {
        let units = UnitStore::new(units_at(&docs, level));
        for ranking in &wb.config.rankings {
            let name = Workbench::run_name(ranking, level);
            let path = wb.path(format!("retrieve-{name}.jsonl"));
            need_artifact(&path, "retrieve")?;
            let run = judge(&read_run(&path)?, &keys, &units)?;
            positives += run.iter().filter(|j| j.lenient).count();
            store.put(&run)?;
            judged += 1;
        }
    }
    Ok(format!(
        "judge: {judged} runs stored in {}, {positives} lenient matches",
        store.dir().display()
    ))
}

pub fn report(wb: &Workbench) -> Result<String, CliError> {
    let runs = wb.judged_runs()?;
    let modes = &wb.config.eval.modes;
    let cmp = compare_runs(&runs, &wb.config.eval.ranks, modes)?;
    let mut header = vec!["rank".to_string()];
    for (run, mode) in &cmp.columns {
        header.push(format!("coverage {run} {mode}"));
    }
    for (run, mode) in &cmp.columns {
        header.push(format!("redundancy {run} {mode}"));
    }
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut table = Table::new("Coverage and mean redundancy by rank", &header);
    for (i, &n) in cmp.ranks.iter().enumerate() {
        let mut row = vec![Cell::Int(n)];
        row.extend(cmp.coverage[i].iter().map(|&c| Cell::Score(c)));
        row.extend(cmp.mean_redundancy[i].iter().map(|&c| Cell::Score(c)));
        table.push(row);
    }
    emit_report(
        &table,
        &wb.out,
        &format!("report-{}", wb.run_id),
        &BOTH,
        wb.stamp().as_deref(),
    )?;
    let last = cmp.ranks.len() - 1;
    let best = cmp.coverage[last].iter().copied().fold(0.0, f64::max);
    Ok(format!(
        "report: {} runs x {} modes over ranks {:?}; best coverage@{} {:.3}",
        runs.len(),
        modes.len(),
        cmp.ranks,
        cmp.ranks[last],
        best
    ))
}

pub fn difficult(wb: &Workbench) -> Result<String, CliError> {
    let runs = wb.judged_runs()?;
    let questions = wb.questions("difficult")?;
    let eval = &wb.config.eval;
    let policy = DifficultPolicy {
        threshold: eval.threshold,
        runs: runs.iter().map(|r| r.run_id.clone()).collect(),
        modes: eval.modes.clone(),
        n: eval.n,
    };
    let set = find_difficult(&runs, &policy)?;
    let exported = export_question_set(&set, &questions)?;
    write_questions(&wb.path(format!("difficult-{}.jsonl", wb.run_id)), &exported)?;
    let set_json = serde_json::to_string_pretty(&set).expect("difficult set serializes") + "\n";
    write_file(&wb.difficult_set_path(), &set_json)?;

    let selected: Vec<&JudgedRun> = runs.iter().collect();
    let table_data = redundancy_table(&selected, &eval.modes, eval.n)?;
    let mut table = Table::new(
        format!("Difficult questions (mean redundancy@{} <= {})", eval.n, eval.threshold),
        &["question_id", "series_id", "mean_redundancy", "text"],
    );
    for q in &exported {
        table.push(vec![
            q.question_id.as_str().into(),
            q.series_id.as_str().into(),
            Cell::Score(mean_redundancy(&q.question_id, &table_data)?),
            q.text.as_str().into(),
        ]);
    }
    emit_report(
        &table,
        &wb.out,
        &format!("difficult-{}", wb.run_id),
        &[ReportFormat::Csv],
        None,
    )?;
    Ok(format!(
        "difficult: {} of {} questions at threshold {} over {} runs x {} modes",
        exported.len(),
        questions.len(),
        eval.threshold,
        runs.len(),
        eval.modes.len()
    ))
}

struct ExpansionInputs {
    questions: Vec<QuestionRecord>,
    keys: AnswerKeys,
    docs: Vec<Document>,
    stops: StopwordList,
    index: Index,
    units: UnitStore,
}

fn expansion_inputs(wb: &Workbench, command: &str) -> Result<ExpansionInputs, CliError> {
    let docs = wb.documents()?;
    let level = wb.config.expansion_level;
    Ok(ExpansionInputs {
        questions: wb.questions(command)?,
        keys: wb.keys(command)?,
        stops: wb.stopwords()?,
        index: wb.load_index(level)?,
        units: UnitStore::new(units_at(&docs, level)),
        docs,
    })
}

fn context<'a>(wb: &'a Workbench, inp: &'a ExpansionInputs) -> ExpansionContext<'a> {
    ExpansionContext {
        index: &inp.index,
        units: &inp.units,
        keys: &inp.keys,
        stops: &inp.stops,
        config: &wb.config.expansion_config,
        n: wb.config.expansion.n,
        mode: Mode::Strict,
    }
}

pub fn hew(wb: &Workbench) -> Result<String, CliError> {
    let set = wb.read_difficult_set()?;
    let inp = expansion_inputs(wb, "hew")?;
    let passages = UnitStore::new(chunk(&inp.docs));
    let found = mine_hew(&context(wb, &inp), &set, &inp.questions, &passages)?;
    let records: Vec<HewRecord> = found
        .values()
        .flatten()
        .map(|o| HewRecord {
            question_id: o.question_id.clone(),
            word: o.word.clone(),
            redundancy_after: o.redundancy_after,
        })
        .collect();
    jsonl::write(&wb.hew_path(), &records)?;
    let with_words = found.values().filter(|v| !v.is_empty()).count();
    Ok(format!(
        "hew: {} helpful words for {with_words} of {} difficult questions",
        records.len(),
        set.question_ids.len()
    ))
}

pub fn read_hew(path: &Path) -> Result<Vec<HewRecord>, CliError> {
    Ok(jsonl::read(path)?)
}

pub fn rf(wb: &Workbench) -> Result<String, CliError> {
    let inp = expansion_inputs(wb, "rf")?;
    let mut levels = wb.config.levels.clone();
    levels.sort();
    let feedback_indexes = levels
        .iter()
        .map(|&l| wb.load_index(l))
        .collect::<Result<Vec<_>, _>>()?;
    let exp = RfExperiment {
        ctx: context(wb, &inp),
        feedback: feedback_indexes.iter().collect(),
        rs: wb.config.expansion.r.clone(),
        k: wb.config.expansion.k,
        ranks: wb.config.eval.ranks.clone(),
    };
    let grid = rf_experiment(&exp, &inp.questions)?;
    let labels: Vec<String> = grid.columns.iter().map(|c| c.label()).collect();
    let mut header = vec!["rank"];
    header.extend(labels.iter().map(String::as_str));
    let mut table = Table::new(
        format!(
            "Coverage (strict) with blind relevance feedback, k={}, {} retrieval",
            exp.k, wb.config.expansion_level
        ),
        &header,
    );
    for (i, &n) in grid.ranks.iter().enumerate() {
        let mut row = vec![Cell::Int(n)];
        row.extend(grid.cells[i].iter().map(|&c| Cell::Score(c)));
        table.push(row);
    }
    let stamp = wb.stamp();
    emit_report(&table, &wb.out, &format!("rf-{}", wb.run_id), &BOTH, stamp.as_deref())?;
    let mut summary = format!("rf: {} ranks x {} columns", grid.ranks.len(), grid.columns.len());

    // The intersection statistics need the helpful words from `hew`.
    if wb.hew_path().exists() && wb.difficult_set_path().exists() {
        let set = wb.read_difficult_set()?;
        let by_id: BTreeMap<&str, &QuestionRecord> =
            inp.questions.iter().map(|q| (q.question_id.as_str(), q)).collect();
        let mut hew_sets: BTreeMap<String, BTreeSet<String>> =
            set.question_ids.iter().map(|q| (q.clone(), BTreeSet::new())).collect();
        for rec in read_hew(&wb.hew_path())? {
            let Some(words) = hew_sets.get_mut(&rec.question_id) else {
                return Err(CliError::Core(Error::Data {
                    location: wb.hew_path().display().to_string(),
                    message: format!("question {} is not in the difficult set", rec.question_id),
                }));
            };
            words.insert(rec.word);
        }
        let (r, k) = (wb.config.expansion.irt_r, wb.config.expansion.k);
        let mut irt = BTreeMap::new();
        let mut rf_words = BTreeMap::new();
        for qid in &set.question_ids {
            let q = by_id.get(qid.as_str()).ok_or_else(|| {
                CliError::Core(Error::Data {
                    location: "question set".into(),
                    message: format!("difficult question {qid} not found"),
                })
            })?;
            let hits = retrieve(&inp.index, &q.text, &inp.stops, r, &wb.config.expansion_config)?;
            let texts = hits
                .iter()
                .map(|h| {
                    inp.units
                        .get(&h.unit_id)
                        .map(|u| u.text.clone())
                        .expect("indexed unit is in the corpus")
                })
                .collect();
            irt.insert(qid.clone(), texts);
            let sel = blind_rf_terms(&inp.index, q, r, k, &inp.stops, &wb.config.expansion_config)?;
            rf_words.insert(qid.clone(), sel.words().map(String::from).collect());
        }
        let stats = intersection_stats(&hew_sets, &irt, &rf_words)?;
        let mut t = Table::new(
            format!("Intersection statistics (%), IRT = top {r} units, {k} RF words"),
            &["measure", &wb.run_id],
        );
        for (label, value) in INTERSECTION_ROWS.iter().zip(stats.as_array()) {
            t.push(vec![(*label).into(), Cell::Percent(value)]);
        }
        emit_report(&t, &wb.out, &format!("rf-stats-{}", wb.run_id), &BOTH, stamp.as_deref())?;
        summary.push_str(&format!(
            "; intersection {:.2} / {:.2} / {:.2}",
            stats.hew_in_irt, stats.irt_with_hew, stats.rf_in_hew
        ));
    } else {
        summary.push_str("; intersection statistics skipped (run `qalab hew` first)");
    }
    Ok(summary)
}

fn series_and_gold(
    wb: &Workbench,
    command: &str,
) -> Result<
    (
        Vec<qalab_core::reform::QuestionSeries>,
        Vec<qalab_core::sim::GoldStandardEntry>,
    ),
    CliError,
> {
    let sp = wb
        .config
        .data
        .series
        .as_ref()
        .ok_or_else(|| missing("data.series", command))?;
    let gp = wb
        .config
        .data
        .gold
        .as_ref()
        .ok_or_else(|| missing("data.gold", command))?;
    Ok((read_series(sp)?, read_gold(gp)?))
}

pub fn reform(wb: &Workbench) -> Result<String, CliError> {
    let sp = wb
        .config
        .data
        .series
        .as_ref()
        .ok_or_else(|| missing("data.series", "reform"))?;
    let series = read_series(sp)?;
    let stops = wb.stopwords()?;
    let mut records = Vec::new();
    let mut baseline = Vec::new();
    for s in &series {
        records.extend(to_records(&s.series_id, &reformulate(s, &stops)?));
        baseline.extend(to_records(&s.series_id, &baseline_append_target(s)));
    }
    wb.write_jsonl(&format!("reform-{}.jsonl", wb.run_id), &records)?;
    wb.write_jsonl(&format!("reform-{}-baseline.jsonl", wb.run_id), &baseline)?;
    let questions: usize = series.iter().map(|s| s.questions.len()).sum();
    Ok(format!(
        "reform: {} reformulations of {questions} questions in {} series",
        records.len(),
        series.len()
    ))
}

/// The first reformulation of every question, as a dataset.
fn first_variants(name: &str, records: &[ReformulationRecord]) -> TestDataset {
    TestDataset {
        name: name.to_string(),
        items: records
            .iter()
            .filter(|r| r.variant_index == 0)
            .map(|r| DatasetItem {
                series_id: r.series_id.clone(),
                question_id: r.question_id.clone(),
                text: r.text.clone(),
            })
            .collect(),
    }
}

pub fn score(wb: &Workbench) -> Result<String, CliError> {
    let (series, gold) = series_and_gold(wb, "score")?;
    let stops = wb.stopwords()?;
    let gold_ids: BTreeSet<(&str, &str)> = gold
        .iter()
        .map(|g| (g.series_id.as_str(), g.question_id.as_str()))
        .collect();
    let mut reformed = Vec::new();
    let mut baseline = Vec::new();
    for s in &series {
        reformed.extend(to_records(&s.series_id, &reformulate(s, &stops)?));
        baseline.extend(to_records(&s.series_id, &baseline_append_target(s)));
    }
    let in_gold = |recs: Vec<ReformulationRecord>| -> Vec<ReformulationRecord> {
        recs.into_iter()
            .filter(|r| gold_ids.contains(&(r.series_id.as_str(), r.question_id.as_str())))
            .collect()
    };
    let mut datasets: Vec<TestDataset> = generate_test_datasets(&series, &gold)?.into();
    datasets.push(first_variants("reformulated", &in_gold(reformed)));
    datasets.push(first_variants("baseline", &in_gold(baseline)));

    let mut table = Table::new("Similarity to the Gold Standard", &["dataset", "question_id", "score"]);
    let mut summary_table = Table::new(
        format!(
            "Mean similarity ({}, weights {:?})",
            wb.config.metric,
            wb.config.weights.as_array()
        ),
        &["dataset", "items", "mean", "min", "max"],
    );
    let mut parts = Vec::new();
    for d in &datasets {
        let rep = evaluate_dataset(d, &gold, wb.config.metric, &wb.config.weights)?;
        for (qid, s) in &rep.scores {
            table.push(vec![d.name.as_str().into(), qid.as_str().into(), Cell::Score(*s)]);
        }
        table.push(vec![d.name.as_str().into(), "mean".into(), Cell::Score(rep.mean())]);
        summary_table.push(vec![
            d.name.as_str().into(),
            Cell::Int(rep.scores.len()),
            Cell::Score(rep.mean()),
            Cell::Score(rep.min()),
            Cell::Score(rep.max()),
        ]);
        parts.push(format!("{} mean {:.3}", d.name, rep.mean()));
    }
    let stem = format!("score-{}", wb.run_id);
    emit_report(&table, &wb.out, &stem, &[ReportFormat::Csv], None)?;
    emit_report(
        &summary_table,
        &wb.out,
        &stem,
        &[ReportFormat::Text],
        wb.stamp().as_deref(),
    )?;
    Ok(format!("score: {}", parts.join(", ")))
}

pub fn gen_datasets(wb: &Workbench) -> Result<String, CliError> {
    let (series, gold) = series_and_gold(wb, "gen-datasets")?;
    let datasets = generate_test_datasets(&series, &gold)?;
    for d in &datasets {
        let records: Vec<ReformulationRecord> = d
            .items
            .iter()
            .map(|it| ReformulationRecord {
                series_id: it.series_id.clone(),
                question_id: it.question_id.clone(),
                variant_index: 0,
                uses_previous_answer: it.text.contains(PREVIOUS_ANSWER),
                text: it.text.clone(),
            })
            .collect();
        wb.write_jsonl(&format!("gen-datasets-{}-{}.jsonl", wb.run_id, d.name), &records)?;
    }
    Ok(format!(
        "gen-datasets: {} items in each of {}",
        gold.len(),
        datasets.iter().map(|d| d.name.as_str()).collect::<Vec<_>>().join(", ")
    ))
}
