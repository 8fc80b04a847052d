//! Acceptance checks for the workbench, one PASS/FAIL line per criterion.
//!
//! Library-level criteria compare against the brute-force oracles shared
//! with the core integration tests. Pipeline criteria drive the `qalab`
//! binary over the bundled fixtures. The process exits with status 1 when
//! any criterion fails.

#[path = "../../../core/tests/support/mod.rs"]
mod support;

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use qalab_cli::config::WorkbenchConfig;
use qalab_core::corpus::{build_index, ingest_corpus, retrieve, units_at, Index, Level, RankingConfig, UnitStore};
use qalab_core::eval::{coverage, read_answer_keys, redundancy, Mode};
use qalab_core::expand::{intersection_stats, test_extension, ExpansionContext, INTERSECTION_ROWS};
use qalab_core::jsonl;
use qalab_core::questions::{read_questions, render_questions};
use qalab_core::reform::{reformulate, QuestionSeries};
use qalab_core::sim::{
    base_similarity, evaluate_dataset, generate_test_datasets, read_gold, weighted_similarity, GramWeights, MetricKind,
};
use qalab_core::text::{ngrams, StopwordList, TokenStream};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::Deserialize;
use support::metrics::{profile_similarity, similarity, weighted, windows, words, Kind, Profile};

type Check = fn() -> Result<String, String>;

const KINDS: [(MetricKind, Kind); 4] = [
    (MetricKind::Jaccard, Kind::Jaccard),
    (MetricKind::Dice, Kind::Dice),
    (MetricKind::Cosine, Kind::Cosine),
    (MetricKind::BlockDistance, Kind::Block),
];

fn data(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(rel)
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Runs `qalab --config <config> --output-dir <out> --no-timestamp <cmd>`.
fn qalab(config: &Path, out: &Path, cmd: &str) -> Result<String, String> {
    let output = Command::new(env!("CARGO_BIN_EXE_qalab"))
        .arg("--config")
        .arg(config)
        .arg("--output-dir")
        .arg(out)
        .arg("--no-timestamp")
        .arg(cmd)
        .output()
        .map_err(|e| format!("cannot run qalab: {e}"))?;
    if !output.status.success() {
        return Err(format!(
            "qalab {cmd} exited with {}: {}",
            output.status,
            String::from_utf8_lossy(&output.stderr).trim()
        ));
    }
    Ok(String::from_utf8_lossy(&output.stdout).trim().to_string())
}

fn pipeline(config: &Path, out: &Path, cmds: &[&str]) -> Result<(), String> {
    for cmd in cmds {
        qalab(config, out, cmd)?;
    }
    Ok(())
}

fn tempdir() -> Result<tempfile::TempDir, String> {
    tempfile::tempdir().map_err(|e| e.to_string())
}

fn read(path: &Path) -> Result<String, String> {
    std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn csv_rows(path: &Path) -> Result<Vec<Vec<String>>, String> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(|e| format!("{}: {e}", path.display()))?;
    reader
        .records()
        .map(|r| {
            r.map(|r| r.iter().map(String::from).collect())
                .map_err(|e| e.to_string())
        })
        .collect()
}

fn sequences(max_len: usize, alphabet: &[&str]) -> Vec<Vec<String>> {
    let mut all = vec![Vec::new()];
    let mut frontier: Vec<Vec<String>> = vec![Vec::new()];
    for _ in 0..max_len {
        frontier = frontier
            .iter()
            .flat_map(|s| {
                alphabet.iter().map(move |a| {
                    let mut t = s.clone();
                    t.push(a.to_string());
                    t
                })
            })
            .collect();
        all.extend(frontier.iter().cloned());
    }
    all
}

fn metric_oracle() -> Result<String, String> {
    let start = Instant::now();
    let seqs = sequences(5, &["a", "b", "c", "d"]);
    let mut compared = 0u64;
    for n in 1..=3 {
        let profiles: Vec<_> = seqs
            .iter()
            .map(|s| ngrams(&TokenStream::from_tokens(s).unwrap(), n).unwrap())
            .collect();
        let oracle: Vec<_> = seqs.iter().map(|s| Profile::new(&windows(s, n))).collect();
        for (mk, k) in KINDS {
            for i in 0..seqs.len() {
                for j in 0..seqs.len() {
                    let got = base_similarity(mk, &profiles[i], &profiles[j]).map_err(|e| e.to_string())?;
                    let want = profile_similarity(k, &oracle[i], &oracle[j]);
                    ensure(got == want, || {
                        format!(
                            "{mk:?} order {n}: {:?} vs {:?} gave {got}, oracle {want}",
                            seqs[i], seqs[j]
                        )
                    })?;
                    compared += 1;
                }
            }
        }
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(60), || {
        format!("took {elapsed:.1?}, limit 60s")
    })?;
    Ok(format!(
        "{} sequences, {compared} comparisons, 0 mismatches, {elapsed:.1?}",
        seqs.len()
    ))
}

fn random_text(rng: &mut StdRng) -> String {
    const VOCAB: [&str; 10] = [
        "who",
        "was",
        "William",
        "Shakespeare",
        "the",
        "tower",
        "of",
        "born",
        "PLAY",
        "x1",
    ];
    const SEPS: [&str; 5] = [" ", " ", ", ", "? ", " - "];
    let mut s = String::new();
    for _ in 0..rng.gen_range(0..9) {
        s.push_str(VOCAB[rng.gen_range(0..VOCAB.len())]);
        s.push_str(SEPS[rng.gen_range(0..SEPS.len())]);
    }
    s
}

fn weighted_law() -> Result<String, String> {
    let mut rng = StdRng::seed_from_u64(2024);
    let w = GramWeights::default();
    let mut worst = 0f64;
    for _ in 0..1000 {
        let (a, b) = (random_text(&mut rng), random_text(&mut rng));
        let (wa, wb) = (words(&a), words(&b));
        for (mk, k) in KINDS {
            let s1 = similarity(k, &windows(&wa, 1), &windows(&wb, 1));
            let s2 = similarity(k, &windows(&wa, 2), &windows(&wb, 2));
            let err = (weighted_similarity(mk, &a, &b, &w) - (2.0 * s1 + s2) / 3.0).abs();
            worst = worst.max(err);
            ensure(err <= 1e-12, || format!("{mk:?} {a:?} vs {b:?}: error {err:e}"))?;
        }
    }
    Ok(format!("1000 pairs x 4 metrics, max error {worst:e} (tolerance 1e-12)"))
}

fn dataset_ordering() -> Result<String, String> {
    let series = qalab_core::reform::read_series(&data("sample/series.jsonl")).map_err(|e| e.to_string())?;
    let gold = read_gold(&data("sample/gold.jsonl")).map_err(|e| e.to_string())?;
    ensure(series.len() == 10, || format!("{} series, expected 10", series.len()))?;
    let refs: BTreeMap<_, _> = gold
        .iter()
        .map(|g| (g.question_id.clone(), g.reformulations.clone()))
        .collect();
    let mut means = BTreeMap::new();
    for d in generate_test_datasets(&series, &gold).map_err(|e| e.to_string())? {
        let report =
            evaluate_dataset(&d, &gold, MetricKind::Jaccard, &GramWeights::default()).map_err(|e| e.to_string())?;
        let oracle: f64 = d
            .items
            .iter()
            .map(|it| {
                refs[&it.question_id]
                    .iter()
                    .map(|r| weighted(Kind::Jaccard, &it.text, r, [2.0, 1.0, 0.0]))
                    .fold(0.0, f64::max)
            })
            .sum::<f64>()
            / d.items.len() as f64;
        ensure((report.mean() - oracle).abs() <= 1e-12, || {
            format!("{} mean {} differs from oracle {oracle}", d.name, report.mean())
        })?;
        means.insert(d.name.clone(), report.mean());
    }
    let (without, with, identical) = (means["without-target"], means["with-target"], means["identical"]);
    ensure(identical == 1.0, || format!("identical mean {identical}"))?;
    ensure(with > without, || {
        format!("with-target {with:.3} <= without-target {without:.3}")
    })?;
    Ok(format!(
        "identical {identical:.3}, with-target {with:.3} > without-target {without:.3}"
    ))
}

#[derive(Deserialize)]
struct RuleCase {
    rule: u32,
    name: String,
    series: QuestionSeries,
    expected: BTreeMap<String, Vec<String>>,
}

fn rule_fixtures() -> Result<String, String> {
    let cases: Vec<RuleCase> = jsonl::read(&data("fixtures/reformulation/rules.jsonl")).map_err(|e| e.to_string())?;
    let rules: Vec<u32> = cases.iter().map(|c| c.rule).collect();
    ensure(rules == (1..=10).collect::<Vec<_>>(), || {
        format!("rules {rules:?}, expected 1..=10")
    })?;
    for case in &cases {
        let mut got: BTreeMap<String, Vec<String>> = BTreeMap::new();
        for r in reformulate(&case.series, StopwordList::english()).map_err(|e| e.to_string())? {
            got.entry(r.question_id).or_default().push(r.text);
        }
        ensure(got == case.expected, || {
            format!("rule {} ({}): got {got:?}", case.rule, case.name)
        })?;
    }
    Ok("10 of 10 rule cases byte-exact".into())
}

fn retrieval_oracle() -> Result<String, String> {
    use support::retrieval::{linear_scan, random_corpus, random_query};
    let stops = StopwordList::english();
    let configs = [RankingConfig::tfidf("tfidf"), RankingConfig::bm25("bm25")];
    let mut lists = 0;
    for seed in 0..500 {
        let mut rng = StdRng::seed_from_u64(seed);
        let units = random_corpus(&mut rng);
        let index = build_index(&units, Level::Passage).map_err(|e| e.to_string())?;
        let q = random_query(&mut rng);
        for c in &configs {
            let want = linear_scan(&units, &q, stops, units.len() + 1, c.scheme);
            for n in 1..=units.len() + 1 {
                let got = retrieve(&index, &q, stops, n, c).map_err(|e| e.to_string())?;
                let expect = &want[..n.min(want.len())];
                let same_order =
                    got.len() == expect.len() && got.iter().zip(expect).all(|(g, w)| g.unit_id == w.unit_id);
                ensure(same_order, || {
                    format!("seed {seed} {} n={n} query {q:?}: rank order differs", c.name)
                })?;
                for (g, w) in got.iter().zip(expect) {
                    ensure((g.score - w.score).abs() <= 1e-12 * w.score.abs().max(1.0), || {
                        format!("seed {seed} {}: score {} vs {}", c.name, g.score, w.score)
                    })?;
                }
                lists += 1;
            }
        }
    }
    Ok(format!(
        "500 corpora of <= 50 units, {lists} ranked lists, identical rank order"
    ))
}

fn coverage_laws() -> Result<String, String> {
    use support::eval::{answer_units, fixture, judged_runs};
    let mut checked = 0;
    for seed in 0..200 {
        let f = fixture(seed);
        for run in judged_runs(&f) {
            let mut prev = (0.0, 0.0);
            for n in 1..=20 {
                let strict = coverage(&run, n, Mode::Strict).map_err(|e| e.to_string())?;
                let lenient = coverage(&run, n, Mode::Lenient).map_err(|e| e.to_string())?;
                ensure(strict <= lenient, || {
                    format!("seed {seed} n={n}: strict {strict} > lenient {lenient}")
                })?;
                ensure(strict >= prev.0 && lenient >= prev.1, || {
                    format!("seed {seed} n={n}: coverage fell")
                })?;
                prev = (strict, lenient);
                for mode in Mode::ALL {
                    let red = redundancy(&run, n, mode).map_err(|e| e.to_string())?;
                    for (qid, &r) in &red.per_question {
                        ensure(r <= n, || format!("seed {seed} n={n} {qid}: redundancy {r} > n"))?;
                        let want = answer_units(&f, &run, qid, n, mode);
                        ensure(r == want, || {
                            format!("seed {seed} n={n} {qid} {mode}: {r} vs brute force {want}")
                        })?;
                    }
                }
                checked += 1;
            }
        }
    }
    Ok(format!("200 seeds, {checked} (run, n) cells, 0 violations"))
}

fn difficult_mining() -> Result<String, String> {
    let dir = tempdir()?;
    let config = data("fixtures/difficult/workbench.toml");
    pipeline(&config, dir.path(), &["index", "retrieve", "judge", "difficult"])?;
    let exported_path = dir.path().join("difficult-difficult.jsonl");
    let exported = read(&exported_path)?;
    let questions = read_questions(&exported_path).map_err(|e| e.to_string())?;
    let ids: Vec<&str> = questions.iter().map(|q| q.question_id.as_str()).collect();
    ensure(ids == ["c03", "c08", "c13", "c18"], || format!("difficult set {ids:?}"))?;
    ensure(render_questions(&questions) == exported, || {
        "re-rendered question set differs".into()
    })?;
    let source = read(&data("fixtures/difficult/questions.jsonl"))?;
    let source_lines: BTreeSet<&str> = source.lines().collect();
    ensure(exported.lines().all(|l| source_lines.contains(l)), || {
        "exported line differs from its source".into()
    })?;
    Ok(format!(
        "{} of 20 selected: {}; export round-trips byte-identically",
        ids.len(),
        ids.join(" ")
    ))
}

#[derive(Deserialize)]
struct Hew {
    question_id: String,
    word: String,
}

/// Re-tests every word of a `hew` output with the configured settings.
fn retest_hew(config_path: &Path, out: &Path, hew_file: &str) -> Result<usize, String> {
    let config = WorkbenchConfig::load(config_path).map_err(|e| e.to_string())?;
    let docs = ingest_corpus(&config.corpus, config.corpus_format).map_err(|e| e.to_string())?;
    let level = config.expansion_level;
    let index = Index::read_from(&out.join(format!("index-{level}.idx"))).map_err(|e| e.to_string())?;
    let units = UnitStore::new(units_at(&docs, level));
    let keys = read_answer_keys(config.data.answers.as_ref().unwrap()).map_err(|e| e.to_string())?;
    let questions = read_questions(config.data.questions.as_ref().unwrap()).map_err(|e| e.to_string())?;
    let ctx = ExpansionContext {
        index: &index,
        units: &units,
        keys: &keys,
        stops: StopwordList::english(),
        config: &config.expansion_config,
        n: config.expansion.n,
        mode: Mode::Strict,
    };
    let words: Vec<Hew> = jsonl::read(&out.join(hew_file)).map_err(|e| e.to_string())?;
    for h in &words {
        let q = questions.iter().find(|q| q.question_id == h.question_id).unwrap();
        let outcome = test_extension(&ctx, q, &h.word).map_err(|e| e.to_string())?;
        ensure(outcome.helpful, || {
            format!("{} + {:?} is not helpful on re-test", h.question_id, h.word)
        })?;
    }
    Ok(words.len())
}

fn hew_pipeline() -> Result<String, String> {
    let steps = ["index", "retrieve", "judge", "difficult", "hew"];
    let planted = tempdir()?;
    let config = data("fixtures/hew/workbench.toml");
    pipeline(&config, planted.path(), &steps)?;
    let found: Vec<Hew> = jsonl::read(&planted.path().join("hew-hew.jsonl")).map_err(|e| e.to_string())?;
    let pairs: Vec<(&str, &str)> = found
        .iter()
        .map(|h| (h.question_id.as_str(), h.word.as_str()))
        .collect();
    ensure(pairs == [("f1", "exposition")], || {
        format!("planted fixture gave {pairs:?}")
    })?;
    let mut retested = retest_hew(&config, planted.path(), "hew-hew.jsonl")?;

    let other = tempdir()?;
    let config = data("fixtures/difficult/workbench.toml");
    pipeline(&config, other.path(), &steps)?;
    retested += retest_hew(&config, other.path(), "hew-difficult.jsonl")?;
    Ok(format!(
        "planted fixture yields {{exposition}}; {retested} emitted words all re-test helpful"
    ))
}

fn rf_direction() -> Result<String, String> {
    let dir = tempdir()?;
    pipeline(
        &data("fixtures/rf-adversarial/workbench.toml"),
        dir.path(),
        &["index", "rf"],
    )?;
    let rows = csv_rows(&dir.path().join("rf-rf.csv"))?;
    let header = ["rank", "r=5 Doc", "r=5 Para", "r=50 Doc", "r=50 Para", "Baseline"];
    ensure(rows[0] == header, || format!("header {:?}", rows[0]))?;
    let ranks: Vec<&str> = rows[1..].iter().map(|r| r[0].as_str()).collect();
    ensure(ranks == ["5", "10", "20", "50"], || format!("ranks {ranks:?}"))?;
    let mut drops = 0;
    for row in &rows[1..] {
        let cells: Vec<f64> = row[1..].iter().map(|c| c.parse().unwrap()).collect();
        let baseline = cells[4];
        for (label, c) in header[1..5].iter().zip(&cells) {
            ensure(*c <= baseline, || {
                format!("rank {} {label}: {c} > baseline {baseline}", row[0])
            })?;
            drops += usize::from(*c < baseline);
        }
    }
    Ok(format!(
        "4 ranks x (4 + baseline) grid, every expanded cell <= baseline ({drops} of 16 strictly lower)"
    ))
}

fn intersection() -> Result<String, String> {
    let hew: BTreeMap<String, BTreeSet<String>> = [("q".to_string(), ["a".to_string()].into())].into();
    let irt: BTreeMap<String, Vec<String>> = [("q".to_string(), vec!["a b".to_string()])].into();
    let rf: BTreeMap<String, Vec<String>> = [("q".to_string(), vec!["a".to_string(), "c".to_string()])].into();
    let stats = intersection_stats(&hew, &irt, &rf).map_err(|e| e.to_string())?;
    let shown: Vec<String> = stats.as_array().iter().map(|v| format!("{v:.2}")).collect();
    ensure(shown == ["100.00", "100.00", "50.00"], || format!("got {shown:?}"))?;

    let dir = tempdir()?;
    pipeline(
        &data("fixtures/hew/workbench.toml"),
        dir.path(),
        &["index", "retrieve", "judge", "difficult", "hew", "rf"],
    )?;
    let rows = csv_rows(&dir.path().join("rf-stats-hew.csv"))?;
    let labels: Vec<&str> = rows[1..].iter().map(|r| r[0].as_str()).collect();
    ensure(rows.len() == 4 && labels == INTERSECTION_ROWS, || {
        format!("report rows {rows:?}")
    })?;
    Ok(format!(
        "({}) and a 3-row report: {}",
        shown.join(", "),
        labels.join(" / ")
    ))
}

fn files(dir: &Path) -> Result<BTreeMap<PathBuf, Vec<u8>>, String> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).map_err(|e| e.to_string())? {
            let path = entry.map_err(|e| e.to_string())?.path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let bytes = std::fs::read(&path).map_err(|e| e.to_string())?;
                out.insert(path.strip_prefix(dir).unwrap().to_path_buf(), bytes);
            }
        }
    }
    Ok(out)
}

const ALL_COMMANDS: [&str; 10] = [
    "index",
    "retrieve",
    "judge",
    "report",
    "difficult",
    "hew",
    "rf",
    "reform",
    "score",
    "gen-datasets",
];

fn determinism(started: Instant) -> Result<String, String> {
    let config = data("sample/workbench.toml");
    let (a, b) = (tempdir()?, tempdir()?);
    pipeline(&config, a.path(), &ALL_COMMANDS)?;
    pipeline(&config, b.path(), &ALL_COMMANDS)?;
    let (fa, fb) = (files(a.path())?, files(b.path())?);
    let names_a: Vec<_> = fa.keys().collect();
    ensure(names_a == fb.keys().collect::<Vec<_>>(), || {
        "the two runs wrote different files".into()
    })?;
    for (name, bytes) in &fa {
        ensure(fb[name] == *bytes, || {
            format!("{} differs between runs", name.display())
        })?;
    }
    let elapsed = started.elapsed();
    ensure(elapsed < Duration::from_secs(300), || {
        format!("acceptance run took {elapsed:.1?}, limit 300s")
    })?;
    Ok(format!(
        "{} artifacts byte-identical across two runs; acceptance total {elapsed:.1?}",
        fa.len()
    ))
}

fn main() {
    let started = Instant::now();
    let checks: [(&str, Check); 10] = [
        ("metric oracle equivalence", metric_oracle),
        ("weighted combination law", weighted_law),
        ("dataset ordering on the sample", dataset_ordering),
        ("reformulation rule fixtures", rule_fixtures),
        ("retrieval oracle", retrieval_oracle),
        ("coverage and redundancy laws", coverage_laws),
        ("difficult-question mining", difficult_mining),
        ("HEW self-consistency", hew_pipeline),
        ("blind RF direction and grid shape", rf_direction),
        ("intersection statistics", intersection),
    ];
    let mut failed = 0;
    let mut report = |id: usize, name: &str, result: std::thread::Result<Result<String, String>>| {
        let (status, detail) = match result {
            Ok(Ok(d)) => ("PASS", d),
            Ok(Err(e)) => ("FAIL", e),
            Err(panic) => (
                "FAIL",
                panic
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_else(|| "panicked".into()),
            ),
        };
        if status == "FAIL" {
            failed += 1;
        }
        println!("{status} {id:>2} {name}: {detail}");
    };
    for (i, (name, check)) in checks.iter().enumerate() {
        report(i + 1, name, catch_unwind(check));
    }
    report(
        11,
        "end-to-end determinism",
        catch_unwind(AssertUnwindSafe(|| determinism(started))),
    );
    println!("{} of 11 criteria passed", 11 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
