//! Workbench configuration file.
//!
//! A single TOML file drives every subcommand. Relative paths are resolved
//! against the directory holding the config file, and every referenced
//! input must exist when the config is loaded.

use std::path::{Path, PathBuf};

use qalab_core::corpus::{CorpusFormat, Level, RankingConfig, Scheme};
use qalab_core::eval::Mode;
use qalab_core::sim::{GramWeights, MetricKind};
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusSection {
    pub path: PathBuf,
    pub format: String,
    /// Stopword list file; the bundled English list when absent.
    pub stopwords: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IndexSection {
    pub levels: Vec<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RankingSection {
    pub name: String,
    pub scheme: String,
    pub k1: Option<f64>,
    pub b: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSection {
    pub questions: Option<PathBuf>,
    pub answers: Option<PathBuf>,
    pub series: Option<PathBuf>,
    pub gold: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricSection {
    #[serde(default)]
    pub kind: MetricKind,
    #[serde(default = "default_weights")]
    pub weights: [f64; 3],
}

impl Default for MetricSection {
    fn default() -> Self {
        MetricSection {
            kind: MetricKind::default(),
            weights: default_weights(),
        }
    }
}

fn default_weights() -> [f64; 3] {
    GramWeights::default().as_array()
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalSection {
    /// Retrieval depth of every run.
    #[serde(default = "default_cutoff")]
    pub cutoff: usize,
    /// Ranks reported by `report` and `rf`.
    #[serde(default = "default_ranks")]
    pub ranks: Vec<usize>,
    /// Depth used when selecting difficult questions.
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default)]
    pub threshold: f64,
    #[serde(default = "default_modes")]
    pub modes: Vec<Mode>,
}

impl Default for EvalSection {
    fn default() -> Self {
        EvalSection {
            cutoff: default_cutoff(),
            ranks: default_ranks(),
            n: default_n(),
            threshold: 0.0,
            modes: default_modes(),
        }
    }
}

fn default_cutoff() -> usize {
    50
}

fn default_ranks() -> Vec<usize> {
    vec![5, 10, 20, 50]
}

fn default_n() -> usize {
    20
}

fn default_modes() -> Vec<Mode> {
    Mode::ALL.to_vec()
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpansionSection {
    /// Level whose runs are judged in `hew` and `rf`.
    #[serde(default = "default_level")]
    pub level: String,
    /// Ranking configuration used by `hew` and `rf`; the first one when
    /// absent.
    pub config: Option<String>,
    /// Redundancy depth when testing extension words.
    #[serde(default = "default_n")]
    pub n: usize,
    /// Feedback depths of the coverage grid.
    #[serde(default = "default_rs")]
    pub r: Vec<usize>,
    /// Feedback words appended per question.
    #[serde(default = "default_k")]
    pub k: usize,
    /// Depth of the initially retrieved texts in the intersection statistics.
    #[serde(default = "default_irt_r")]
    pub irt_r: usize,
}

impl Default for ExpansionSection {
    fn default() -> Self {
        ExpansionSection {
            level: default_level(),
            config: None,
            n: default_n(),
            r: default_rs(),
            k: default_k(),
            irt_r: default_irt_r(),
        }
    }
}

fn default_level() -> String {
    "passage".to_string()
}

fn default_rs() -> Vec<usize> {
    vec![5, 50]
}

fn default_k() -> usize {
    5
}

fn default_irt_r() -> usize {
    5
}

/// The file as written.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    run_id: Option<String>,
    output_dir: Option<PathBuf>,
    jobs: Option<usize>,
    corpus: CorpusSection,
    index: IndexSection,
    ranking: Vec<RankingSection>,
    #[serde(default)]
    data: DataSection,
    #[serde(default)]
    metric: MetricSection,
    #[serde(default)]
    eval: EvalSection,
    #[serde(default)]
    expansion: ExpansionSection,
}

/// Validated configuration with absolute paths and parsed enums.
#[derive(Debug, Clone)]
pub struct WorkbenchConfig {
    pub run_id: String,
    pub output_dir: PathBuf,
    pub jobs: Option<usize>,
    pub corpus: PathBuf,
    pub corpus_format: CorpusFormat,
    pub stopwords: Option<PathBuf>,
    pub levels: Vec<Level>,
    pub rankings: Vec<RankingConfig>,
    pub data: DataSection,
    pub metric: MetricKind,
    pub weights: GramWeights,
    pub eval: EvalSection,
    pub expansion_level: Level,
    pub expansion_config: RankingConfig,
    pub expansion: ExpansionSection,
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn resolve(base: &Path, key: &str, p: &Path) -> Result<PathBuf, CliError> {
    let full = if p.is_absolute() { p.to_path_buf() } else { base.join(p) };
    if !full.exists() {
        return Err(invalid(format!("{key}: {} does not exist", full.display())));
    }
    Ok(full)
}

fn parse_level(key: &str, s: &str) -> Result<Level, CliError> {
    s.parse().map_err(|e: qalab_core::Error| invalid(format!("{key}: {e}")))
}

fn ranking(section: &RankingSection) -> Result<RankingConfig, CliError> {
    let scheme = match section.scheme.as_str() {
        "tfidf" => {
            if section.k1.is_some() || section.b.is_some() {
                return Err(invalid(format!(
                    "ranking {}: k1 and b only apply to bm25",
                    section.name
                )));
            }
            Scheme::TfIdf
        }
        "bm25" => {
            let Scheme::Bm25 { k1, b } = Scheme::BM25_DEFAULT else {
                unreachable!()
            };
            Scheme::Bm25 {
                k1: section.k1.unwrap_or(k1),
                b: section.b.unwrap_or(b),
            }
        }
        other => {
            return Err(invalid(format!(
                "ranking {}: unknown scheme {other:?} (expected tfidf or bm25)",
                section.name
            )))
        }
    };
    RankingConfig::new(section.name.clone(), scheme).map_err(|e| invalid(format!("ranking: {e}")))
}

impl WorkbenchConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| invalid(format!("--config: cannot read {}: {e}", path.display())))?;
        let raw: RawConfig = toml::from_str(&text).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
        let base = path
            .parent()
            .filter(|p| !p.as_os_str().is_empty())
            .unwrap_or(Path::new("."));
        Self::from_raw(raw, base)
    }

    fn from_raw(raw: RawConfig, base: &Path) -> Result<Self, CliError> {
        let corpus = resolve(base, "corpus.path", &raw.corpus.path)?;
        let corpus_format = raw
            .corpus
            .format
            .parse()
            .map_err(|e: qalab_core::Error| invalid(format!("corpus.format: {e}")))?;
        let stopwords = raw
            .corpus
            .stopwords
            .as_deref()
            .map(|p| resolve(base, "corpus.stopwords", p))
            .transpose()?;

        if raw.index.levels.is_empty() {
            return Err(invalid("index.levels: at least one level is required"));
        }
        let mut levels = Vec::new();
        for l in &raw.index.levels {
            let level = parse_level("index.levels", l)?;
            if levels.contains(&level) {
                return Err(invalid(format!("index.levels: {level} listed twice")));
            }
            levels.push(level);
        }

        if raw.ranking.is_empty() {
            return Err(invalid("ranking: at least one [[ranking]] table is required"));
        }
        let rankings = raw.ranking.iter().map(ranking).collect::<Result<Vec<_>, _>>()?;
        for (i, r) in rankings.iter().enumerate() {
            if rankings[..i].iter().any(|o| o.name == r.name) {
                return Err(invalid(format!("ranking: name {} used twice", r.name)));
            }
        }

        let data = DataSection {
            questions: raw
                .data
                .questions
                .as_deref()
                .map(|p| resolve(base, "data.questions", p))
                .transpose()?,
            answers: raw
                .data
                .answers
                .as_deref()
                .map(|p| resolve(base, "data.answers", p))
                .transpose()?,
            series: raw
                .data
                .series
                .as_deref()
                .map(|p| resolve(base, "data.series", p))
                .transpose()?,
            gold: raw
                .data
                .gold
                .as_deref()
                .map(|p| resolve(base, "data.gold", p))
                .transpose()?,
        };

        let [w1, w2, w3] = raw.metric.weights;
        let weights = GramWeights::new(w1, w2, w3).map_err(|e| invalid(format!("metric.weights: {e}")))?;

        let eval = raw.eval;
        if eval.cutoff == 0 {
            return Err(invalid("eval.cutoff must be at least 1"));
        }
        if eval.ranks.is_empty() || eval.ranks.iter().any(|&n| n == 0 || n > eval.cutoff) {
            return Err(invalid(format!(
                "eval.ranks must be non-empty and within 1..={}",
                eval.cutoff
            )));
        }
        if eval.n == 0 || eval.n > eval.cutoff {
            return Err(invalid(format!("eval.n must be within 1..={}", eval.cutoff)));
        }
        if !eval.threshold.is_finite() || eval.threshold < 0.0 {
            return Err(invalid("eval.threshold must be a finite number >= 0"));
        }
        if eval.modes.is_empty() {
            return Err(invalid("eval.modes must name at least one mode"));
        }

        let expansion = raw.expansion;
        let expansion_level = parse_level("expansion.level", &expansion.level)?;
        let expansion_config = match &expansion.config {
            Some(name) => rankings
                .iter()
                .find(|r| &r.name == name)
                .cloned()
                .ok_or_else(|| invalid(format!("expansion.config: no ranking named {name}")))?,
            None => rankings[0].clone(),
        };
        if expansion.n == 0 || expansion.k == 0 || expansion.irt_r == 0 {
            return Err(invalid(
                "expansion.n, expansion.k and expansion.irt_r must be at least 1",
            ));
        }
        if expansion.r.is_empty() || expansion.r.contains(&0) {
            return Err(invalid("expansion.r must list feedback depths >= 1"));
        }

        let run_id = raw.run_id.unwrap_or_else(|| "default".to_string());
        check_run_id(&run_id)?;
        let output_dir = match raw.output_dir {
            Some(p) if p.is_absolute() => p,
            Some(p) => base.join(p),
            None => base.join("out"),
        };
        if raw.jobs == Some(0) {
            return Err(invalid("jobs must be at least 1"));
        }

        Ok(WorkbenchConfig {
            run_id,
            output_dir,
            jobs: raw.jobs,
            corpus,
            corpus_format,
            stopwords,
            levels,
            rankings,
            data,
            metric: raw.metric.kind,
            weights,
            eval,
            expansion_level,
            expansion_config,
            expansion,
        })
    }
}

/// Run ids become part of file names.
pub fn check_run_id(run_id: &str) -> Result<(), CliError> {
    if run_id.is_empty()
        || !run_id
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_' || c == '.')
    {
        return Err(invalid(format!(
            "--run-id: {run_id:?} must be non-empty ASCII letters, digits, '.', '-' or '_'"
        )));
    }
    Ok(())
}
