//! Command-line front end of the qalab workbench.
//!
//! Every subcommand is driven by one TOML config file (see
//! [`config::WorkbenchConfig`]) and writes its artifacts under the output
//! directory:
//!
//! | subcommand     | reads                           | writes                                        |
//! |----------------|---------------------------------|-----------------------------------------------|
//! | `index`        | corpus                          | `index-<level>.idx`                           |
//! | `retrieve`     | indexes, questions              | `retrieve-<config>-<level>.jsonl`             |
//! | `judge`        | runs, answer keys, corpus       | `store/judge-<config>-<level>.jsonl`          |
//! | `report`       | judged runs                     | `report-<run_id>.csv`, `.txt`                 |
//! | `difficult`    | judged runs, questions          | `difficult-<run_id>.jsonl`, `.csv`, `.set.json` |
//! | `hew`          | difficult set, corpus, keys     | `hew-<run_id>.jsonl`                          |
//! | `rf`           | indexes, questions, keys        | `rf-<run_id>.csv`, `.txt`, `rf-stats-<run_id>.*` |
//! | `reform`       | series                          | `reform-<run_id>.jsonl`, `reform-<run_id>-baseline.jsonl` |
//! | `score`        | series, gold standard           | `score-<run_id>.csv`, `.txt`                  |
//! | `gen-datasets` | series, gold standard           | `gen-datasets-<run_id>-<dataset>.jsonl`       |
//!
//! Exit status is 0 on success, 1 on a data or I/O error and 2 on a usage,
//! config or contract error.

pub mod commands;
pub mod config;
pub mod report;

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use thiserror::Error;

use crate::commands::Workbench;
use crate::config::{check_run_id, WorkbenchConfig};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] qalab_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Core(qalab_core::Error::Contract(_)) => 2,
            CliError::Core(_) => 1,
        }
    }
}

/// Question-answering retrieval workbench.
#[derive(Debug, Parser)]
#[command(name = "qalab", version, about)]
pub struct Cli {
    /// Workbench config file.
    #[arg(long, short, global = true, default_value = "workbench.toml")]
    pub config: PathBuf,

    /// Output directory, overriding `output_dir` in the config.
    #[arg(long, global = true, env = "QALAB_OUTPUT_DIR")]
    pub output_dir: Option<PathBuf>,

    /// Maximum number of worker threads.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,

    /// Run id used in report file names, overriding `run_id` in the config.
    #[arg(long, global = true)]
    pub run_id: Option<String>,

    /// Leave out the `# generated` line of text reports.
    #[arg(long, global = true)]
    pub no_timestamp: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Build the inverted index for every configured level.
    Index,
    /// Retrieve every question with every ranking config at every level.
    Retrieve,
    /// Judge retrieval runs against the answer keys.
    Judge,
    /// Coverage and mean redundancy of the judged runs by rank.
    Report,
    /// Select questions no run answers and export them as a question set.
    Difficult,
    /// Find helpful extension words for the difficult questions.
    Hew,
    /// Blind relevance feedback coverage grid and intersection statistics.
    Rf,
    /// Reformulate the question series.
    Reform,
    /// Score datasets and reformulations against the Gold Standard.
    Score,
    /// Write the without-target, with-target and identical datasets.
    GenDatasets,
}

/// Runs one subcommand and returns its summary line.
pub fn run(cli: &Cli) -> Result<String, CliError> {
    let config = WorkbenchConfig::load(&cli.config)?;
    if let Some(id) = &cli.run_id {
        check_run_id(id)?;
    }
    let jobs = cli.jobs.or(config.jobs);
    if let Some(j) = jobs {
        if j == 0 {
            return Err(CliError::Config("--jobs must be at least 1".into()));
        }
        // A second call in the same process keeps the first pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(j).build_global();
    }
    let wb = Workbench::new(config, cli.output_dir.clone(), cli.run_id.clone(), !cli.no_timestamp);
    std::fs::create_dir_all(&wb.out).map_err(|e| qalab_core::Error::Io {
        path: wb.out.clone(),
        source: e,
    })?;
    match cli.command {
        Command::Index => commands::index(&wb),
        Command::Retrieve => commands::retrieve_cmd(&wb),
        Command::Judge => commands::judge_cmd(&wb),
        Command::Report => commands::report(&wb),
        Command::Difficult => commands::difficult(&wb),
        Command::Hew => commands::hew(&wb),
        Command::Rf => commands::rf(&wb),
        Command::Reform => commands::reform(&wb),
        Command::Score => commands::score(&wb),
        Command::GenDatasets => commands::gen_datasets(&wb),
    }
}
