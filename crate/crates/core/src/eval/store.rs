use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::eval::JudgedRun;

/// Directory of judged runs, one `judge-<run_id>.jsonl` file per run.
///
/// Re-judging a run replaces its file. Since judging is deterministic the
/// replacement is byte-identical when inputs are unchanged.
#[derive(Debug, Clone)]
pub struct FailureStore {
    dir: PathBuf,
}

impl FailureStore {
    /// Opens the store, creating the directory if needed.
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        Ok(FailureStore { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for(&self, run_id: &str) -> PathBuf {
        self.dir.join(format!("judge-{run_id}.jsonl"))
    }

    pub fn put(&self, run: &JudgedRun) -> Result<PathBuf> {
        let path = self.path_for(&run.run_id);
        std::fs::write(&path, run.to_text()).map_err(|e| Error::io(&path, e))?;
        Ok(path)
    }

    pub fn get(&self, run_id: &str) -> Result<JudgedRun> {
        let path = self.path_for(run_id);
        let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let run = JudgedRun::from_text(&path.display().to_string(), &text)?;
        if run.run_id != run_id {
            return Err(Error::data(
                path.display().to_string(),
                format!("file holds run {} instead of {run_id}", run.run_id),
            ));
        }
        Ok(run)
    }

    /// Ids of all stored runs, sorted.
    pub fn run_ids(&self) -> Result<Vec<String>> {
        let entries = std::fs::read_dir(&self.dir).map_err(|e| Error::io(&self.dir, e))?;
        let mut ids = Vec::new();
        for entry in entries {
            let entry = entry.map_err(|e| Error::io(&self.dir, e))?;
            let name = entry.file_name();
            if let Some(id) = name
                .to_str()
                .and_then(|n| n.strip_prefix("judge-"))
                .and_then(|n| n.strip_suffix(".jsonl"))
            {
                ids.push(id.to_string());
            }
        }
        ids.sort();
        Ok(ids)
    }
}
