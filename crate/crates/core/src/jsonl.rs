//! Line-delimited JSON helpers shared by every file format in the crate.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};

/// Parses one record per non-blank line. Errors carry the line number and
/// the byte offset at which the offending line starts.
pub fn parse<T: DeserializeOwned>(source: &str, text: &str) -> Result<Vec<T>> {
    let mut records = Vec::new();
    let mut offset = 0;
    for (lineno, line) in text.split_inclusive('\n').enumerate() {
        let start = offset;
        offset += line.len();
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let record = serde_json::from_str(trimmed)
            .map_err(|e| Error::data(format!("{source}:{} (byte {start})", lineno + 1), e.to_string()))?;
        records.push(record);
    }
    Ok(records)
}

pub fn read<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse(&path.display().to_string(), &text)
}

/// Renders records one per line, each line terminated by `\n`.
pub fn render<T: Serialize>(records: &[T]) -> String {
    let mut out = String::new();
    for r in records {
        // Serializing plain data structs to a String cannot fail.
        out.push_str(&serde_json::to_string(r).expect("record serializes"));
        out.push('\n');
    }
    out
}

pub fn write<T: Serialize>(path: &Path, records: &[T]) -> Result<()> {
    let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(render(records).as_bytes())
        .map_err(|e| Error::io(path, e))
}
