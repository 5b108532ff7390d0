//! JSONL manifests and JSON split files.

use std::fs;
use std::path::Path;

use super::{DatasetSplit, GradedQuery};
use crate::error::{Error, Result};

/// Parses one query per non-blank line and validates its votes.
pub fn read_manifest(text: &str) -> Result<Vec<GradedQuery>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let q: GradedQuery =
            serde_json::from_str(line).map_err(|e| Error::Format(format!("manifest line {}: {e}", i + 1)))?;
        q.label()?;
        out.push(q);
    }
    Ok(out)
}

pub fn write_manifest(queries: &[GradedQuery]) -> String {
    let mut out = String::new();
    for q in queries {
        out.push_str(&serde_json::to_string(q).expect("query is plain JSON"));
        out.push('\n');
    }
    out
}

pub fn read_manifest_file(path: impl AsRef<Path>) -> Result<Vec<GradedQuery>> {
    read_manifest(&fs::read_to_string(path)?)
}

pub fn write_manifest_file(path: impl AsRef<Path>, queries: &[GradedQuery]) -> Result<()> {
    fs::write(path, write_manifest(queries))?;
    Ok(())
}

pub fn read_split_file(path: impl AsRef<Path>) -> Result<DatasetSplit> {
    let split: DatasetSplit = serde_json::from_str(&fs::read_to_string(path)?)?;
    split.check_disjoint()?;
    Ok(split)
}

pub fn write_split_file(path: impl AsRef<Path>, split: &DatasetSplit) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(split)? + "\n")?;
    Ok(())
}
