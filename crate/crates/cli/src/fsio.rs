//! Input discovery and atomic output writes.

use std::fs;
use std::path::{Path, PathBuf};

use crate::CliError;

/// What a path argument is expected to contain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputKind {
    /// Annotation JSON documents (`*.json`, excluding `*.pred.json`).
    Annotations,
    /// Prediction files: interval JSON (`*.json`) or window CSV (`*.csv`).
    Predictions,
    /// Clip evaluation CSVs.
    EvalCsv,
}

fn matches_kind(path: &Path, kind: InputKind) -> bool {
    let name = match path.file_name().and_then(|n| n.to_str()) {
        Some(n) => n,
        None => return false,
    };
    match kind {
        InputKind::Annotations => name.ends_with(".json") && !name.ends_with(".pred.json"),
        InputKind::Predictions => name.ends_with(".json") || name.ends_with(".csv"),
        InputKind::EvalCsv => name.ends_with(".csv"),
    }
}

/// Expand path arguments: files are taken as-is, directories are scanned
/// (non-recursively) for files matching `kind`. The result is sorted so runs
/// are reproducible regardless of filesystem order.
pub fn collect_inputs(paths: &[PathBuf], kind: InputKind) -> Result<Vec<PathBuf>, CliError> {
    let mut files = Vec::new();
    for path in paths {
        let meta = fs::metadata(path).map_err(|e| CliError::io(path, e))?;
        if meta.is_dir() {
            let entries = fs::read_dir(path).map_err(|e| CliError::io(path, e))?;
            for entry in entries {
                let entry = entry.map_err(|e| CliError::io(path, e))?;
                let p = entry.path();
                if p.is_file() && matches_kind(&p, kind) {
                    files.push(p);
                }
            }
        } else {
            files.push(path.clone());
        }
    }
    if files.is_empty() {
        return Err(CliError::Usage(format!(
            "no input files found under {:?}",
            paths.iter().map(|p| p.display().to_string()).collect::<Vec<_>>()
        )));
    }
    files.sort();
    Ok(files)
}

/// Write via a temporary sibling plus rename, so a crash never leaves a
/// half-written report behind.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
        }
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, contents).map_err(|e| CliError::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| CliError::io(path, e))
}

pub fn read(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|e| CliError::io(path, e))
}
