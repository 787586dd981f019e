use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::CliError;

/// Counts over the rows of one run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub suite: String,
    pub function: String,
    pub params: String,
    pub pass_count: usize,
    pub fail_count: usize,
    /// Largest measured error over its budget; `null` when no row has a ratio.
    pub max_ratio: Option<f64>,
}

impl Summary {
    pub fn all_pass(&self) -> bool {
        self.fail_count == 0
    }

    pub fn into_result(self) -> Result<Self, CliError> {
        if self.all_pass() {
            Ok(self)
        } else {
            Err(CliError::ContractFailure { failed: self.fail_count, total: self.pass_count + self.fail_count })
        }
    }
}

/// Rows in memory, rendered only after every cell has succeeded.
#[derive(Debug, Clone)]
pub struct Report<R> {
    pub rows: Vec<R>,
    pub summary: Summary,
}

pub fn to_csv<R: Serialize>(rows: &[R]) -> Result<String, CliError> {
    let mut writer = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    for row in rows {
        writer.serialize(row).map_err(|e| CliError::Runtime(e.to_string()))?;
    }
    let bytes = writer.into_inner().map_err(|e| CliError::Runtime(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Runtime(e.to_string()))
}

#[derive(Serialize)]
struct JsonDocument<'a, R> {
    summary: &'a Summary,
    rows: &'a [R],
}

pub fn to_json<R: Serialize>(report: &Report<R>) -> Result<String, CliError> {
    let doc = JsonDocument { summary: &report.summary, rows: &report.rows };
    let mut text = serde_json::to_string_pretty(&doc).map_err(|e| CliError::Runtime(e.to_string()))?;
    text.push('\n');
    Ok(text)
}

/// Path of the JSON summary that accompanies `csv`.
pub fn summary_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

/// Writes `contents` to every path, creating parent directories. Everything
/// is rendered beforehand, so a failure here is the only way to leave a
/// partial result behind.
pub fn write_all(files: &[(PathBuf, String)]) -> Result<(), CliError> {
    for (path, contents) in files {
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            fs::create_dir_all(parent)?;
        }
        fs::write(path, contents).map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(())
}
