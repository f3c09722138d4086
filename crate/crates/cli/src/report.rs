//! Report files. The header carries the only non-deterministic field.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::CliError;
use crate::experiments::Outcome;

#[derive(Debug, Serialize)]
pub struct Header {
    pub tool: &'static str,
    pub version: &'static str,
    pub timestamp: String,
}

#[derive(Debug, Serialize)]
struct ReportFile<'a> {
    header: Header,
    body: &'a Outcome,
}

fn io_error(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

/// The log sits next to the report with extension `jsonl`.
pub fn log_path(report: &Path) -> PathBuf {
    report.with_extension("jsonl")
}

pub fn write(path: &Path, outcome: &Outcome) -> Result<Option<PathBuf>, CliError> {
    let file = ReportFile {
        header: Header {
            tool: "qlm",
            version: env!("CARGO_PKG_VERSION"),
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        },
        body: outcome,
    };
    let mut text = serde_json::to_string_pretty(&file).expect("report serializes");
    text.push('\n');
    std::fs::write(path, text).map_err(|e| io_error(path, e))?;
    if outcome.log.is_empty() {
        return Ok(None);
    }
    let log = log_path(path);
    let mut out = std::io::BufWriter::new(std::fs::File::create(&log).map_err(|e| io_error(&log, e))?);
    for line in &outcome.log {
        writeln!(out, "{line}").map_err(|e| io_error(&log, e))?;
    }
    out.flush().map_err(|e| io_error(&log, e))?;
    Ok(Some(log))
}
