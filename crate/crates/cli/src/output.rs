use std::io::Write;
use std::path::Path;

use serde_json::Value;

use crate::commands::{CliError, Report};
use crate::Format;

pub fn render(report: &Report, format: Format) -> Result<String, CliError> {
    match format {
        Format::Json => {
            let value = if report.single && report.documents.len() == 1 {
                report.documents[0].clone()
            } else {
                Value::Array(report.documents.clone())
            };
            if report.documents.is_empty() && report.single {
                return Ok(String::new());
            }
            let mut text =
                serde_json::to_string_pretty(&value).map_err(|e| CliError::Io(e.to_string()))?;
            text.push('\n');
            Ok(text)
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let io = |e: csv::Error| CliError::Io(e.to_string());
            w.write_record(&report.csv_header).map_err(io)?;
            for row in &report.csv_rows {
                w.write_record(row).map_err(io)?;
            }
            let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
            String::from_utf8(bytes).map_err(|e| CliError::Io(e.to_string()))
        }
    }
}

/// Writes to stdout, or to `path` through a temporary file in the same
/// directory followed by a rename.
pub fn write(text: &str, path: Option<&Path>) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Io(e.to_string());
    match path {
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).map_err(io)?;
            out.flush().map_err(io)
        }
        Some(path) => {
            let dir = match path.parent() {
                Some(d) if !d.as_os_str().is_empty() => d,
                _ => Path::new("."),
            };
            let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
            tmp.write_all(text.as_bytes()).map_err(io)?;
            tmp.persist(path)
                .map_err(|e| CliError::Io(format!("{}: {}", path.display(), e.error)))?;
            Ok(())
        }
    }
}
