//! Text formats: RTTM speaker turns, UEM scoring regions, line-delimited
//! JSON embedding streams and the CSV result report.
//!
//! Parsers report the 1-based line number of the first bad line and
//! never skip malformed input (`;;` comment lines and blank lines aside).

mod embeddings;
mod report;
mod rttm;
mod uem;

pub use embeddings::{read_embeddings, write_embeddings, EmbeddingRecord};
pub use report::{write_report, ReportRow, REPORT_HEADER};
pub use rttm::{parse_rttm, write_rttm};
pub use uem::{parse_uem, write_uem};

use crate::error::{Error, Result};

fn parse_time(field: &str, line: usize, name: &str) -> Result<f64> {
    field
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::parse(line, format!("{name} `{field}` is not a finite number")))
}

fn is_skippable(line: &str) -> bool {
    let t = line.trim();
    t.is_empty() || t.starts_with(";;")
}
