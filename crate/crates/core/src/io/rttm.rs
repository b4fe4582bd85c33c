use std::collections::BTreeMap;
use std::fmt::Write;

use super::{is_skippable, parse_time};
use crate::annotation::{Annotation, SpeakerId, Turn};
use crate::error::{Error, Result};
use crate::timeline::Segment;

/// Parses `SPEAKER <file> <chan> <tbeg> <tdur> <NA> <NA> <speaker> <NA> <NA>`
/// lines into one annotation per file id. The channel is ignored.
pub fn parse_rttm(text: &str) -> Result<BTreeMap<String, Annotation>> {
    let mut turns: BTreeMap<String, Vec<Turn>> = BTreeMap::new();
    let mut first_line: BTreeMap<String, usize> = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let n = i + 1;
        if is_skippable(line) {
            continue;
        }
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 10 {
            return Err(Error::parse(n, format!("expected 10 fields, found {}", f.len())));
        }
        if f[0] != "SPEAKER" {
            return Err(Error::parse(n, format!("unsupported record type `{}`", f[0])));
        }
        let tbeg = parse_time(f[3], n, "tbeg")?;
        let tdur = parse_time(f[4], n, "tdur")?;
        if tdur <= 0.0 {
            return Err(Error::parse(n, format!("tdur must be positive, got {tdur}")));
        }
        let segment = Segment::new(tbeg, tbeg + tdur).map_err(|e| Error::parse(n, e.to_string()))?;
        first_line.entry(f[1].to_owned()).or_insert(n);
        turns.entry(f[1].to_owned()).or_default().push(Turn {
            segment,
            speaker: SpeakerId::new(f[7]),
        });
    }
    turns
        .into_iter()
        .map(|(file, t)| {
            let line = first_line[&file];
            Annotation::new(t)
                .map(|a| (file, a))
                .map_err(|e| Error::parse(line, e.to_string()))
        })
        .collect()
}

/// Writes one RTTM line per turn, in the annotation's turn order.
pub fn write_rttm(file_id: &str, annotation: &Annotation) -> String {
    let mut out = String::new();
    for t in annotation.turns() {
        let _ = writeln!(
            out,
            "SPEAKER {file_id} 1 {:.6} {:.6} <NA> <NA> {} <NA> <NA>",
            t.segment.start(),
            t.segment.duration(),
            t.speaker
        );
    }
    out
}
