use std::collections::BTreeMap;
use std::fmt::Write;

use super::{is_skippable, parse_time};
use crate::error::{Error, Result};
use crate::timeline::{Segment, Timeline};

/// Parses `<file> <chan> <tbeg> <tend>` lines; regions of one file are
/// merged into a timeline.
pub fn parse_uem(text: &str) -> Result<BTreeMap<String, Timeline>> {
    let mut regions: BTreeMap<String, Vec<Segment>> = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let n = i + 1;
        if is_skippable(line) {
            continue;
        }
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 4 {
            return Err(Error::parse(n, format!("expected 4 fields, found {}", f.len())));
        }
        let tbeg = parse_time(f[2], n, "tbeg")?;
        let tend = parse_time(f[3], n, "tend")?;
        if tend <= tbeg {
            return Err(Error::parse(n, format!("empty region [{tbeg}, {tend}]")));
        }
        regions
            .entry(f[0].to_owned())
            .or_default()
            .push(Segment::new_unchecked(tbeg, tend));
    }
    Ok(regions
        .into_iter()
        .map(|(k, v)| (k, Timeline::from_segments(v)))
        .collect())
}

pub fn write_uem(file_id: &str, uem: &Timeline) -> String {
    let mut out = String::new();
    for s in uem.segments() {
        let _ = writeln!(out, "{file_id} 1 {:.6} {:.6}", s.start(), s.end());
    }
    out
}
