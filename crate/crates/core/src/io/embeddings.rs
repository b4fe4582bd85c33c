use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::annotation::GroundTruthLabel;
use crate::error::{Error, Result};
use crate::frame::EmbeddingFrame;
use crate::timeline::Segment;
use crate::vector::UnitVec;

/// One line of an embedding stream:
/// `{"start":0.0,"end":0.2,"truth":"spkA","v":[...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmbeddingRecord {
    pub start: f64,
    pub end: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truth: Option<String>,
    pub v: Vec<f64>,
}

impl EmbeddingRecord {
    pub fn from_frame(frame: &EmbeddingFrame, truth: Option<&GroundTruthLabel>) -> Self {
        EmbeddingRecord {
            start: frame.start(),
            end: frame.end(),
            truth: truth.map(|t| t.tag().to_owned()),
            v: frame.vector().as_slice().to_vec(),
        }
    }

    pub fn to_frame(&self) -> Result<EmbeddingFrame> {
        Ok(EmbeddingFrame::from_parts(
            Segment::new(self.start, self.end)?,
            UnitVec::new(self.v.clone())?,
        ))
    }

    pub fn label(&self) -> Option<GroundTruthLabel> {
        self.truth.as_deref().map(GroundTruthLabel::from_tag)
    }
}

/// Reads records in file order, checking that every record is a valid
/// frame, shares the first record's dimension, and starts no earlier than
/// its predecessor.
pub fn read_embeddings<R: BufRead>(reader: R) -> Result<Vec<EmbeddingRecord>> {
    let mut out: Vec<EmbeddingRecord> = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let n = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: EmbeddingRecord =
            serde_json::from_str(&line).map_err(|e| Error::parse(n, e.to_string()))?;
        if !(rec.start.is_finite() && rec.end.is_finite()) || rec.v.iter().any(|x| !x.is_finite()) {
            return Err(Error::parse(n, "non-finite value"));
        }
        rec.to_frame().map_err(|e| Error::parse(n, e.to_string()))?;
        if let Some(first) = out.first() {
            if rec.v.len() != first.v.len() {
                return Err(Error::parse(
                    n,
                    format!("dimension {} differs from {}", rec.v.len(), first.v.len()),
                ));
            }
        }
        if let Some(prev) = out.last() {
            if rec.start < prev.start {
                return Err(Error::parse(
                    n,
                    format!("start {} precedes previous start {}", rec.start, prev.start),
                ));
            }
        }
        out.push(rec);
    }
    Ok(out)
}

pub fn write_embeddings<W: Write>(mut writer: W, records: &[EmbeddingRecord]) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut writer, r).map_err(std::io::Error::from)?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}
