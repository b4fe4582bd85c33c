use crate::error::Result;
use crate::timeline::Segment;
use crate::vector::UnitVec;

/// One embedding window: a time span plus a unit vector.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingFrame {
    span: Segment,
    vector: UnitVec,
}

impl EmbeddingFrame {
    /// Validates the span and normalizes `vector`.
    pub fn new(start: f64, end: f64, vector: Vec<f64>) -> Result<Self> {
        Ok(EmbeddingFrame {
            span: Segment::new(start, end)?,
            vector: UnitVec::new(vector)?,
        })
    }

    pub fn from_parts(span: Segment, vector: UnitVec) -> Self {
        EmbeddingFrame { span, vector }
    }

    pub fn start(&self) -> f64 {
        self.span.start()
    }

    pub fn end(&self) -> f64 {
        self.span.end()
    }

    pub fn span(&self) -> Segment {
        self.span
    }

    pub fn vector(&self) -> &UnitVec {
        &self.vector
    }

    pub fn dim(&self) -> usize {
        self.vector.dim()
    }
}
