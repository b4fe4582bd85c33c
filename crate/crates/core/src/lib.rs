//! Streaming speaker diarization over speaker-embedding frames.
//!
//! A session enrolls each speaker from the first few seconds of their
//! speech, then classifies the remaining frames as they arrive while
//! optionally folding its own predictions back into the model
//! (chronological self-training). Results are scored by frame accuracy
//! and diarization error rate.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod annotation;
pub mod classifiers;
pub mod datagen;
pub mod error;
pub mod frame;
pub mod harness;
pub mod io;
pub mod metrics;
pub mod session;
pub mod timeline;
pub mod vector;

pub use annotation::{Annotation, GroundTruthLabel, SpeakerId, Turn};
pub use error::{Error, Result};
pub use frame::EmbeddingFrame;
pub use timeline::{Segment, Timeline};
pub use vector::{cosine_distance, normalize, UnitVec};
