//! Enrollment split and the chronological self-training loop.
//!
//! The model is fit on the enrollment frames, then the test stream is
//! consumed in batches of `B`: every frame of a batch is predicted with
//! the current model, and once the batch is complete the accepted
//! predictions are folded back into the model as pseudo-labels. An output,
//! once emitted, is never revised.

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use crate::annotation::{GroundTruthLabel, SpeakerId};
use crate::classifiers::{ClassifierConfig, LabeledSample, ModelState, Prediction};
use crate::error::{Error, Result};
use crate::frame::EmbeddingFrame;
use crate::timeline::TIME_EPS;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelfTrainConfig {
    pub batch_size: usize,
    /// Minimum posterior for a prediction to be used as a pseudo-label.
    /// `None` accepts every prediction.
    pub score_threshold: Option<f64>,
    pub adaptive: bool,
}

impl Default for SelfTrainConfig {
    fn default() -> Self {
        SelfTrainConfig {
            batch_size: 10,
            score_threshold: None,
            adaptive: false,
        }
    }
}

impl SelfTrainConfig {
    pub fn adaptive() -> Self {
        SelfTrainConfig {
            adaptive: true,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::Config("batch size must be at least 1".into()));
        }
        if let Some(t) = self.score_threshold {
            if !(0.0..=1.0).contains(&t) {
                return Err(Error::Config(format!("threshold {t} outside [0, 1]")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitSpec {
    /// Speech each speaker must accumulate before enrollment ends.
    pub train_seconds: f64,
    /// When set, testing starts at the first frame starting at or after
    /// this time instead of right after enrollment.
    pub fixed_test_start: Option<f64>,
    /// Speakers that must enroll. Defaults to every speaker in the truth.
    pub speakers: Option<BTreeSet<SpeakerId>>,
}

impl SplitSpec {
    pub fn new(train_seconds: f64) -> Self {
        SplitSpec {
            train_seconds,
            fixed_test_start: None,
            speakers: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Split {
    pub train: Vec<LabeledSample>,
    /// Index of the first frame after enrollment.
    pub split_index: usize,
    /// Index of the first test frame (equal to `split_index` unless a
    /// fixed test start is requested).
    pub test_start: usize,
}

/// Index of the first frame at which every speaker has accumulated
/// `train_seconds` of single-speaker frames (exclusive end of enrollment).
pub fn enrollment_end(
    frames: &[EmbeddingFrame],
    truth: &[GroundTruthLabel],
    train_seconds: f64,
    speakers: &BTreeSet<SpeakerId>,
) -> Result<usize> {
    if frames.len() != truth.len() {
        return Err(Error::LengthMismatch {
            left: frames.len(),
            right: truth.len(),
        });
    }
    if speakers.len() < 2 {
        return Err(Error::Config(format!(
            "enrollment needs at least 2 speakers, found {}",
            speakers.len()
        )));
    }
    let mut spoken: BTreeMap<&SpeakerId, f64> = speakers.iter().map(|s| (s, 0.0)).collect();
    let done = |spoken: &BTreeMap<&SpeakerId, f64>| {
        spoken.values().all(|&t| t >= train_seconds - TIME_EPS)
    };
    for (i, (frame, label)) in frames.iter().zip(truth).enumerate() {
        if let Some(acc) = label.speaker().and_then(|s| spoken.get_mut(s)) {
            *acc += frame.end() - frame.start();
            if done(&spoken) {
                return Ok(i + 1);
            }
        }
    }
    let (speaker, accumulated) = spoken
        .iter()
        .find(|(_, &t)| t < train_seconds - TIME_EPS)
        .map(|(s, t)| ((*s).clone(), *t))
        .expect("some speaker fell short");
    Err(Error::UnreachableSplit {
        speaker,
        accumulated,
        required: train_seconds,
    })
}

/// Splits a stream chronologically into enrollment samples and a test
/// region. Overlap and non-speech frames never become training samples.
pub fn chronological_split(
    frames: &[EmbeddingFrame],
    truth: &[GroundTruthLabel],
    spec: &SplitSpec,
) -> Result<Split> {
    if !(spec.train_seconds > 0.0) {
        return Err(Error::Config("train_seconds must be positive".into()));
    }
    let speakers = match &spec.speakers {
        Some(s) => s.clone(),
        None => truth.iter().filter_map(|l| l.speaker().cloned()).collect(),
    };
    let split_index = enrollment_end(frames, truth, spec.train_seconds, &speakers)?;
    let train = frames[..split_index]
        .iter()
        .zip(&truth[..split_index])
        .filter_map(|(f, l)| match l {
            GroundTruthLabel::Speaker(s) if speakers.contains(s) => {
                Some(LabeledSample::enrollment(f.vector().clone(), s.clone()))
            }
            _ => None,
        })
        .collect();
    let test_start = match spec.fixed_test_start {
        None => split_index,
        Some(t) => {
            let idx = frames.partition_point(|f| f.start() < t - TIME_EPS);
            if idx < split_index {
                return Err(Error::Config(format!(
                    "fixed test start {t}s falls inside the enrollment window"
                )));
            }
            idx
        }
    };
    Ok(Split {
        train,
        split_index,
        test_start,
    })
}

/// Per-frame wall time of predict plus any update it triggered.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LatencyStats {
    pub frames: usize,
    pub mean_seconds: f64,
    pub median_seconds: f64,
    pub max_seconds: f64,
}

impl LatencyStats {
    fn from_samples(mut s: Vec<f64>) -> Self {
        if s.is_empty() {
            return Self::default();
        }
        s.sort_by(f64::total_cmp);
        let n = s.len();
        let median = if n % 2 == 1 {
            s[n / 2]
        } else {
            0.5 * (s[n / 2 - 1] + s[n / 2])
        };
        LatencyStats {
            frames: n,
            mean_seconds: s.iter().sum::<f64>() / n as f64,
            median_seconds: median,
            max_seconds: s[n - 1],
        }
    }
}

#[derive(Debug, Clone)]
pub struct SessionResult {
    /// One prediction per test frame, in stream order.
    pub predictions: Vec<Prediction>,
    pub model: ModelState,
    /// Predictions folded back as pseudo-labels.
    pub accepted: usize,
    /// Predictions not folded back (below threshold, or not adaptive).
    pub rejected: usize,
    /// Timing is excluded from determinism guarantees.
    pub latency: LatencyStats,
}

/// Incremental form of the loop: push frames as they arrive.
#[derive(Debug, Clone)]
pub struct OnlineSession {
    model: ModelState,
    config: SelfTrainConfig,
    pending: Vec<LabeledSample>,
    in_batch: usize,
    accepted: usize,
    rejected: usize,
}

impl OnlineSession {
    pub fn new(model: ModelState, config: SelfTrainConfig) -> Result<Self> {
        config.validate()?;
        if model.classes().is_empty() {
            return Err(Error::Unfitted);
        }
        Ok(OnlineSession {
            model,
            config,
            pending: Vec::with_capacity(config.batch_size),
            in_batch: 0,
            accepted: 0,
            rejected: 0,
        })
    }

    pub fn model(&self) -> &ModelState {
        &self.model
    }

    /// Predicts one frame with the current model. Completing a batch
    /// triggers the pseudo-label update before returning.
    pub fn push(&mut self, frame: &EmbeddingFrame) -> Result<Prediction> {
        let pred = self.model.predict(frame.vector())?;
        let take = self.config.adaptive
            && self.config.score_threshold.is_none_or(|t| pred.score >= t);
        if take {
            self.accepted += 1;
            self.pending
                .push(LabeledSample::pseudo(frame.vector().clone(), pred.label.clone()));
        } else {
            self.rejected += 1;
        }
        self.in_batch += 1;
        if self.in_batch == self.config.batch_size {
            self.flush()?;
        }
        Ok(pred)
    }

    fn flush(&mut self) -> Result<()> {
        self.model.partial_update(&self.pending)?;
        self.pending.clear();
        self.in_batch = 0;
        Ok(())
    }

    /// Applies the update for a trailing partial batch and returns the
    /// final model with the acceptance counts.
    pub fn finish(mut self) -> Result<(ModelState, usize, usize)> {
        if self.in_batch > 0 {
            self.flush()?;
        }
        Ok((self.model, self.accepted, self.rejected))
    }
}

/// Fits on `train`, then runs the self-training loop over `test_frames`.
pub fn run_session(
    train: &[LabeledSample],
    test_frames: &[EmbeddingFrame],
    classifier: ClassifierConfig,
    selftrain: SelfTrainConfig,
) -> Result<SessionResult> {
    let classes: BTreeSet<&SpeakerId> = train.iter().map(|s| &s.label).collect();
    if classes.len() < 2 {
        return Err(Error::Config(format!(
            "training data covers {} class(es); at least 2 required",
            classes.len()
        )));
    }
    let model = ModelState::fit(classifier, train)?;
    let mut session = OnlineSession::new(model, selftrain)?;
    let mut predictions = Vec::with_capacity(test_frames.len());
    let mut times = Vec::with_capacity(test_frames.len());
    for frame in test_frames {
        let t0 = Instant::now();
        predictions.push(session.push(frame)?);
        times.push(t0.elapsed().as_secs_f64());
    }
    let (model, accepted, rejected) = session.finish()?;
    Ok(SessionResult {
        predictions,
        model,
        accepted,
        rejected,
        latency: LatencyStats::from_samples(times),
    })
}
