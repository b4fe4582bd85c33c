//! Incremental classifiers over unit-vector embeddings.
//!
//! All three models keep sufficient statistics that can be extended one
//! batch at a time, so retraining on pseudo-labels is a cheap update
//! rather than a refit. [`ModelState`] is the common front: it owns the
//! class list, validates inputs and turns model scores into a
//! [`Prediction`].

mod gnb;
mod knn;
mod nc;

use std::collections::BTreeMap;

use crate::annotation::SpeakerId;
use crate::error::{Error, Result};
use crate::frame::EmbeddingFrame;
use crate::vector::UnitVec;

pub use gnb::GnbState;
pub use knn::KnnState;
pub use nc::NcState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ClassifierKind {
    Knn,
    Gnb,
    Nc,
}

impl ClassifierKind {
    pub fn name(&self) -> &'static str {
        match self {
            ClassifierKind::Knn => "knn",
            ClassifierKind::Gnb => "gnb",
            ClassifierKind::Nc => "nc",
        }
    }
}

impl std::str::FromStr for ClassifierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "knn" => Ok(ClassifierKind::Knn),
            "gnb" => Ok(ClassifierKind::Gnb),
            "nc" => Ok(ClassifierKind::Nc),
            other => Err(Error::Config(format!("unknown classifier `{other}`"))),
        }
    }
}

impl std::fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Classifier settings. The metric is always cosine.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifierConfig {
    pub kind: ClassifierKind,
    /// Neighbours consulted by K-NN.
    pub k: usize,
    /// GNB variance floor, as a fraction of the largest pooled feature variance.
    pub var_smoothing: f64,
    /// GNB only: ignore class frequencies and use equal priors.
    pub uniform_prior: bool,
}

impl ClassifierConfig {
    pub fn new(kind: ClassifierKind) -> Self {
        ClassifierConfig {
            kind,
            k: 3,
            var_smoothing: 0.1,
            uniform_prior: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::Config("k must be at least 1".into()));
        }
        if !(self.var_smoothing >= 0.0 && self.var_smoothing.is_finite()) {
            return Err(Error::Config("var_smoothing must be a finite value >= 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleOrigin {
    Enrollment,
    Pseudo,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSample {
    pub vector: UnitVec,
    pub label: SpeakerId,
    pub origin: SampleOrigin,
}

impl LabeledSample {
    pub fn enrollment(vector: UnitVec, label: SpeakerId) -> Self {
        LabeledSample {
            vector,
            label,
            origin: SampleOrigin::Enrollment,
        }
    }

    pub fn pseudo(vector: UnitVec, label: SpeakerId) -> Self {
        LabeledSample {
            vector,
            label,
            origin: SampleOrigin::Pseudo,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub label: SpeakerId,
    /// Posterior of `label`; the largest entry of `posteriors`.
    pub score: f64,
    pub posteriors: BTreeMap<SpeakerId, f64>,
}

/// Model-specific sufficient statistics.
#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Knn(KnnState),
    Gnb(GnbState),
    Nc(NcState),
}

/// Internal scoring interface shared by the three models. Class indices
/// refer to the sorted class list held by [`ModelState`].
pub(crate) trait Scorer {
    fn absorb(&mut self, items: &[(usize, &[f64])]);

    /// Returns the winning class index and one posterior per class.
    /// Ties must resolve to the lowest index.
    fn score(&self, x: &[f64]) -> (usize, Vec<f64>);
}

/// A fitted (or empty) classifier.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelState {
    config: ClassifierConfig,
    dim: usize,
    classes: Vec<SpeakerId>,
    model: Model,
}

impl ModelState {
    /// An empty, unfitted model. Predicting from it is an error.
    pub fn new(config: ClassifierConfig, dim: usize) -> Result<Self> {
        config.validate()?;
        let model = match config.kind {
            ClassifierKind::Knn => Model::Knn(KnnState::new(dim, config.k)),
            ClassifierKind::Gnb => Model::Gnb(GnbState::new(
                dim,
                config.var_smoothing,
                config.uniform_prior,
            )),
            ClassifierKind::Nc => Model::Nc(NcState::new(dim)),
        };
        Ok(ModelState {
            config,
            dim,
            classes: Vec::new(),
            model,
        })
    }

    /// Fits on enrollment samples. The class set is fixed to the labels
    /// present in `samples`.
    pub fn fit(config: ClassifierConfig, samples: &[LabeledSample]) -> Result<Self> {
        let first = samples.first().ok_or(Error::EmptySamples)?;
        let mut state = ModelState::new(config, first.vector.dim())?;
        let mut classes: Vec<SpeakerId> = samples.iter().map(|s| s.label.clone()).collect();
        classes.sort();
        classes.dedup();
        state.model.register_classes(classes.len());
        state.classes = classes;
        state.partial_update(samples)?;
        Ok(state)
    }

    /// Folds `batch` into the statistics. Labels must be enrolled classes.
    pub fn partial_update(&mut self, batch: &[LabeledSample]) -> Result<()> {
        if batch.is_empty() {
            return Ok(());
        }
        let mut items = Vec::with_capacity(batch.len());
        for s in batch {
            self.check_dim(s.vector.dim())?;
            let idx = self
                .class_index(&s.label)
                .ok_or_else(|| Error::UnknownClass(s.label.clone()))?;
            items.push((idx, s.vector.as_slice()));
        }
        self.scorer_mut().absorb(&items);
        Ok(())
    }

    pub fn predict(&self, x: &UnitVec) -> Result<Prediction> {
        if self.classes.is_empty() {
            return Err(Error::Unfitted);
        }
        self.check_dim(x.dim())?;
        let (best, post) = self.scorer().score(x.as_slice());
        Ok(Prediction {
            label: self.classes[best].clone(),
            score: post[best],
            posteriors: self.classes.iter().cloned().zip(post).collect(),
        })
    }

    /// Predicts every frame with the current model; never mutates it.
    pub fn predict_batch(&self, frames: &[EmbeddingFrame]) -> Result<Vec<Prediction>> {
        frames.iter().map(|f| self.predict(f.vector())).collect()
    }

    pub fn config(&self) -> &ClassifierConfig {
        &self.config
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn classes(&self) -> &[SpeakerId] {
        &self.classes
    }

    pub fn class_index(&self, label: &SpeakerId) -> Option<usize> {
        self.classes.binary_search(label).ok()
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    fn check_dim(&self, found: usize) -> Result<()> {
        if found != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found,
            });
        }
        Ok(())
    }

    fn scorer(&self) -> &dyn Scorer {
        match &self.model {
            Model::Knn(m) => m,
            Model::Gnb(m) => m,
            Model::Nc(m) => m,
        }
    }

    fn scorer_mut(&mut self) -> &mut dyn Scorer {
        match &mut self.model {
            Model::Knn(m) => m,
            Model::Gnb(m) => m,
            Model::Nc(m) => m,
        }
    }
}

impl Model {
    fn register_classes(&mut self, n: usize) {
        match self {
            Model::Knn(m) => m.register_classes(n),
            Model::Gnb(m) => m.register_classes(n),
            Model::Nc(m) => m.register_classes(n),
        }
    }
}

/// Index of the first maximum.
pub(crate) fn argmax_first(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

/// Normalized exponentials, shifted by the maximum for stability.
pub(crate) fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}
