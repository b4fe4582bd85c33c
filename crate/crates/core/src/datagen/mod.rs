//! Seeded synthetic conversations.
//!
//! Each speaker owns a mean direction on the sphere; single-speaker
//! frames are vMF draws around it. Turns alternate with exponentially
//! distributed lengths and pauses, quantized to the frame grid so that
//! the annotation and the frame labels agree exactly. A transition
//! overlaps the previous turn with probability `overlap_prob`. An
//! optional enrollment skew draws one speaker's early frames around a
//! mean rotated away from the nearest other speaker.

mod vmf;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use serde::Deserialize;

use crate::annotation::{Annotation, GroundTruthLabel, SpeakerId, Turn};
use crate::error::{Error, Result};
use crate::frame::EmbeddingFrame;
use crate::timeline::{Segment, Timeline};
use crate::vector::{dot, UnitVec};

pub use vmf::{sample_uniform, sample_vmf};

const MEAN_ATTEMPTS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnrollmentSkew {
    pub speaker: String,
    pub drift_angle_degrees: f64,
    pub skew_duration_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GenConfig {
    pub dimension: usize,
    pub n_speakers: usize,
    pub duration: f64,
    pub frame_period: f64,
    pub kappa: f64,
    pub min_pairwise_angle: f64,
    pub turn_mean: f64,
    pub pause_mean: f64,
    pub overlap_prob: f64,
    pub enrollment_skew: Option<EnrollmentSkew>,
    pub seed: u64,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            dimension: 16,
            n_speakers: 2,
            duration: 600.0,
            frame_period: 0.2,
            kappa: 40.0,
            min_pairwise_angle: 90.0,
            turn_mean: 3.0,
            pause_mean: 0.3,
            overlap_prob: 0.0,
            enrollment_skew: None,
            seed: 0,
        }
    }
}

impl GenConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: GenConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_owned()));
        if self.dimension < 2 {
            return bad("dimension must be at least 2");
        }
        if self.n_speakers < 1 {
            return bad("need at least one speaker");
        }
        if !(self.kappa >= 0.0 && self.kappa.is_finite()) {
            return bad("kappa must be finite and >= 0");
        }
        if !(0.0..=1.0).contains(&self.overlap_prob) {
            return bad("overlap_prob must lie in [0, 1]");
        }
        if !(0.0..=180.0).contains(&self.min_pairwise_angle) {
            return bad("min_pairwise_angle must lie in [0, 180]");
        }
        for (name, v) in [
            ("duration", self.duration),
            ("frame_period", self.frame_period),
            ("turn_mean", self.turn_mean),
            ("pause_mean", self.pause_mean),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive")));
            }
        }
        if self.frame_period > self.duration {
            return bad("frame_period exceeds duration");
        }
        if let Some(s) = &self.enrollment_skew {
            if !self.speaker_ids().iter().any(|id| id.as_str() == s.speaker) {
                return Err(Error::Config(format!("skewed speaker `{}` does not exist", s.speaker)));
            }
            if !(s.skew_duration_seconds > 0.0) {
                return bad("skew_duration_seconds must be positive");
            }
        }
        Ok(())
    }

    /// `spk00`, `spk01`, ...
    pub fn speaker_ids(&self) -> Vec<SpeakerId> {
        (0..self.n_speakers).map(|i| SpeakerId::new(format!("spk{i:02}"))).collect()
    }
}

#[derive(Debug, Clone)]
pub struct Conversation {
    pub frames: Vec<EmbeddingFrame>,
    pub truth: Vec<GroundTruthLabel>,
    pub annotation: Annotation,
    pub uem: Timeline,
    pub speaker_means: Vec<UnitVec>,
}

/// Generates one conversation; identical configs give identical output.
pub fn generate_conversation(cfg: &GenConfig) -> Result<Conversation> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let ids = cfg.speaker_ids();
    let means = sample_means(cfg, &mut rng)?;
    let p = cfg.frame_period;
    let n_frames = (cfg.duration / p + 1e-9).floor() as usize;
    let turns = sample_turns(cfg, n_frames, &mut rng);

    let mut active: Vec<Vec<usize>> = vec![Vec::new(); n_frames];
    for &(a, b, s) in &turns {
        for slot in &mut active[a..b] {
            slot.push(s);
        }
    }

    let skew = cfg.enrollment_skew.as_ref().map(|s| {
        let idx = ids.iter().position(|id| id.as_str() == s.speaker).expect("validated");
        let mean = skewed_mean(&means, idx, s.drift_angle_degrees, &mut rng);
        (idx, mean, s.skew_duration_seconds)
    });

    let time = |k: usize| k as f64 * p;
    let mut frames = Vec::new();
    let mut truth = Vec::new();
    for (k, spk) in active.iter().enumerate() {
        let (vector, label) = match spk.as_slice() {
            [] => continue,
            [s] => {
                let mean = match &skew {
                    Some((idx, m, until)) if idx == s && time(k) < *until => m,
                    _ => &means[*s],
                };
                (
                    sample_vmf(mean, cfg.kappa, &mut rng),
                    GroundTruthLabel::Speaker(ids[*s].clone()),
                )
            }
            [s1, s2, ..] => (overlap_vector(&means[*s1], &means[*s2], cfg.kappa, &mut rng), GroundTruthLabel::Overlap),
        };
        frames.push(EmbeddingFrame::from_parts(
            Segment::new_unchecked(time(k), time(k + 1)),
            vector,
        ));
        truth.push(label);
    }

    let annotation = Annotation::new(
        turns
            .iter()
            .map(|&(a, b, s)| Turn {
                segment: Segment::new_unchecked(time(a), time(b)),
                speaker: ids[s].clone(),
            })
            .collect(),
    )?;
    let uem = match annotation.speech_timeline().extent() {
        Some(s) => Timeline::from_segments([s]),
        None => Timeline::empty(),
    };
    Ok(Conversation {
        frames,
        truth,
        annotation,
        uem,
        speaker_means: means,
    })
}

fn sample_means(cfg: &GenConfig, rng: &mut ChaCha8Rng) -> Result<Vec<UnitVec>> {
    let (n, d, angle) = (cfg.n_speakers, cfg.dimension, cfg.min_pairwise_angle);
    let infeasible = Error::Infeasible { n, angle, dim: d };
    // At most d + 1 directions can be pairwise obtuse, 2d pairwise orthogonal.
    if (angle > 90.0 && n > d + 1) || (angle >= 90.0 && n > 2 * d) {
        return Err(infeasible);
    }
    let min_cos = angle.to_radians().cos();
    for _ in 0..MEAN_ATTEMPTS {
        let means: Vec<UnitVec> = (0..n).map(|_| sample_uniform(d, rng)).collect();
        let ok = (0..n).all(|i| {
            (i + 1..n).all(|j| dot(means[i].as_slice(), means[j].as_slice()) <= min_cos + 1e-12)
        });
        if ok {
            return Ok(means);
        }
    }
    Err(infeasible)
}

/// Turns as half-open frame-index ranges `(start, end, speaker)`.
fn sample_turns(cfg: &GenConfig, n_frames: usize, rng: &mut ChaCha8Rng) -> Vec<(usize, usize, usize)> {
    let p = cfg.frame_period;
    let turn_len = Exp::new(1.0 / cfg.turn_mean).expect("positive rate");
    let pause_len = Exp::new(1.0 / cfg.pause_mean).expect("positive rate");
    let n = cfg.n_speakers;
    let mut last_end = vec![0usize; n];
    let mut turns = Vec::new();
    let mut cursor = 0usize;
    let mut speaker = rng.random_range(0..n);
    loop {
        let len = ((turn_len.sample(rng) / p).round() as usize).max(1);
        let start = cursor.max(last_end[speaker]);
        if start >= n_frames {
            break;
        }
        let end = (start + len).min(n_frames);
        turns.push((start, end, speaker));
        last_end[speaker] = end;

        let next = match n {
            1 => 0,
            2 => 1 - speaker,
            _ => (speaker + rng.random_range(1..n)) % n,
        };
        let overlapped = n > 1 && end - start >= 2 && rng.random_bool(cfg.overlap_prob);
        cursor = if overlapped {
            end - rng.random_range(1..=(end - start) / 2)
        } else {
            end + (pause_len.sample(rng) / p).round() as usize
        };
        speaker = next;
    }
    turns
}

/// Rotates speaker `idx`'s mean by `degrees` away from the nearest other
/// mean, within the plane the two span.
fn skewed_mean(means: &[UnitVec], idx: usize, degrees: f64, rng: &mut ChaCha8Rng) -> UnitVec {
    let m = means[idx].as_slice();
    let nearest = (0..means.len())
        .filter(|&j| j != idx)
        .max_by(|&a, &b| {
            dot(m, means[a].as_slice()).total_cmp(&dot(m, means[b].as_slice()))
        });
    let perp = nearest
        .and_then(|j| {
            let o = means[j].as_slice();
            let c = dot(o, m);
            UnitVec::new(o.iter().zip(m).map(|(o, m)| o - c * m).collect()).ok()
        })
        .map(UnitVec::into_inner)
        .unwrap_or_else(|| vmf::random_orthogonal(m, rng));
    let th = degrees.to_radians();
    let v = m.iter().zip(&perp).map(|(m, q)| th.cos() * m - th.sin() * q).collect();
    UnitVec::new(v).expect("rotation of a unit vector")
}

/// Normalized sum of one draw from each active speaker.
fn overlap_vector(a: &UnitVec, b: &UnitVec, kappa: f64, rng: &mut ChaCha8Rng) -> UnitVec {
    loop {
        let x = sample_vmf(a, kappa, rng);
        let y = sample_vmf(b, kappa, rng);
        let sum: Vec<f64> = x.as_slice().iter().zip(y.as_slice()).map(|(x, y)| x + y).collect();
        if let Ok(v) = UnitVec::new(sum) {
            return v;
        }
    }
}
