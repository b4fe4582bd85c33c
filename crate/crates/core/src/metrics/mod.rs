//! Frame accuracy and diarization error rate.
//!
//! DER is computed over a scoring support: the UEM minus a collar around
//! every reference boundary, minus overlapped reference speech when
//! `skip_overlap` is set. Inside the support, every stretch of time
//! contributes
//!
//! ```text
//! miss      = max(0, n_ref - n_hyp)
//! fa        = max(0, n_hyp - n_ref)
//! confusion = min(n_ref, n_hyp) - n_correct
//! total     = n_ref
//! ```
//!
//! times its duration, where `n_correct` counts speakers present in both.

mod hungarian;

use std::collections::{BTreeMap, BTreeSet};

use crate::annotation::{Annotation, GroundTruthLabel, SpeakerId, Turn};
use crate::error::{Error, Result};
use crate::timeline::{Segment, Timeline, TIME_EPS};

pub use hungarian::{max_weight_matching, min_cost_assignment};

pub const DEFAULT_COLLAR: f64 = 0.25;
pub const DEFAULT_MERGE_GAP: f64 = 0.3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CollarSemantics {
    /// Remove `collar / 2` on each side of a boundary.
    HalfEachSide,
    /// Remove `collar` on each side of a boundary.
    FullEachSide,
}

impl std::str::FromStr for CollarSemantics {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "half_each_side" | "half" => Ok(CollarSemantics::HalfEachSide),
            "full_each_side" | "full" => Ok(CollarSemantics::FullEachSide),
            other => Err(Error::Config(format!("unknown collar semantics `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricConfig {
    pub collar: f64,
    pub skip_overlap: bool,
    pub collar_semantics: CollarSemantics,
}

impl Default for MetricConfig {
    fn default() -> Self {
        MetricConfig {
            collar: DEFAULT_COLLAR,
            skip_overlap: true,
            collar_semantics: CollarSemantics::HalfEachSide,
        }
    }
}

impl MetricConfig {
    fn half_width(&self) -> f64 {
        match self.collar_semantics {
            CollarSemantics::HalfEachSide => 0.5 * self.collar,
            CollarSemantics::FullEachSide => self.collar,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mapping {
    /// Hypothesis labels are reference labels.
    Identity,
    /// Rename hypothesis labels by maximum-overlap assignment first.
    Optimal,
}

impl std::str::FromStr for Mapping {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "identity" => Ok(Mapping::Identity),
            "optimal" => Ok(Mapping::Optimal),
            other => Err(Error::Config(format!("unknown mapping `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DerReport {
    pub confusion: f64,
    pub false_alarm: f64,
    pub miss: f64,
    /// Reference speech inside the support, in seconds.
    pub total: f64,
    pub der: f64,
    pub confusion_rate: f64,
    pub fa_rate: f64,
    pub miss_rate: f64,
}

impl DerReport {
    pub fn from_components(confusion: f64, false_alarm: f64, miss: f64, total: f64) -> Result<Self> {
        if !(total > 0.0) {
            return Err(Error::UndefinedDer);
        }
        let confusion_rate = confusion / total;
        let fa_rate = false_alarm / total;
        let miss_rate = miss / total;
        Ok(DerReport {
            confusion,
            false_alarm,
            miss,
            total,
            der: confusion_rate + fa_rate + miss_rate,
            confusion_rate,
            fa_rate,
            miss_rate,
        })
    }
}

/// Duration-weighted DER over many files: components are summed before
/// dividing.
pub fn corpus_der(reports: &[DerReport]) -> Result<DerReport> {
    let sum = |f: fn(&DerReport) -> f64| reports.iter().map(f).sum::<f64>();
    DerReport::from_components(
        sum(|r| r.confusion),
        sum(|r| r.false_alarm),
        sum(|r| r.miss),
        sum(|r| r.total),
    )
}

/// Unweighted mean of per-file DER.
pub fn mean_der(reports: &[DerReport]) -> Option<f64> {
    (!reports.is_empty()).then(|| reports.iter().map(|r| r.der).sum::<f64>() / reports.len() as f64)
}

/// Region of `uem` that is actually scored.
pub fn scoring_support(reference: &Annotation, uem: &Timeline, cfg: &MetricConfig) -> Result<Timeline> {
    if uem.is_empty() {
        return Err(Error::EmptyUem);
    }
    if !(cfg.collar >= 0.0) {
        return Err(Error::Config("collar must be >= 0".into()));
    }
    let mut support = uem.clone();
    let w = cfg.half_width();
    if w > 0.0 {
        let collars: Timeline = reference
            .turns()
            .iter()
            .flat_map(|t| [t.segment.start(), t.segment.end()])
            .map(|b| Segment::new_unchecked(b - w, b + w))
            .collect();
        support = support.subtract(&collars);
    }
    if cfg.skip_overlap {
        support = support.subtract(&reference.overlap_timeline());
    }
    Ok(support)
}

/// Merges consecutive same-label frames into speaker turns. Gaps up to
/// `merge_gap` between same-label frames are bridged.
pub fn frames_to_annotation<I>(frames: I, merge_gap: f64) -> Annotation
where
    I: IntoIterator<Item = (Segment, SpeakerId)>,
{
    let mut turns: Vec<Turn> = Vec::new();
    let mut last_end: BTreeMap<SpeakerId, f64> = BTreeMap::new();
    let mut open: Option<(SpeakerId, f64, f64)> = None;
    let mut close = |label: SpeakerId, start: f64, end: f64, turns: &mut Vec<Turn>| {
        // Overlapping frame windows must not produce self-overlapping turns.
        let start = last_end.get(&label).map_or(start, |&e| start.max(e));
        if end - start > TIME_EPS {
            last_end.insert(label.clone(), end);
            turns.push(Turn {
                segment: Segment::new_unchecked(start, end),
                speaker: label,
            });
        }
    };
    for (span, label) in frames {
        open = match open.take() {
            Some((l, s, e)) if l == label && span.start() - e <= merge_gap + TIME_EPS => {
                Some((l, s, e.max(span.end())))
            }
            Some((l, s, e)) => {
                close(l, s, e, &mut turns);
                Some((label, span.start(), span.end()))
            }
            None => Some((label, span.start(), span.end())),
        };
    }
    if let Some((l, s, e)) = open {
        close(l, s, e, &mut turns);
    }
    Annotation::new(turns).expect("turns are per-speaker disjoint by construction")
}

/// One-to-one hypothesis → reference map maximizing total co-occurrence.
/// Hypothesis labels left without a partner map to `None`.
pub fn optimal_mapping(
    reference: &Annotation,
    hypothesis: &Annotation,
) -> BTreeMap<SpeakerId, Option<SpeakerId>> {
    let refs: Vec<SpeakerId> = reference.speakers().into_iter().collect();
    let hyps: Vec<SpeakerId> = hypothesis.speakers().into_iter().collect();
    let ref_tl: Vec<Timeline> = refs.iter().map(|s| reference.speaker_timeline(s)).collect();
    let weight: Vec<Vec<f64>> = hyps
        .iter()
        .map(|h| {
            let ht = hypothesis.speaker_timeline(h);
            ref_tl
                .iter()
                .map(|rt| ht.intersection(rt).total_duration())
                .collect()
        })
        .collect();
    let mut map: BTreeMap<SpeakerId, Option<SpeakerId>> =
        hyps.iter().map(|h| (h.clone(), None)).collect();
    for (h, r) in max_weight_matching(&weight) {
        map.insert(hyps[h].clone(), Some(refs[r].clone()));
    }
    map
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum Scored {
    Ref(SpeakerId),
    Unmapped(SpeakerId),
}

/// Diarization error rate of `hypothesis` against `reference`.
pub fn der(
    reference: &Annotation,
    hypothesis: &Annotation,
    uem: &Timeline,
    cfg: &MetricConfig,
    mapping: Mapping,
) -> Result<DerReport> {
    let support = scoring_support(reference, uem, cfg)?;
    let reference = reference.crop(&support);
    let hypothesis = hypothesis.crop(&support);
    let hyp_labels: BTreeMap<SpeakerId, Scored> = match mapping {
        Mapping::Identity => hypothesis
            .speakers()
            .into_iter()
            .map(|s| (s.clone(), Scored::Ref(s)))
            .collect(),
        Mapping::Optimal => optimal_mapping(&reference, &hypothesis)
            .into_iter()
            .map(|(h, r)| {
                let scored = match r {
                    Some(r) => Scored::Ref(r),
                    None => Scored::Unmapped(h.clone()),
                };
                (h, scored)
            })
            .collect(),
    };

    // Sweep over boundaries, tracking who is active on each side.
    #[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
    enum Side {
        Ref,
        Hyp,
    }
    let mut events: Vec<(f64, i32, Side, Scored)> = Vec::new();
    for t in reference.turns() {
        let l = Scored::Ref(t.speaker.clone());
        events.push((t.segment.start(), 1, Side::Ref, l.clone()));
        events.push((t.segment.end(), -1, Side::Ref, l));
    }
    for t in hypothesis.turns() {
        let l = hyp_labels[&t.speaker].clone();
        events.push((t.segment.start(), 1, Side::Hyp, l.clone()));
        events.push((t.segment.end(), -1, Side::Hyp, l));
    }
    events.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let mut active: [BTreeMap<Scored, i32>; 2] = [BTreeMap::new(), BTreeMap::new()];
    let (mut confusion, mut fa, mut miss, mut total) = (0.0, 0.0, 0.0, 0.0);
    let mut prev = events.first().map_or(0.0, |e| e.0);
    for (t, delta, side, label) in events {
        let dur = t - prev;
        if dur > 0.0 {
            let r: BTreeSet<&Scored> = active[0].iter().filter(|(_, &c)| c > 0).map(|(k, _)| k).collect();
            let h: BTreeSet<&Scored> = active[1].iter().filter(|(_, &c)| c > 0).map(|(k, _)| k).collect();
            let (nr, nh) = (r.len() as f64, h.len() as f64);
            let correct = r.intersection(&h).count() as f64;
            miss += (nr - nh).max(0.0) * dur;
            fa += (nh - nr).max(0.0) * dur;
            confusion += (nr.min(nh) - correct) * dur;
            total += nr * dur;
        }
        prev = t;
        *active[side as usize].entry(label).or_insert(0) += delta;
    }
    DerReport::from_components(confusion, fa, miss, total)
}

/// Fraction of single-speaker frames whose prediction matches the truth.
/// Overlap and non-speech frames are left out entirely.
pub fn accuracy(predicted: &[SpeakerId], truth: &[GroundTruthLabel]) -> Result<f64> {
    if predicted.len() != truth.len() {
        return Err(Error::LengthMismatch {
            left: predicted.len(),
            right: truth.len(),
        });
    }
    let (hits, eligible) = predicted
        .iter()
        .zip(truth)
        .filter_map(|(p, t)| t.speaker().map(|s| s == p))
        .fold((0usize, 0usize), |(h, n), ok| (h + ok as usize, n + 1));
    if eligible == 0 {
        return Err(Error::NoEligibleFrames);
    }
    Ok(hits as f64 / eligible as f64)
}
