//! Speaker labels and speaker-turn annotations.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::timeline::{Segment, Timeline, TIME_EPS};

/// Speaker identifier. Ordering is lexicographic; every tie between
/// classes resolves to the smallest id.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SpeakerId(String);

impl SpeakerId {
    pub fn new(id: impl Into<String>) -> Self {
        SpeakerId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for SpeakerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for SpeakerId {
    fn from(s: &str) -> Self {
        SpeakerId(s.to_owned())
    }
}

impl From<String> for SpeakerId {
    fn from(s: String) -> Self {
        SpeakerId(s)
    }
}

/// What was actually happening during one frame.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum GroundTruthLabel {
    Speaker(SpeakerId),
    Overlap,
    NonSpeech,
}

impl GroundTruthLabel {
    pub const OVERLAP_TAG: &'static str = "OVERLAP";
    pub const NONSPEECH_TAG: &'static str = "NONSPEECH";

    pub fn speaker(&self) -> Option<&SpeakerId> {
        match self {
            GroundTruthLabel::Speaker(s) => Some(s),
            _ => None,
        }
    }

    pub fn from_tag(tag: &str) -> Self {
        match tag {
            Self::OVERLAP_TAG => GroundTruthLabel::Overlap,
            Self::NONSPEECH_TAG => GroundTruthLabel::NonSpeech,
            s => GroundTruthLabel::Speaker(SpeakerId::new(s)),
        }
    }

    pub fn tag(&self) -> &str {
        match self {
            GroundTruthLabel::Speaker(s) => s.as_str(),
            GroundTruthLabel::Overlap => Self::OVERLAP_TAG,
            GroundTruthLabel::NonSpeech => Self::NONSPEECH_TAG,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Turn {
    pub segment: Segment,
    pub speaker: SpeakerId,
}

/// Labeled speaker turns. Turns of one speaker never overlap (touching is
/// fine); turns of different speakers may, which is how overlapped speech
/// is represented.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Annotation {
    turns: Vec<Turn>,
}

impl Annotation {
    pub fn new(turns: Vec<Turn>) -> Result<Self> {
        let mut by_speaker: BTreeMap<&SpeakerId, Vec<Segment>> = BTreeMap::new();
        for t in &turns {
            by_speaker.entry(&t.speaker).or_default().push(t.segment);
        }
        for (speaker, mut segs) in by_speaker {
            segs.sort_by(|a, b| a.start().total_cmp(&b.start()));
            if let Some(w) = segs.windows(2).find(|w| w[1].start() < w[0].end() - TIME_EPS) {
                return Err(Error::SelfOverlap {
                    speaker: speaker.clone(),
                    at: w[1].start(),
                });
            }
        }
        Ok(Annotation { turns })
    }

    pub fn from_pairs<I, S>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (f64, f64, S)>,
        S: Into<SpeakerId>,
    {
        let turns = pairs
            .into_iter()
            .map(|(a, b, s)| {
                Ok(Turn {
                    segment: Segment::new(a, b)?,
                    speaker: s.into(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Annotation::new(turns)
    }

    pub fn turns(&self) -> &[Turn] {
        &self.turns
    }

    pub fn is_empty(&self) -> bool {
        self.turns.is_empty()
    }

    pub fn speakers(&self) -> BTreeSet<SpeakerId> {
        self.turns.iter().map(|t| t.speaker.clone()).collect()
    }

    pub fn speaker_timeline(&self, speaker: &SpeakerId) -> Timeline {
        self.turns
            .iter()
            .filter(|t| &t.speaker == speaker)
            .map(|t| t.segment)
            .collect()
    }

    /// Union of all turns regardless of speaker.
    pub fn speech_timeline(&self) -> Timeline {
        self.turns.iter().map(|t| t.segment).collect()
    }

    /// Speakers active at instant `t`, sorted.
    pub fn active_at(&self, t: f64) -> Vec<&SpeakerId> {
        let mut v: Vec<&SpeakerId> = self
            .turns
            .iter()
            .filter(|turn| turn.segment.contains(t))
            .map(|turn| &turn.speaker)
            .collect();
        v.sort();
        v.dedup();
        v
    }

    /// Ground truth at instant `t`: one speaker, overlap, or silence.
    pub fn label_at(&self, t: f64) -> GroundTruthLabel {
        match self.active_at(t).as_slice() {
            [] => GroundTruthLabel::NonSpeech,
            [one] => GroundTruthLabel::Speaker((*one).clone()),
            _ => GroundTruthLabel::Overlap,
        }
    }

    /// Instants where at least two speakers are active.
    pub fn overlap_timeline(&self) -> Timeline {
        // Per-speaker merge first so a speaker's own touching turns never
        // count twice.
        let mut events: Vec<(f64, i32)> = Vec::new();
        for speaker in self.speakers() {
            for s in self.speaker_timeline(&speaker).segments() {
                events.push((s.start(), 1));
                events.push((s.end(), -1));
            }
        }
        // Ends sort before starts at the same instant.
        events.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut out = Vec::new();
        let mut active = 0;
        let mut open: Option<f64> = None;
        for (t, delta) in events {
            active += delta;
            match open {
                None if active >= 2 => open = Some(t),
                Some(start) if active < 2 => {
                    if t - start > TIME_EPS {
                        out.push(Segment::new_unchecked(start, t));
                    }
                    open = None;
                }
                _ => {}
            }
        }
        Timeline::from_segments(out)
    }

    /// Restricts every turn to `support`, splitting turns where needed.
    pub fn crop(&self, support: &Timeline) -> Annotation {
        let turns = self
            .turns
            .iter()
            .flat_map(|t| {
                Timeline::from_segments([t.segment])
                    .intersection(support)
                    .segments()
                    .iter()
                    .map(|s| Turn {
                        segment: *s,
                        speaker: t.speaker.clone(),
                    })
                    .collect::<Vec<_>>()
            })
            .collect();
        Annotation { turns }
    }

    /// Relabels speakers; speakers missing from `map` keep their id.
    pub fn rename(&self, map: &BTreeMap<SpeakerId, SpeakerId>) -> Annotation {
        let turns = self
            .turns
            .iter()
            .map(|t| Turn {
                segment: t.segment,
                speaker: map.get(&t.speaker).unwrap_or(&t.speaker).clone(),
            })
            .collect();
        Annotation { turns }
    }
}
