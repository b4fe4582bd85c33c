//! Interval-set algebra over time in seconds.
//!
//! A [`Timeline`] is a sorted list of disjoint segments in which no two
//! segments overlap or touch; any construction path re-establishes that
//! invariant. Comparisons use an absolute tolerance of [`TIME_EPS`].

use crate::error::{Error, Result};

/// Two instants closer than this are considered equal.
pub const TIME_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    start: f64,
    end: f64,
}

impl Segment {
    pub fn new(start: f64, end: f64) -> Result<Self> {
        if !(start.is_finite() && end.is_finite()) || end <= start {
            return Err(Error::InvalidSegment { start, end });
        }
        Ok(Segment { start, end })
    }

    /// Caller guarantees `end > start`.
    pub(crate) fn new_unchecked(start: f64, end: f64) -> Self {
        debug_assert!(end > start, "[{start}, {end}]");
        Segment { start, end }
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn end(&self) -> f64 {
        self.end
    }

    pub fn duration(&self) -> f64 {
        self.end - self.start
    }

    pub fn middle(&self) -> f64 {
        0.5 * (self.start + self.end)
    }

    pub fn contains(&self, t: f64) -> bool {
        self.start <= t && t < self.end
    }

    /// Intersection, if it is longer than [`TIME_EPS`].
    pub fn intersect(&self, other: &Segment) -> Option<Segment> {
        let start = self.start.max(other.start);
        let end = self.end.min(other.end);
        (end - start > TIME_EPS).then(|| Segment::new_unchecked(start, end))
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Timeline {
    segments: Vec<Segment>,
}

impl Timeline {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Builds a timeline from arbitrary segments, sorting them and merging
    /// any that overlap or touch.
    pub fn from_segments<I: IntoIterator<Item = Segment>>(segments: I) -> Self {
        let mut segs: Vec<Segment> = segments.into_iter().collect();
        segs.sort_by(|a, b| a.start.total_cmp(&b.start).then(a.end.total_cmp(&b.end)));
        let mut merged: Vec<Segment> = Vec::with_capacity(segs.len());
        for s in segs {
            match merged.last_mut() {
                Some(last) if s.start <= last.end + TIME_EPS => last.end = last.end.max(s.end),
                _ => merged.push(s),
            }
        }
        merged.retain(|s| s.duration() > TIME_EPS);
        Timeline { segments: merged }
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn total_duration(&self) -> f64 {
        self.segments.iter().map(Segment::duration).sum()
    }

    /// Smallest segment covering the whole timeline.
    pub fn extent(&self) -> Option<Segment> {
        match (self.segments.first(), self.segments.last()) {
            (Some(a), Some(b)) => Some(Segment::new_unchecked(a.start, b.end)),
            _ => None,
        }
    }

    pub fn contains(&self, t: f64) -> bool {
        let idx = self.segments.partition_point(|s| s.end <= t);
        self.segments.get(idx).is_some_and(|s| s.contains(t))
    }

    pub fn union(&self, other: &Timeline) -> Timeline {
        Timeline::from_segments(self.segments.iter().chain(&other.segments).copied())
    }

    pub fn intersection(&self, other: &Timeline) -> Timeline {
        let (a, b) = (&self.segments, &other.segments);
        let (mut i, mut j) = (0, 0);
        let mut out = Vec::new();
        while i < a.len() && j < b.len() {
            if let Some(s) = a[i].intersect(&b[j]) {
                out.push(s);
            }
            if a[i].end < b[j].end {
                i += 1;
            } else {
                j += 1;
            }
        }
        Timeline::from_segments(out)
    }

    /// Points in `self` that are not in `other`.
    pub fn subtract(&self, other: &Timeline) -> Timeline {
        let cut = &other.segments;
        let mut out = Vec::new();
        let mut j = 0;
        for seg in &self.segments {
            while j < cut.len() && cut[j].end <= seg.start {
                j += 1;
            }
            let mut cursor = seg.start;
            let mut k = j;
            while k < cut.len() && cut[k].start < seg.end {
                if cut[k].start - cursor > TIME_EPS {
                    out.push(Segment::new_unchecked(cursor, cut[k].start));
                }
                cursor = cursor.max(cut[k].end);
                k += 1;
            }
            if seg.end - cursor > TIME_EPS {
                out.push(Segment::new_unchecked(cursor, seg.end));
            }
        }
        Timeline::from_segments(out)
    }
}

impl FromIterator<Segment> for Timeline {
    fn from_iter<I: IntoIterator<Item = Segment>>(iter: I) -> Self {
        Timeline::from_segments(iter)
    }
}
