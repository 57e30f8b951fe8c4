//! Core interval algebra: normalized sets of half-open frame intervals.
//!
//! Conventions, fixed for the whole crate:
//!
//! - Intervals are half-open `[start, end)` in integer frames, so durations
//!   are exact differences and an interval ending at frame `k` is gap-free
//!   against one starting at `k`.
//! - A [`Timeline`] is always normalized: intervals sorted by start, pairwise
//!   disjoint, non-adjacent (touching inputs merge), and inside
//!   `[0, horizon)`. Its intervals are therefore the maximal positive runs —
//!   the "events" that investigation counts are defined on.
//! - Seconds are derived from frames via [`TimeBase`] at reporting
//!   boundaries only; all set algebra stays in integer frames.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::Result;

/// Frame index or frame count.
pub type Frame = u64;

/// A non-empty half-open interval `[start, end)` of frames.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct FrameInterval {
    start: Frame,
    end: Frame,
}

impl FrameInterval {
    /// Zero-length intervals are construction errors rather than silently
    /// dropped; they usually indicate an annotation bug.
    pub fn new(start: Frame, end: Frame) -> Result<Self> {
        if start >= end {
            return Err(Error::EmptyInterval { start, end });
        }
        Ok(Self { start, end })
    }

    pub fn start(&self) -> Frame {
        self.start
    }

    pub fn end(&self) -> Frame {
        self.end
    }

    // intervals are non-empty by construction, so no is_empty
    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> Frame {
        self.end - self.start
    }

    pub fn contains(&self, frame: Frame) -> bool {
        self.start <= frame && frame < self.end
    }

    /// Overlap means at least one shared frame; touching intervals such as
    /// `[0,5)` and `[5,8)` do not overlap.
    pub fn overlaps(&self, other: &FrameInterval) -> bool {
        self.start < other.end && other.start < self.end
    }
}

/// A normalized, sorted, disjoint set of frame intervals over `[0, horizon)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Timeline {
    intervals: Vec<FrameInterval>,
    horizon: Frame,
}

impl Timeline {
    pub fn empty(horizon: Frame) -> Result<Self> {
        if horizon == 0 {
            return Err(Error::ZeroHorizon);
        }
        Ok(Self {
            intervals: Vec::new(),
            horizon,
        })
    }

    /// Build a timeline from raw intervals: validates bounds, sorts, and
    /// merges overlapping or touching intervals. The union of frames is
    /// preserved exactly.
    pub fn normalize(raw: Vec<FrameInterval>, horizon: Frame) -> Result<Self> {
        if horizon == 0 {
            return Err(Error::ZeroHorizon);
        }
        for iv in &raw {
            if iv.end > horizon {
                return Err(Error::OutOfBounds {
                    start: iv.start,
                    end: iv.end,
                    horizon,
                });
            }
        }
        let mut sorted = raw;
        sorted.sort_unstable();
        let mut intervals: Vec<FrameInterval> = Vec::with_capacity(sorted.len());
        for iv in sorted {
            match intervals.last_mut() {
                // touching (==) merges: adjacency is not a gap
                Some(last) if iv.start <= last.end => {
                    last.end = last.end.max(iv.end);
                }
                _ => intervals.push(iv),
            }
        }
        Ok(Self { intervals, horizon })
    }

    pub fn horizon(&self) -> Frame {
        self.horizon
    }

    /// The maximal positive runs, in order.
    pub fn events(&self) -> &[FrameInterval] {
        &self.intervals
    }

    pub fn event_count(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    /// Total number of positive frames.
    pub fn total_frames(&self) -> Frame {
        self.intervals.iter().map(FrameInterval::len).sum()
    }

    pub fn contains_frame(&self, frame: Frame) -> bool {
        self.event_containing(frame).is_some()
    }

    /// The event covering `frame`, if any.
    pub fn event_containing(&self, frame: Frame) -> Option<&FrameInterval> {
        let idx = self.intervals.partition_point(|iv| iv.end <= frame);
        self.intervals.get(idx).filter(|iv| iv.contains(frame))
    }

    /// True if any frame of `[start, end)` is covered. Empty ranges
    /// (`start >= end`) are covered by nothing.
    pub fn covers_any(&self, start: Frame, end: Frame) -> bool {
        if start >= end {
            return false;
        }
        let idx = self.intervals.partition_point(|iv| iv.end <= start);
        self.intervals.get(idx).is_some_and(|iv| iv.start < end)
    }

    /// Frames in `[0, horizon)` not covered by `self`.
    pub fn complement(&self) -> Timeline {
        let mut intervals = Vec::with_capacity(self.intervals.len() + 1);
        let mut cursor = 0;
        for iv in &self.intervals {
            if iv.start > cursor {
                intervals.push(FrameInterval {
                    start: cursor,
                    end: iv.start,
                });
            }
            cursor = iv.end;
        }
        if cursor < self.horizon {
            intervals.push(FrameInterval {
                start: cursor,
                end: self.horizon,
            });
        }
        Timeline {
            intervals,
            horizon: self.horizon,
        }
    }

    pub fn union(&self, other: &Timeline) -> Result<Timeline> {
        self.check_horizon(other)?;
        let mut raw = self.intervals.clone();
        raw.extend_from_slice(&other.intervals);
        Timeline::normalize(raw, self.horizon)
    }

    pub fn intersection(&self, other: &Timeline) -> Result<Timeline> {
        self.check_horizon(other)?;
        let (a, b) = (&self.intervals, &other.intervals);
        let mut intervals = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            let start = a[i].start.max(b[j].start);
            let end = a[i].end.min(b[j].end);
            if start < end {
                intervals.push(FrameInterval { start, end });
            }
            if a[i].end < b[j].end {
                i += 1;
            } else {
                j += 1;
            }
        }
        Ok(Timeline {
            intervals,
            horizon: self.horizon,
        })
    }

    fn check_horizon(&self, other: &Timeline) -> Result<()> {
        if self.horizon != other.horizon {
            return Err(Error::HorizonMismatch {
                left: self.horizon,
                right: other.horizon,
            });
        }
        Ok(())
    }
}

/// Frames-per-second conversion applied at reporting boundaries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimeBase {
    fps: u32,
}

impl TimeBase {
    pub fn new(fps: u32) -> Result<Self> {
        if fps == 0 {
            return Err(Error::validation("fps must be positive"));
        }
        Ok(Self { fps })
    }

    pub fn fps(&self) -> u32 {
        self.fps
    }

    pub fn seconds(&self, frames: Frame) -> f64 {
        frames as f64 / self.fps as f64
    }
}

impl Default for TimeBase {
    fn default() -> Self {
        Self { fps: 30 }
    }
}
