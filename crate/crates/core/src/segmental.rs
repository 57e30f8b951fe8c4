//! Segmental error taxonomy for continuous recognition: every frame of a
//! (ground truth, prediction) pair falls into exactly one of eight
//! categories.
//!
//! The normative rule set (version [`RULES_VERSION`]):
//!
//! 1. Partition `[0, horizon)` at the union of all event boundaries of both
//!    tracks; within each segment both tracks are constant.
//! 2. gt+ and pred+ is a true positive; gt- and pred- a true negative.
//! 3. gt+ and pred-: if the enclosing ground-truth event overlaps no
//!    predicted event, the segment is a deletion; else if frames of that same
//!    event are pred-covered both before and after the segment, it is
//!    fragmentation; else underfill.
//! 4. gt- and pred+: mirror of rule 3 with the enclosing predicted event:
//!    insertion, merge (distinct ground-truth events covered on both sides),
//!    or overfill.
//!
//! "Overlaps" always means at least one shared frame. Rules 3 and 4 are
//! ordered: deletion/insertion take precedence, then fragmentation/merge,
//! then the fill errors. Swapping the two tracks exchanges
//! deletion/insertion, underfill/overfill, and fragmentation/merge while
//! fixing TP and TN.

use crate::error::Error;
use crate::timeline::{Frame, Timeline};
use crate::Result;

/// Version tag of the classification rule set above; reported by the CLI so
/// downstream numbers can be traced to the rules that produced them.
pub const RULES_VERSION: &str = "1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Category {
    TruePositive,
    TrueNegative,
    Overfill,
    Underfill,
    Fragmentation,
    Merge,
    Insertion,
    Deletion,
}

impl Category {
    pub const ALL: [Category; 8] = [
        Category::TruePositive,
        Category::TrueNegative,
        Category::Overfill,
        Category::Underfill,
        Category::Fragmentation,
        Category::Merge,
        Category::Insertion,
        Category::Deletion,
    ];

    pub fn index(self) -> usize {
        match self {
            Category::TruePositive => 0,
            Category::TrueNegative => 1,
            Category::Overfill => 2,
            Category::Underfill => 3,
            Category::Fragmentation => 4,
            Category::Merge => 5,
            Category::Insertion => 6,
            Category::Deletion => 7,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Category::TruePositive => "true_positive",
            Category::TrueNegative => "true_negative",
            Category::Overfill => "overfill",
            Category::Underfill => "underfill",
            Category::Fragmentation => "fragmentation",
            Category::Merge => "merge",
            Category::Insertion => "insertion",
            Category::Deletion => "deletion",
        }
    }

    /// Severe errors: whole events hallucinated or missed.
    pub fn is_severe(self) -> bool {
        matches!(self, Category::Insertion | Category::Deletion)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Tally {
    pub frames: u64,
    pub segments: u64,
}

/// Frame and segment counts for one video. The eight frame counts partition
/// the horizon exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentalReport {
    video_id: String,
    horizon: Frame,
    tallies: [Tally; 8],
}

impl SegmentalReport {
    pub fn video_id(&self) -> &str {
        &self.video_id
    }

    pub fn horizon(&self) -> Frame {
        self.horizon
    }

    pub fn tally(&self, category: Category) -> Tally {
        self.tallies[category.index()]
    }

    pub fn frames(&self, category: Category) -> u64 {
        self.tallies[category.index()].frames
    }

    pub fn segments(&self, category: Category) -> u64 {
        self.tallies[category.index()].segments
    }

    pub fn fraction(&self, category: Category) -> f64 {
        self.frames(category) as f64 / self.horizon as f64
    }

    /// Frame counts in [`Category::ALL`] order.
    pub fn frame_counts(&self) -> [u64; 8] {
        let mut out = [0u64; 8];
        for (slot, tally) in out.iter_mut().zip(self.tallies.iter()) {
            *slot = tally.frames;
        }
        out
    }

    pub fn error_frames(&self) -> u64 {
        Category::ALL
            .iter()
            .filter(|c| !matches!(c, Category::TruePositive | Category::TrueNegative))
            .map(|&c| self.frames(c))
            .sum()
    }

    pub fn severe_fraction(&self) -> f64 {
        self.fraction(Category::Insertion) + self.fraction(Category::Deletion)
    }
}

fn classify_segment(gt: &Timeline, pred: &Timeline, start: Frame, end: Frame) -> Category {
    match (gt.contains_frame(start), pred.contains_frame(start)) {
        (true, true) => Category::TruePositive,
        (false, false) => Category::TrueNegative,
        (true, false) => {
            let event = gt.event_containing(start).expect("segment is gt-positive");
            if !pred.covers_any(event.start(), event.end()) {
                Category::Deletion
            } else if pred.covers_any(event.start(), start) && pred.covers_any(end, event.end()) {
                Category::Fragmentation
            } else {
                Category::Underfill
            }
        }
        (false, true) => {
            let event = pred
                .event_containing(start)
                .expect("segment is pred-positive");
            if !gt.covers_any(event.start(), event.end()) {
                Category::Insertion
            } else if gt.covers_any(event.start(), start) && gt.covers_any(end, event.end()) {
                Category::Merge
            } else {
                Category::Overfill
            }
        }
    }
}

/// Score one (ground truth, prediction) pair.
pub fn score(video_id: &str, gt: &Timeline, pred: &Timeline) -> Result<SegmentalReport> {
    if gt.horizon() != pred.horizon() {
        return Err(Error::HorizonMismatch {
            left: gt.horizon(),
            right: pred.horizon(),
        });
    }
    let horizon = gt.horizon();
    let mut boundaries = Vec::with_capacity(2 * (gt.event_count() + pred.event_count()) + 2);
    boundaries.push(0);
    boundaries.push(horizon);
    for iv in gt.events().iter().chain(pred.events()) {
        boundaries.push(iv.start());
        boundaries.push(iv.end());
    }
    boundaries.sort_unstable();
    boundaries.dedup();

    let mut tallies = [Tally::default(); 8];
    for pair in boundaries.windows(2) {
        let (start, end) = (pair[0], pair[1]);
        let category = classify_segment(gt, pred, start, end);
        tallies[category.index()].frames += end - start;
        tallies[category.index()].segments += 1;
    }
    Ok(SegmentalReport {
        video_id: video_id.to_string(),
        horizon,
        tallies,
    })
}

/// Corpus-level roll-up of per-video reports.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusSummary {
    pub videos: usize,
    /// Mean per-video frame fraction, per category.
    pub mean_fractions: [f64; 8],
    pub total_frames: [u64; 8],
    pub total_segments: [u64; 8],
    /// Mean over videos of (insertion + deletion) frame fractions.
    pub severe_error_rate: f64,
}

pub fn aggregate(reports: &[SegmentalReport]) -> Result<CorpusSummary> {
    if reports.is_empty() {
        return Err(Error::validation("cannot aggregate an empty report list"));
    }
    let n = reports.len() as f64;
    let mut mean_fractions = [0.0; 8];
    let mut total_frames = [0u64; 8];
    let mut total_segments = [0u64; 8];
    let mut severe = 0.0;
    for report in reports {
        for category in Category::ALL {
            let i = category.index();
            mean_fractions[i] += report.fraction(category) / n;
            total_frames[i] += report.frames(category);
            total_segments[i] += report.segments(category);
        }
        severe += report.severe_fraction() / n;
    }
    Ok(CorpusSummary {
        videos: reports.len(),
        mean_fractions,
        total_frames,
        total_segments,
        severe_error_rate: severe,
    })
}

/// Render per-video rows plus a `__corpus__` summary group as CSV with
/// header `video_id,category,frames,segments,fraction`. Corpus rows carry
/// total frames, total segments, and the mean per-video fraction.
pub fn reports_to_csv(reports: &[SegmentalReport], summary: &CorpusSummary) -> String {
    let mut out = String::from("video_id,category,frames,segments,fraction\n");
    for report in reports {
        for category in Category::ALL {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                report.video_id,
                category.as_str(),
                report.frames(category),
                report.segments(category),
                report.fraction(category)
            ));
        }
    }
    for category in Category::ALL {
        let i = category.index();
        out.push_str(&format!(
            "__corpus__,{},{},{},{}\n",
            category.as_str(),
            summary.total_frames[i],
            summary.total_segments[i],
            summary.mean_fractions[i]
        ));
    }
    out
}
