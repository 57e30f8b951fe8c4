//! Fixed-length training clips from labeled intervals, plus the seeded
//! train/validation split.
//!
//! Each source interval of length `L` yields `floor(L / clip_len)`
//! consecutive clips anchored at the interval start; remainder frames at the
//! tail are discarded so every clip is label-pure and exactly `clip_len`
//! frames. Investigate clips come from the combined investigation track,
//! explore clips from its complement.

use crate::annotation::TrialAnnotation;
use crate::error::Error;
use crate::rng::SplitMix64;
use crate::timeline::{Frame, Timeline};
use crate::Result;

/// Binary class of a training clip; object side is collapsed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ClipClass {
    Explore,
    Investigate,
}

impl ClipClass {
    pub fn as_str(self) -> &'static str {
        match self {
            ClipClass::Explore => "explore",
            ClipClass::Investigate => "investigate",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "explore" => Some(ClipClass::Explore),
            "investigate" => Some(ClipClass::Investigate),
            _ => None,
        }
    }
}

/// One fixed-length clip recipe: frames `[start_frame, start_frame + length)`
/// of the named video, uniform in `class_label`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ClipRecord {
    pub video_id: String,
    pub class_label: ClipClass,
    pub start_frame: Frame,
    pub length: Frame,
}

/// Default clip length, in frames.
pub const DEFAULT_CLIP_LEN: Frame = 60;

fn clips_from_timeline(
    video_id: &str,
    class_label: ClipClass,
    timeline: &Timeline,
    clip_len: Frame,
) -> Vec<ClipRecord> {
    let mut out = Vec::new();
    for event in timeline.events() {
        let count = event.len() / clip_len;
        for k in 0..count {
            out.push(ClipRecord {
                video_id: video_id.to_string(),
                class_label,
                start_frame: event.start() + k * clip_len,
                length: clip_len,
            });
        }
    }
    out
}

/// Extract all clips of both classes, ordered by start frame.
pub fn extract_clips(annotation: &TrialAnnotation, clip_len: Frame) -> Result<Vec<ClipRecord>> {
    if clip_len == 0 {
        return Err(Error::validation("clip length must be positive"));
    }
    let tracks = annotation.timelines();
    let investigate = &tracks.combined;
    let explore = investigate.complement();
    let mut clips = clips_from_timeline(
        annotation.video_id(),
        ClipClass::Investigate,
        investigate,
        clip_len,
    );
    clips.extend(clips_from_timeline(
        annotation.video_id(),
        ClipClass::Explore,
        &explore,
        clip_len,
    ));
    clips.sort_by_key(|c| c.start_frame);
    Ok(clips)
}

/// A deterministic partition of a clip manifest.
#[derive(Debug, Clone)]
pub struct SplitAssignment {
    pub train: Vec<ClipRecord>,
    pub validation: Vec<ClipRecord>,
    pub seed: u64,
    pub ratio: f64,
}

/// Shuffle with a SplitMix64-seeded Fisher-Yates pass, then cut a prefix of
/// `floor(ratio * n)` records for training. Identical seeds reproduce the
/// identical assignment across runs and platforms.
pub fn split(manifest: Vec<ClipRecord>, ratio: f64, seed: u64) -> Result<SplitAssignment> {
    if manifest.is_empty() {
        return Err(Error::validation("cannot split an empty manifest"));
    }
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::validation(format!(
            "split ratio must lie in (0, 1), got {ratio}"
        )));
    }
    let mut records = manifest;
    let mut rng = SplitMix64::new(seed);
    // Fisher-Yates, high index down; j = next_u64 % (i + 1) is part of the
    // reproducibility contract.
    for i in (1..records.len()).rev() {
        let j = rng.next_below(i as u64 + 1) as usize;
        records.swap(i, j);
    }
    let train_size = (ratio * records.len() as f64).floor() as usize;
    let validation = records.split_off(train_size);
    Ok(SplitAssignment {
        train: records,
        validation,
        seed,
        ratio,
    })
}

/// Split membership tag used in the manifest CSV.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitTag {
    Train,
    Val,
    None,
}

impl SplitTag {
    pub fn as_str(self) -> &'static str {
        match self {
            SplitTag::Train => "train",
            SplitTag::Val => "val",
            SplitTag::None => "none",
        }
    }
}

/// Render a clip manifest as CSV with header
/// `video_id,class,start_frame,length,split`.
pub fn manifest_to_csv(rows: &[(ClipRecord, SplitTag)]) -> String {
    let mut out = String::from("video_id,class,start_frame,length,split\n");
    for (record, tag) in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            record.video_id,
            record.class_label.as_str(),
            record.start_frame,
            record.length,
            tag.as_str()
        ));
    }
    out
}
