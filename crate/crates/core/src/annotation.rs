//! Ground-truth trial annotations and model prediction files.
//!
//! Three on-disk schemas are supported:
//!
//! - Annotation JSON:
//!   `{"video_id", "fps", "num_frames", "novel_side", "intervals": [{"label",
//!   "start_frame", "end_frame"}]}` with labels `investigate_left` /
//!   `investigate_right`. Unknown fields and unknown labels are hard errors.
//! - Prediction interval JSON: `{"video_id", "intervals": [...]}` where each
//!   interval may carry an optional `score` and may use the side-agnostic
//!   label `investigate`. Extra top-level fields are tolerated so a full
//!   annotation document can be read as a prediction.
//! - Prediction window CSV with exact header
//!   `video_id,window_start_frame,window_len,label,score` (the score column
//!   may be omitted). Windows must tile the trial from frame 0 without
//!   overlap; only the final window may be shorter than the common width.
//!
//! All numeric fields use `.` decimals and no thousands separators; parsing
//! does not consult the locale.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::timeline::{Frame, FrameInterval, TimeBase, Timeline};
use crate::Result;

/// Which object the label refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Side::Left => "left",
            Side::Right => "right",
        }
    }
}

/// Behavior label attached to an interval or window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActivityLabel {
    Explore,
    Investigate,
    InvestigateLeft,
    InvestigateRight,
}

impl ActivityLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            ActivityLabel::Explore => "explore",
            ActivityLabel::Investigate => "investigate",
            ActivityLabel::InvestigateLeft => "investigate_left",
            ActivityLabel::InvestigateRight => "investigate_right",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "explore" => Some(ActivityLabel::Explore),
            "investigate" => Some(ActivityLabel::Investigate),
            "investigate_left" => Some(ActivityLabel::InvestigateLeft),
            "investigate_right" => Some(ActivityLabel::InvestigateRight),
            _ => None,
        }
    }
}

/// Per-label investigation tracks for one trial.
#[derive(Debug, Clone)]
pub struct SideTimelines {
    pub left: Timeline,
    pub right: Timeline,
    /// Union of both sides plus any side-agnostic `investigate` entries.
    pub combined: Timeline,
}

impl SideTimelines {
    pub fn side(&self, side: Side) -> &Timeline {
        match side {
            Side::Left => &self.left,
            Side::Right => &self.right,
        }
    }
}

/// Validated per-video ground truth: metadata plus normalized per-object
/// investigation timelines.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialAnnotation {
    video_id: String,
    time_base: TimeBase,
    num_frames: Frame,
    novel_side: Side,
    left: Timeline,
    right: Timeline,
}

impl TrialAnnotation {
    /// A pig cannot investigate both objects in the same frame, so the two
    /// label tracks must be disjoint after normalization.
    pub fn new(
        video_id: impl Into<String>,
        time_base: TimeBase,
        num_frames: Frame,
        novel_side: Side,
        left_intervals: Vec<FrameInterval>,
        right_intervals: Vec<FrameInterval>,
    ) -> Result<Self> {
        let left = Timeline::normalize(left_intervals, num_frames)?;
        let right = Timeline::normalize(right_intervals, num_frames)?;
        let clash = left.intersection(&right)?;
        if let Some(first) = clash.events().first() {
            return Err(Error::validation(format!(
                "overlapping object labels: left and right both cover [{}, {})",
                first.start(),
                first.end()
            )));
        }
        Ok(Self {
            video_id: video_id.into(),
            time_base,
            num_frames,
            novel_side,
            left,
            right,
        })
    }

    pub fn video_id(&self) -> &str {
        &self.video_id
    }

    pub fn time_base(&self) -> TimeBase {
        self.time_base
    }

    pub fn num_frames(&self) -> Frame {
        self.num_frames
    }

    pub fn novel_side(&self) -> Side {
        self.novel_side
    }

    pub fn side(&self, side: Side) -> &Timeline {
        match side {
            Side::Left => &self.left,
            Side::Right => &self.right,
        }
    }

    pub fn novel(&self) -> &Timeline {
        self.side(self.novel_side)
    }

    pub fn familiar(&self) -> &Timeline {
        self.side(self.novel_side.opposite())
    }

    pub fn timelines(&self) -> SideTimelines {
        let combined = self
            .left
            .union(&self.right)
            .expect("per-side timelines share a horizon");
        SideTimelines {
            left: self.left.clone(),
            right: self.right.clone(),
            combined,
        }
    }

    pub fn to_json(&self) -> String {
        let mut intervals: Vec<IntervalRecord> = Vec::new();
        for (timeline, label) in [
            (&self.left, ActivityLabel::InvestigateLeft),
            (&self.right, ActivityLabel::InvestigateRight),
        ] {
            intervals.extend(timeline.events().iter().map(|iv| IntervalRecord {
                label,
                start_frame: iv.start(),
                end_frame: iv.end(),
                score: None,
            }));
        }
        intervals.sort_by_key(|r| (r.start_frame, r.label));
        let doc = AnnotationDoc {
            video_id: self.video_id.clone(),
            fps: self.time_base.fps(),
            num_frames: self.num_frames,
            novel_side: self.novel_side,
            intervals,
        };
        let mut out = serde_json::to_string_pretty(&doc).expect("annotation serializes");
        out.push('\n');
        out
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AnnotationDoc {
    video_id: String,
    fps: u32,
    num_frames: Frame,
    novel_side: Side,
    intervals: Vec<IntervalRecord>,
}

#[derive(Serialize, Deserialize)]
struct IntervalRecord {
    label: ActivityLabel,
    start_frame: Frame,
    end_frame: Frame,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    score: Option<f64>,
}

#[derive(Deserialize)]
struct PredictionDoc {
    video_id: String,
    intervals: Vec<IntervalRecord>,
}

#[derive(Serialize)]
struct PredictionOutDoc {
    video_id: String,
    intervals: Vec<IntervalRecord>,
}

fn utf8(bytes: &[u8]) -> Result<&str> {
    std::str::from_utf8(bytes).map_err(|e| Error::parse(format!("input is not UTF-8: {e}")))
}

fn json_err(e: &serde_json::Error) -> Error {
    Error::parse_at(e.line() as u64, e.to_string())
}

/// Parse and validate an annotation JSON document.
pub fn parse_annotation(bytes: &[u8]) -> Result<TrialAnnotation> {
    let text = utf8(bytes)?;
    let doc: AnnotationDoc = serde_json::from_str(text).map_err(|e| json_err(&e))?;
    let time_base = TimeBase::new(doc.fps)?;
    let mut left = Vec::new();
    let mut right = Vec::new();
    for rec in &doc.intervals {
        if rec.score.is_some() {
            return Err(Error::validation(format!(
                "annotation interval [{}, {}) carries a score; scores belong to predictions",
                rec.start_frame, rec.end_frame
            )));
        }
        let iv = FrameInterval::new(rec.start_frame, rec.end_frame)?;
        match rec.label {
            ActivityLabel::InvestigateLeft => left.push(iv),
            ActivityLabel::InvestigateRight => right.push(iv),
            other => {
                return Err(Error::validation(format!(
                    "label '{}' is not allowed in annotations",
                    other.as_str()
                )))
            }
        }
    }
    TrialAnnotation::new(
        doc.video_id,
        time_base,
        doc.num_frames,
        doc.novel_side,
        left,
        right,
    )
}

/// How the prediction file expresses time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PredictionMode {
    Intervals,
    Windows,
}

/// One labeled span of a prediction file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredictionEntry {
    pub label: ActivityLabel,
    pub span: FrameInterval,
    pub score: Option<f64>,
}

/// Validated model predictions for one video.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionSet {
    video_id: String,
    mode: PredictionMode,
    entries: Vec<PredictionEntry>,
}

impl PredictionSet {
    pub fn video_id(&self) -> &str {
        &self.video_id
    }

    pub fn mode(&self) -> PredictionMode {
        self.mode
    }

    pub fn entries(&self) -> &[PredictionEntry] {
        &self.entries
    }

    /// Build an interval-mode prediction set programmatically.
    pub fn from_intervals(
        video_id: impl Into<String>,
        entries: Vec<PredictionEntry>,
    ) -> Result<Self> {
        let set = PredictionSet {
            video_id: video_id.into(),
            mode: PredictionMode::Intervals,
            entries,
        };
        set.check_scores()?;
        for e in &set.entries {
            if e.label == ActivityLabel::Explore {
                return Err(Error::validation(
                    "label 'explore' is implicit in interval mode",
                ));
            }
        }
        Ok(set)
    }

    fn check_scores(&self) -> Result<()> {
        let scored = self.entries.iter().filter(|e| e.score.is_some()).count();
        if scored != 0 && scored != self.entries.len() {
            return Err(Error::validation(
                "score must be present on all entries or none",
            ));
        }
        for e in &self.entries {
            if let Some(s) = e.score {
                if !(0.0..=1.0).contains(&s) {
                    return Err(Error::validation(format!(
                        "score {s} outside [0, 1] on span [{}, {})",
                        e.span.start(),
                        e.span.end()
                    )));
                }
            }
        }
        Ok(())
    }

    /// Expand to per-label timelines over `[0, num_frames)`.
    ///
    /// Side-agnostic `investigate` entries contribute to the combined track
    /// only. In window mode the final window is clamped to `num_frames`;
    /// interval entries must already be in bounds.
    pub fn to_timelines(&self, num_frames: Frame) -> Result<SideTimelines> {
        if num_frames == 0 {
            return Err(Error::ZeroHorizon);
        }
        let mut left = Vec::new();
        let mut right = Vec::new();
        let mut agnostic = Vec::new();
        for e in &self.entries {
            let span = match self.mode {
                PredictionMode::Windows => {
                    if e.span.start() >= num_frames {
                        return Err(Error::OutOfBounds {
                            start: e.span.start(),
                            end: e.span.end(),
                            horizon: num_frames,
                        });
                    }
                    FrameInterval::new(e.span.start(), e.span.end().min(num_frames))?
                }
                PredictionMode::Intervals => e.span,
            };
            match e.label {
                ActivityLabel::Explore => {}
                ActivityLabel::Investigate => agnostic.push(span),
                ActivityLabel::InvestigateLeft => left.push(span),
                ActivityLabel::InvestigateRight => right.push(span),
            }
        }
        let left = Timeline::normalize(left, num_frames)?;
        let right = Timeline::normalize(right, num_frames)?;
        let combined = left
            .union(&right)?
            .union(&Timeline::normalize(agnostic, num_frames)?)?;
        Ok(SideTimelines {
            left,
            right,
            combined,
        })
    }

    pub fn to_interval_json(&self) -> String {
        let intervals = self
            .entries
            .iter()
            .map(|e| IntervalRecord {
                label: e.label,
                start_frame: e.span.start(),
                end_frame: e.span.end(),
                score: e.score,
            })
            .collect();
        let doc = PredictionOutDoc {
            video_id: self.video_id.clone(),
            intervals,
        };
        let mut out = serde_json::to_string_pretty(&doc).expect("prediction serializes");
        out.push('\n');
        out
    }
}

/// Parse a prediction interval JSON document.
pub fn parse_interval_predictions(bytes: &[u8]) -> Result<PredictionSet> {
    let text = utf8(bytes)?;
    let doc: PredictionDoc = serde_json::from_str(text).map_err(|e| json_err(&e))?;
    let mut entries = Vec::with_capacity(doc.intervals.len());
    for rec in doc.intervals {
        entries.push(PredictionEntry {
            label: rec.label,
            span: FrameInterval::new(rec.start_frame, rec.end_frame)?,
            score: rec.score,
        });
    }
    PredictionSet::from_intervals(doc.video_id, entries)
}

const WINDOW_HEADER: [&str; 5] = ["video_id", "window_start_frame", "window_len", "label", "score"];

/// Parse a prediction window CSV document.
pub fn parse_window_predictions(bytes: &[u8]) -> Result<PredictionSet> {
    let text = utf8(bytes)?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(text.as_bytes());

    let headers = reader
        .headers()
        .map_err(|e| Error::parse(format!("missing CSV header: {e}")))?
        .clone();
    let has_score = match headers.len() {
        5 if headers.iter().eq(WINDOW_HEADER) => true,
        4 if headers.iter().eq(WINDOW_HEADER[..4].iter().copied()) => false,
        _ => {
            return Err(Error::parse_at(
                1,
                format!(
                    "expected header '{}' (score column optional), got '{}'",
                    WINDOW_HEADER.join(","),
                    headers.iter().collect::<Vec<_>>().join(",")
                ),
            ))
        }
    };

    let mut video_id: Option<String> = None;
    let mut entries: Vec<PredictionEntry> = Vec::new();
    for result in reader.records() {
        let record = result.map_err(|e| Error::parse(e.to_string()))?;
        let line = record
            .position()
            .map(|p| p.line())
            .unwrap_or(0);
        let field = |idx: usize, name: &str| -> Result<&str> {
            record
                .get(idx)
                .ok_or_else(|| Error::parse_at(line, format!("missing field '{name}'")))
        };
        let row_id = field(0, "video_id")?;
        match &video_id {
            None => video_id = Some(row_id.to_string()),
            Some(prev) if prev != row_id => {
                return Err(Error::parse_at(
                    line,
                    format!("mixed video_id values '{prev}' and '{row_id}' in one file"),
                ))
            }
            Some(_) => {}
        }
        let start: Frame = field(1, "window_start_frame")?.trim().parse().map_err(|_| {
            Error::parse_at(line, "field 'window_start_frame' is not a non-negative integer")
        })?;
        let len: Frame = field(2, "window_len")?
            .trim()
            .parse()
            .map_err(|_| Error::parse_at(line, "field 'window_len' is not a positive integer"))?;
        let label_text = field(3, "label")?.trim();
        let label = ActivityLabel::parse(label_text)
            .ok_or_else(|| Error::parse_at(line, format!("unknown label '{label_text}'")))?;
        let score = if has_score {
            let raw = field(4, "score")?.trim();
            if raw.is_empty() {
                None
            } else {
                Some(raw.parse::<f64>().map_err(|_| {
                    Error::parse_at(line, format!("field 'score' is not a number: '{raw}'"))
                })?)
            }
        } else {
            None
        };
        if len == 0 {
            return Err(Error::parse_at(line, "window_len must be positive"));
        }
        entries.push(PredictionEntry {
            label,
            span: FrameInterval::new(start, start + len)?,
            score,
        });
    }

    let video_id = video_id.ok_or_else(|| Error::validation("window CSV contains no rows"))?;
    entries.sort_by_key(|e| e.span.start());
    validate_window_tiling(&entries)?;
    let set = PredictionSet {
        video_id,
        mode: PredictionMode::Windows,
        entries,
    };
    set.check_scores()?;
    Ok(set)
}

fn validate_window_tiling(entries: &[PredictionEntry]) -> Result<()> {
    let width = entries[0].span.len();
    if entries[0].span.start() != 0 {
        return Err(Error::validation(format!(
            "windows must tile the trial from frame 0; first window starts at {}",
            entries[0].span.start()
        )));
    }
    for pair in entries.windows(2) {
        let (a, b) = (&pair[0].span, &pair[1].span);
        if b.start() < a.end() {
            return Err(Error::validation(format!(
                "overlapping windows [{}, {}) and [{}, {})",
                a.start(),
                a.end(),
                b.start(),
                b.end()
            )));
        }
        if b.start() > a.end() {
            return Err(Error::validation(format!(
                "gap between windows: [{}, {}) then [{}, {})",
                a.start(),
                a.end(),
                b.start(),
                b.end()
            )));
        }
        if a.len() != width {
            return Err(Error::validation(format!(
                "window [{}, {}) has width {}, expected {} (only the final window may be shorter)",
                a.start(),
                a.end(),
                a.len(),
                width
            )));
        }
    }
    if let Some(last) = entries.last() {
        if last.span.len() > width {
            return Err(Error::validation(format!(
                "final window is wider ({}) than the common width {}",
                last.span.len(),
                width
            )));
        }
    }
    Ok(())
}
