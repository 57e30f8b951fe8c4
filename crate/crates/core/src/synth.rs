//! Seeded synthetic trials and perturbation injection.
//!
//! [`generate_trial`] samples alternating explore/investigate bouts from a
//! [`BoutModel`]; everything is drawn from one SplitMix64 stream so a seed
//! pins the trial bit-exactly.
//!
//! [`perturb`] applies a [`PerturbationSpec`] to a ground-truth timeline and
//! returns the perturbed prediction together with an [`ErrorLedger`]: the
//! exact frame counts the segmental scorer must report for the pair. Each
//! operation is the inverse image of one error category (dilate -> overfill,
//! erode -> underfill, punch_hole -> fragmentation, bridge_gap -> merge,
//! insert/delete -> insertion/deletion). Operation parameters are validated
//! strictly: anything that would collide, merge events, or otherwise
//! reclassify frames is rejected rather than clamped, which is what keeps
//! the ledger analytic under composition.

use crate::annotation::{Side, TrialAnnotation};
use crate::error::Error;
use crate::rng::SplitMix64;
use crate::segmental::{Category, SegmentalReport};
use crate::timeline::{Frame, FrameInterval, TimeBase, Timeline};
use crate::Result;

/// Distribution parameters for synthetic trials. Durations are uniform over
/// the given bounds, in seconds.
#[derive(Debug, Clone, PartialEq)]
pub struct BoutModel {
    /// Investigation bout duration bounds.
    pub investigate_s: (f64, f64),
    /// Exploration gap duration bounds.
    pub gap_s: (f64, f64),
    /// Probability that a bout targets the novel object.
    pub novel_prob: f64,
    /// Trial length in seconds.
    pub trial_s: f64,
    pub fps: u32,
}

impl Default for BoutModel {
    fn default() -> Self {
        Self {
            investigate_s: (0.2, 3.0),
            gap_s: (1.0, 20.0),
            novel_prob: 0.5,
            trial_s: 330.0,
            fps: 30,
        }
    }
}

impl BoutModel {
    fn validate(&self) -> Result<()> {
        let bounds_ok = |(lo, hi): (f64, f64)| lo > 0.0 && hi >= lo && hi.is_finite();
        if !bounds_ok(self.investigate_s) {
            return Err(Error::validation(format!(
                "investigation bounds must be positive and ordered, got {:?}",
                self.investigate_s
            )));
        }
        if !bounds_ok(self.gap_s) {
            return Err(Error::validation(format!(
                "gap bounds must be positive and ordered, got {:?}",
                self.gap_s
            )));
        }
        if !(0.0..=1.0).contains(&self.novel_prob) {
            return Err(Error::validation(format!(
                "novel_prob must lie in [0, 1], got {}",
                self.novel_prob
            )));
        }
        if self.fps == 0 {
            return Err(Error::validation("fps must be positive"));
        }
        if self.trial_s <= self.investigate_s.1 || !self.trial_s.is_finite() {
            return Err(Error::validation(
                "trial length must exceed the longest possible bout",
            ));
        }
        Ok(())
    }

    pub fn horizon(&self) -> Frame {
        (self.trial_s * self.fps as f64).round() as Frame
    }
}

fn sample_frames(rng: &mut SplitMix64, bounds: (f64, f64), fps: u32) -> Frame {
    let seconds = rng.next_range_f64(bounds.0, bounds.1);
    ((seconds * fps as f64).round() as Frame).max(1)
}

/// Generate one trial. Draw order per cycle is fixed (novel side coin, then
/// gap, bout, side coin per bout) and is part of the determinism contract.
pub fn generate_trial(model: &BoutModel, seed: u64, video_id: &str) -> Result<TrialAnnotation> {
    model.validate()?;
    let mut rng = SplitMix64::new(seed);
    let horizon = model.horizon();
    let novel_side = if rng.next_below(2) == 0 {
        Side::Left
    } else {
        Side::Right
    };
    let mut left = Vec::new();
    let mut right = Vec::new();
    let mut cursor: Frame = 0;
    loop {
        cursor += sample_frames(&mut rng, model.gap_s, model.fps);
        if cursor >= horizon {
            break;
        }
        let bout = sample_frames(&mut rng, model.investigate_s, model.fps);
        if cursor + bout > horizon {
            break;
        }
        let target = if rng.next_f64() < model.novel_prob {
            novel_side
        } else {
            novel_side.opposite()
        };
        let interval = FrameInterval::new(cursor, cursor + bout)?;
        match target {
            Side::Left => left.push(interval),
            Side::Right => right.push(interval),
        }
        cursor += bout;
    }
    TrialAnnotation::new(
        video_id,
        TimeBase::new(model.fps)?,
        horizon,
        novel_side,
        left,
        right,
    )
}

/// One edit of the prediction track relative to ground truth.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PerturbOp {
    /// Grow every event symmetrically by `frames` on each side.
    Dilate { frames: Frame },
    /// Shrink every event symmetrically by `frames` on each side.
    Erode { frames: Frame },
    /// Remove the prediction of ground-truth event `index` entirely.
    DeleteEvent { index: usize },
    /// Add a predicted event `[start, start + length)` inside a gap.
    InsertEvent { start: Frame, length: Frame },
    /// Remove an interior chunk of event `event`, `offset` frames from its
    /// start.
    PunchHole {
        event: usize,
        offset: Frame,
        length: Frame,
    },
    /// Cover the gap between events `gap` and `gap + 1` so they merge.
    BridgeGap { gap: usize },
}

/// An ordered sequence of perturbation operations. Each operation is
/// validated against the state left by its predecessors.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PerturbationSpec {
    pub ops: Vec<PerturbOp>,
}

impl PerturbationSpec {
    pub fn new(ops: Vec<PerturbOp>) -> Self {
        Self { ops }
    }
}

/// Expected segmental frame counts for a perturbed pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ErrorLedger {
    frames: [u64; 8],
}

impl ErrorLedger {
    pub fn frames(&self, category: Category) -> u64 {
        self.frames[category.index()]
    }

    /// Frame counts in [`Category::ALL`] order.
    pub fn frame_counts(&self) -> [u64; 8] {
        self.frames
    }

    pub fn matches(&self, report: &SegmentalReport) -> bool {
        self.frames == report.frame_counts()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("category,frames\n");
        for category in Category::ALL {
            out.push_str(&format!(
                "{},{}\n",
                category.as_str(),
                self.frames[category.index()]
            ));
        }
        out
    }

    pub fn parse_csv(bytes: &[u8]) -> Result<Self> {
        let text = std::str::from_utf8(bytes)
            .map_err(|e| Error::parse(format!("input is not UTF-8: {e}")))?;
        let mut lines = text.lines();
        if lines.next() != Some("category,frames") {
            return Err(Error::parse("expected header 'category,frames'"));
        }
        let mut frames = [None::<u64>; 8];
        for (idx, line) in lines.enumerate() {
            if line.is_empty() {
                continue;
            }
            let (name, count) = line
                .split_once(',')
                .ok_or_else(|| Error::parse_at(idx as u64 + 2, "expected 'category,frames'"))?;
            let category = Category::ALL
                .into_iter()
                .find(|c| c.as_str() == name)
                .ok_or_else(|| Error::parse_at(idx as u64 + 2, format!("unknown category '{name}'")))?;
            let count: u64 = count
                .trim()
                .parse()
                .map_err(|_| Error::parse_at(idx as u64 + 2, "frame count is not an integer"))?;
            frames[category.index()] = Some(count);
        }
        let mut out = [0u64; 8];
        for (i, slot) in frames.iter().enumerate() {
            out[i] = slot.ok_or_else(|| {
                Error::validation(format!(
                    "ledger is missing category '{}'",
                    Category::ALL[i].as_str()
                ))
            })?;
        }
        Ok(Self { frames: out })
    }
}

#[derive(Debug, Clone, Default)]
struct EventState {
    deleted: bool,
    dilation: Frame,
    erosion: Frame,
    /// (offset, length) relative to the event start, pairwise disjoint.
    holes: Vec<(Frame, Frame)>,
    /// Participates in at least one bridged gap.
    bridged: bool,
}

impl EventState {
    fn pristine(&self) -> bool {
        !self.deleted
            && self.dilation == 0
            && self.erosion == 0
            && self.holes.is_empty()
            && !self.bridged
    }
}

struct PerturbState<'a> {
    events: &'a [FrameInterval],
    horizon: Frame,
    states: Vec<EventState>,
    /// Interior gap `i` sits between events `i` and `i + 1`.
    bridged_gaps: Vec<bool>,
    insertions: Vec<FrameInterval>,
}

impl<'a> PerturbState<'a> {
    fn new(gt: &'a Timeline) -> Self {
        let events = gt.events();
        Self {
            events,
            horizon: gt.horizon(),
            states: vec![EventState::default(); events.len()],
            bridged_gaps: vec![false; events.len().saturating_sub(1)],
            insertions: Vec::new(),
        }
    }

    fn all_pristine(&self) -> bool {
        self.states.iter().all(EventState::pristine)
            && self.insertions.is_empty()
            && self.bridged_gaps.iter().all(|b| !b)
    }

    fn event(&self, index: usize) -> Result<&FrameInterval> {
        self.events.get(index).ok_or_else(|| {
            Error::validation(format!(
                "event index {index} out of range ({} events)",
                self.events.len()
            ))
        })
    }

    fn apply(&mut self, op: &PerturbOp) -> Result<()> {
        match *op {
            PerturbOp::Dilate { frames } => self.dilate(frames),
            PerturbOp::Erode { frames } => self.erode(frames),
            PerturbOp::DeleteEvent { index } => self.delete(index),
            PerturbOp::InsertEvent { start, length } => self.insert(start, length),
            PerturbOp::PunchHole {
                event,
                offset,
                length,
            } => self.punch_hole(event, offset, length),
            PerturbOp::BridgeGap { gap } => self.bridge(gap),
        }
    }

    fn dilate(&mut self, d: Frame) -> Result<()> {
        if d == 0 {
            return Err(Error::validation("dilation must be positive"));
        }
        if !self.all_pristine() {
            return Err(Error::validation(
                "dilate must be applied before any other edit",
            ));
        }
        if let (Some(first), Some(last)) = (self.events.first(), self.events.last()) {
            if first.start() < d || self.horizon - last.end() < d {
                return Err(Error::validation(format!(
                    "dilation by {d} runs past the trial bounds"
                )));
            }
        }
        for pair in self.events.windows(2) {
            let gap = pair[1].start() - pair[0].end();
            // a 2d-wide gap would make the dilated events touch and merge
            if gap < 2 * d + 1 {
                return Err(Error::validation(format!(
                    "dilation by {d} would merge events across the gap [{}, {})",
                    pair[0].end(),
                    pair[1].start()
                )));
            }
        }
        for state in &mut self.states {
            state.dilation = d;
        }
        Ok(())
    }

    fn erode(&mut self, d: Frame) -> Result<()> {
        if d == 0 {
            return Err(Error::validation("erosion must be positive"));
        }
        if !self.all_pristine() {
            return Err(Error::validation(
                "erode must be applied before any other edit",
            ));
        }
        for event in self.events {
            if event.len() < 2 * d + 1 {
                return Err(Error::validation(format!(
                    "erosion by {d} would empty the event [{}, {})",
                    event.start(),
                    event.end()
                )));
            }
        }
        for state in &mut self.states {
            state.erosion = d;
        }
        Ok(())
    }

    fn delete(&mut self, index: usize) -> Result<()> {
        self.event(index)?;
        let state = &mut self.states[index];
        if state.deleted {
            return Err(Error::validation(format!("event {index} already deleted")));
        }
        if state.bridged {
            return Err(Error::validation(format!(
                "event {index} is fused into a bridge and cannot be deleted"
            )));
        }
        state.deleted = true;
        Ok(())
    }

    fn insert(&mut self, start: Frame, length: Frame) -> Result<()> {
        if length == 0 {
            return Err(Error::validation("insertion length must be positive"));
        }
        let end = start + length;
        if end > self.horizon {
            return Err(Error::OutOfBounds {
                start,
                end,
                horizon: self.horizon,
            });
        }
        // the insertion must sit in ground-truth-negative space
        let idx = self.events.partition_point(|e| e.end() <= start);
        if let Some(event) = self.events.get(idx) {
            if event.start() < end {
                return Err(Error::validation(format!(
                    "insertion [{start}, {end}) overlaps the event [{}, {})",
                    event.start(),
                    event.end()
                )));
            }
        }
        // a merged prediction with a live neighbor would reclassify the
        // insertion as overfill, so keep a one-frame buffer
        if idx > 0 {
            let left = idx - 1;
            if !self.states[left].deleted {
                let lo = self.events[left].end() + self.states[left].dilation;
                if start <= lo {
                    return Err(Error::validation(format!(
                        "insertion [{start}, {end}) touches prediction coverage of event {left}"
                    )));
                }
            }
        }
        if let Some(event) = self.events.get(idx) {
            if !self.states[idx].deleted {
                let hi = event.start().saturating_sub(self.states[idx].dilation);
                if end >= hi {
                    return Err(Error::validation(format!(
                        "insertion [{start}, {end}) touches prediction coverage of event {idx}"
                    )));
                }
            }
        }
        if idx > 0 && idx < self.events.len() && self.bridged_gaps[idx - 1] {
            return Err(Error::validation(format!(
                "insertion [{start}, {end}) lands in a bridged gap"
            )));
        }
        for prior in &self.insertions {
            if prior.overlaps(&FrameInterval::new(start, end)?) {
                return Err(Error::validation(format!(
                    "insertion [{start}, {end}) overlaps a prior insertion [{}, {})",
                    prior.start(),
                    prior.end()
                )));
            }
        }
        self.insertions.push(FrameInterval::new(start, end)?);
        Ok(())
    }

    fn punch_hole(&mut self, index: usize, offset: Frame, length: Frame) -> Result<()> {
        let event = *self.event(index)?;
        let state = &mut self.states[index];
        if state.deleted {
            return Err(Error::validation(format!(
                "cannot punch a hole in deleted event {index}"
            )));
        }
        if length == 0 {
            return Err(Error::validation("hole length must be positive"));
        }
        // the hole must leave predicted coverage on both sides within the
        // event, or its frames become underfill instead of fragmentation
        let min_offset = state.erosion + 1;
        let max_end = event.len().saturating_sub(state.erosion + 1);
        if offset < min_offset || offset + length > max_end {
            return Err(Error::validation(format!(
                "hole at offset {offset} length {length} is not interior to event {index}"
            )));
        }
        for &(o, l) in &state.holes {
            if offset < o + l && o < offset + length {
                return Err(Error::validation(format!(
                    "hole at offset {offset} overlaps a prior hole in event {index}"
                )));
            }
        }
        state.holes.push((offset, length));
        Ok(())
    }

    fn bridge(&mut self, gap: usize) -> Result<()> {
        if gap + 1 >= self.events.len() {
            return Err(Error::validation(format!(
                "gap index {gap} out of range ({} interior gaps)",
                self.events.len().saturating_sub(1)
            )));
        }
        if self.bridged_gaps[gap] {
            return Err(Error::validation(format!("gap {gap} already bridged")));
        }
        for index in [gap, gap + 1] {
            let state = &self.states[index];
            if state.deleted || state.dilation > 0 || state.erosion > 0 {
                return Err(Error::validation(format!(
                    "cannot bridge gap {gap}: flanking event {index} has been edited"
                )));
            }
        }
        let span = FrameInterval::new(self.events[gap].end(), self.events[gap + 1].start())?;
        if self.insertions.iter().any(|i| i.overlaps(&span)) {
            return Err(Error::validation(format!(
                "cannot bridge gap {gap}: it contains an insertion"
            )));
        }
        self.bridged_gaps[gap] = true;
        self.states[gap].bridged = true;
        self.states[gap + 1].bridged = true;
        Ok(())
    }

    fn finish(self) -> (Timeline, ErrorLedger) {
        let mut frames = [0u64; 8];
        let mut raw: Vec<FrameInterval> = Vec::new();

        for (event, state) in self.events.iter().zip(&self.states) {
            if state.deleted {
                frames[Category::Deletion.index()] += event.len();
                continue;
            }
            let hole_total: Frame = state.holes.iter().map(|&(_, l)| l).sum();
            // overfill margins lie outside the event; underfill margins are
            // event frames and come out of the true-positive share
            frames[Category::TruePositive.index()] +=
                event.len() - hole_total - 2 * state.erosion;
            frames[Category::Fragmentation.index()] += hole_total;
            frames[Category::Overfill.index()] += 2 * state.dilation;
            frames[Category::Underfill.index()] += 2 * state.erosion;

            let cover_start = event.start() - state.dilation + state.erosion;
            let cover_end = event.end() + state.dilation - state.erosion;
            let mut holes = state.holes.clone();
            holes.sort_unstable();
            let mut cursor = cover_start;
            for (offset, length) in holes {
                let hole_start = event.start() + offset;
                if cursor < hole_start {
                    raw.push(FrameInterval::new(cursor, hole_start).expect("non-empty piece"));
                }
                cursor = hole_start + length;
            }
            if cursor < cover_end {
                raw.push(FrameInterval::new(cursor, cover_end).expect("non-empty piece"));
            }
        }

        for (gap, bridged) in self.bridged_gaps.iter().enumerate() {
            if *bridged {
                let span =
                    FrameInterval::new(self.events[gap].end(), self.events[gap + 1].start())
                        .expect("gaps are non-empty");
                frames[Category::Merge.index()] += span.len();
                raw.push(span);
            }
        }

        for insertion in &self.insertions {
            frames[Category::Insertion.index()] += insertion.len();
            raw.push(*insertion);
        }

        let claimed: u64 = frames.iter().sum();
        frames[Category::TrueNegative.index()] = self
            .horizon
            .checked_sub(claimed)
            .expect("perturbation contributions partition the horizon");

        let pred = Timeline::normalize(raw, self.horizon).expect("perturbed track is valid");
        (pred, ErrorLedger { frames })
    }
}

/// Apply a spec to a ground-truth timeline. Returns the perturbed prediction
/// and the exact frame counts the segmental scorer must report.
pub fn perturb(gt: &Timeline, spec: &PerturbationSpec) -> Result<(Timeline, ErrorLedger)> {
    let mut state = PerturbState::new(gt);
    for op in &spec.ops {
        state.apply(op)?;
    }
    Ok(state.finish())
}

/// Sample a random valid spec by attempting `attempts` operations and
/// keeping those that validate. Optionally opens with a global dilate or
/// erode. Deterministic given the generator state.
pub fn random_spec(gt: &Timeline, rng: &mut SplitMix64, attempts: usize) -> PerturbationSpec {
    let mut spec = PerturbationSpec::default();
    let events = gt.events().len() as u64;

    match rng.next_below(4) {
        0 => {
            let op = PerturbOp::Dilate {
                frames: 1 + rng.next_below(4),
            };
            if perturb(gt, &PerturbationSpec::new(vec![op])).is_ok() {
                spec.ops.push(op);
            }
        }
        1 => {
            let op = PerturbOp::Erode {
                frames: 1 + rng.next_below(3),
            };
            if perturb(gt, &PerturbationSpec::new(vec![op])).is_ok() {
                spec.ops.push(op);
            }
        }
        _ => {}
    }

    for _ in 0..attempts {
        let op = match rng.next_below(4) {
            0 if events > 0 => PerturbOp::DeleteEvent {
                index: rng.next_below(events) as usize,
            },
            1 => PerturbOp::InsertEvent {
                start: rng.next_below(gt.horizon()),
                length: 1 + rng.next_below(40),
            },
            2 if events > 0 => {
                let index = rng.next_below(events) as usize;
                let len = gt.events()[index].len();
                PerturbOp::PunchHole {
                    event: index,
                    offset: 1 + rng.next_below(len),
                    length: 1 + rng.next_below(len),
                }
            }
            3 if events > 1 => PerturbOp::BridgeGap {
                gap: rng.next_below(events - 1) as usize,
            },
            _ => continue,
        };
        spec.ops.push(op);
        if perturb(gt, &spec).is_err() {
            spec.ops.pop();
        }
    }
    spec
}
