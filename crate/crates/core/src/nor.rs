//! Novel-object-recognition behavioral metrics for one trial, and
//! regression-style agreement statistics between predicted and ground-truth
//! metric sets across a corpus.
//!
//! Per trial, on the combined investigation track:
//!
//! - `n`: number of investigations (maximal events, either object)
//! - `cd`: total investigation time in seconds
//! - `me`: mean bout duration, `cd / n`
//! - `lf` / `ll`: latency from frame 0 to the first / last investigation
//!   (onset by default, offset selectable)
//! - `ri`: novel-object investigation time over total investigation time
//!
//! Metrics that are undefined on a trial (no investigations, or no sided
//! investigation time for `ri`) are reported as explicitly absent, never as
//! zero, so they cannot leak into corpus statistics.

use crate::annotation::{Side, SideTimelines};
use crate::error::Error;
use crate::timeline::TimeBase;
use crate::Result;

/// Whether latencies measure to the start or to the end of the bout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LatencyConvention {
    #[default]
    Onset,
    Offset,
}

/// Machine-readable reason attached to absent per-trial metrics.
pub const ABSENT_NO_INVESTIGATIONS: &str = "no investigations";

#[derive(Debug, Clone, PartialEq)]
pub struct NorMetrics {
    pub video_id: String,
    /// N: investigations on the combined track.
    pub investigations: u64,
    /// CD, seconds.
    pub investigation_time_s: f64,
    /// ME, seconds.
    pub mean_bout_s: Option<f64>,
    /// LF, seconds.
    pub first_latency_s: Option<f64>,
    /// LL, seconds.
    pub last_latency_s: Option<f64>,
    /// RI in [0, 1].
    pub recognition_index: Option<f64>,
    /// Per-side event counts, additionally emitted for transparency.
    pub left_investigations: u64,
    pub right_investigations: u64,
}

impl NorMetrics {
    pub fn absence_reason(&self) -> Option<&'static str> {
        (self.investigations == 0).then_some(ABSENT_NO_INVESTIGATIONS)
    }
}

/// Derive the six metrics from per-side timelines.
pub fn nor_metrics(
    video_id: &str,
    tracks: &SideTimelines,
    novel_side: Side,
    time_base: TimeBase,
    convention: LatencyConvention,
) -> NorMetrics {
    let combined = &tracks.combined;
    let n = combined.event_count() as u64;
    let cd_s = time_base.seconds(combined.total_frames());

    let (mean_bout_s, first_latency_s, last_latency_s) = match combined.events() {
        [] => (None, None, None),
        events => {
            let first = &events[0];
            let last = &events[events.len() - 1];
            let latency = |iv: &crate::timeline::FrameInterval| match convention {
                LatencyConvention::Onset => time_base.seconds(iv.start()),
                LatencyConvention::Offset => time_base.seconds(iv.end()),
            };
            (Some(cd_s / n as f64), Some(latency(first)), Some(latency(last)))
        }
    };

    let novel_frames = tracks.side(novel_side).total_frames();
    let familiar_frames = tracks.side(novel_side.opposite()).total_frames();
    let sided_total = novel_frames + familiar_frames;
    // absent when there is no sided investigation time at all; this covers
    // both empty tracks and purely side-agnostic predictions
    let recognition_index =
        (sided_total > 0).then(|| novel_frames as f64 / sided_total as f64);

    NorMetrics {
        video_id: video_id.to_string(),
        investigations: n,
        investigation_time_s: cd_s,
        mean_bout_s,
        first_latency_s,
        last_latency_s,
        recognition_index,
        left_investigations: tracks.left.event_count() as u64,
        right_investigations: tracks.right.event_count() as u64,
    }
}

/// Names of the six compared metrics, in report order.
pub const METRIC_NAMES: [&str; 6] = ["n", "cd_s", "me_s", "lf_s", "ll_s", "ri"];

/// Agreement statistics for one metric across the corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricStats {
    pub gt_mean: Option<f64>,
    /// 1 - sum(e_i^2) / sum((gt_i - mean(gt))^2); may be negative.
    pub r_squared: Option<f64>,
    /// Mean of pred - gt.
    pub mean_error: Option<f64>,
    /// Sample standard deviation (n-1 denominator) of pred - gt.
    pub std_error: Option<f64>,
    pub n_pairs: usize,
    pub n_excluded: usize,
    /// Reason when a statistic is absent.
    pub note: Option<&'static str>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonStats {
    /// Indexed like [`METRIC_NAMES`].
    pub metrics: [MetricStats; 6],
}

fn metric_value(m: &NorMetrics, index: usize) -> Option<f64> {
    match index {
        0 => Some(m.investigations as f64),
        1 => Some(m.investigation_time_s),
        2 => m.mean_bout_s,
        3 => m.first_latency_s,
        4 => m.last_latency_s,
        5 => m.recognition_index,
        _ => unreachable!("metric index"),
    }
}

fn compare_one(pairs: &[(f64, f64)], excluded: usize) -> MetricStats {
    let k = pairs.len();
    if k < 2 {
        return MetricStats {
            gt_mean: (k == 1).then(|| pairs[0].0),
            r_squared: None,
            mean_error: None,
            std_error: None,
            n_pairs: k,
            n_excluded: excluded,
            note: Some("fewer than 2 usable pairs"),
        };
    }
    let kf = k as f64;
    let gt_mean = pairs.iter().map(|(g, _)| g).sum::<f64>() / kf;
    let errors: Vec<f64> = pairs.iter().map(|(g, p)| p - g).collect();
    let mean_error = errors.iter().sum::<f64>() / kf;
    let var = errors.iter().map(|e| (e - mean_error).powi(2)).sum::<f64>() / (kf - 1.0);
    let std_error = var.sqrt();
    let ss_res: f64 = errors.iter().map(|e| e * e).sum();
    let ss_tot: f64 = pairs.iter().map(|(g, _)| (g - gt_mean).powi(2)).sum();
    let (r_squared, note) = if ss_tot == 0.0 {
        (None, Some("degenerate target variance"))
    } else {
        (Some(1.0 - ss_res / ss_tot), None)
    };
    MetricStats {
        gt_mean: Some(gt_mean),
        r_squared,
        mean_error: Some(mean_error),
        std_error: Some(std_error),
        n_pairs: k,
        n_excluded: excluded,
        note,
    }
}

/// Compare predicted metrics against ground truth, aligned by video id.
/// Videos where a metric is absent on either side are excluded from that
/// metric's statistics and counted in its exclusion tally.
pub fn compare(gt: &[NorMetrics], pred: &[NorMetrics]) -> Result<ComparisonStats> {
    if gt.len() != pred.len() {
        return Err(Error::validation(format!(
            "metric lists differ in length: {} ground truth vs {} predicted",
            gt.len(),
            pred.len()
        )));
    }
    if gt.len() < 2 {
        return Err(Error::validation(
            "comparison requires at least 2 aligned videos",
        ));
    }
    for (g, p) in gt.iter().zip(pred) {
        if g.video_id != p.video_id {
            return Err(Error::validation(format!(
                "misaligned video ids: '{}' vs '{}'",
                g.video_id, p.video_id
            )));
        }
    }
    let metrics: Vec<MetricStats> = (0..6)
        .map(|idx| {
            let mut pairs = Vec::with_capacity(gt.len());
            let mut excluded = 0;
            for (g, p) in gt.iter().zip(pred) {
                match (metric_value(g, idx), metric_value(p, idx)) {
                    (Some(gv), Some(pv)) => pairs.push((gv, pv)),
                    _ => excluded += 1,
                }
            }
            compare_one(&pairs, excluded)
        })
        .collect();
    Ok(ComparisonStats {
        metrics: metrics.try_into().expect("six metrics"),
    })
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Per-video metrics CSV with header `video_id,n,cd_s,me_s,lf_s,ll_s,ri`.
/// Absent values are empty cells.
pub fn metrics_to_csv(metrics: &[NorMetrics]) -> String {
    let mut out = String::from("video_id,n,cd_s,me_s,lf_s,ll_s,ri\n");
    for m in metrics {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            m.video_id,
            m.investigations,
            m.investigation_time_s,
            cell(m.mean_bout_s),
            cell(m.first_latency_s),
            cell(m.last_latency_s),
            cell(m.recognition_index),
        ));
    }
    out
}

/// Comparison CSV with header
/// `metric,gt_mean,r_squared,mean_error,std_error,n_pairs,n_excluded`.
pub fn comparison_to_csv(stats: &ComparisonStats) -> String {
    let mut out = String::from("metric,gt_mean,r_squared,mean_error,std_error,n_pairs,n_excluded\n");
    for (name, m) in METRIC_NAMES.iter().zip(&stats.metrics) {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            name,
            cell(m.gt_mean),
            cell(m.r_squared),
            cell(m.mean_error),
            cell(m.std_error),
            m.n_pairs,
            m.n_excluded,
        ));
    }
    out
}
