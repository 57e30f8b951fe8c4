//! Clip-level evaluation: accuracy and the precision-recall curve with
//! `investigate` as the positive class.
//!
//! Average precision is step-integrated over the exact operating points:
//! thresholds sweep the distinct scores in descending order, records with
//! equal scores enter as one group (so the result is independent of record
//! order), and `ap = sum_k (R_k - R_{k-1}) * P_k` with `R_0 = 0`.

use crate::clipper::ClipClass;
use crate::error::Error;
use crate::Result;

/// One scored clip outcome.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClipEvalRecord {
    pub true_label: ClipClass,
    pub predicted_label: ClipClass,
    /// Confidence that the clip is `investigate`, in [0, 1].
    pub score: Option<f64>,
}

/// Fraction of records whose predicted label matches the true label.
pub fn accuracy(records: &[ClipEvalRecord]) -> Result<f64> {
    if records.is_empty() {
        return Err(Error::validation("cannot compute accuracy of an empty batch"));
    }
    let correct = records
        .iter()
        .filter(|r| r.true_label == r.predicted_label)
        .count();
    Ok(correct as f64 / records.len() as f64)
}

/// One operating point of the precision-recall curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrPoint {
    pub threshold: f64,
    pub precision: f64,
    pub recall: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrCurve {
    pub positive: ClipClass,
    pub points: Vec<PrPoint>,
    pub ap: f64,
}

/// Precision-recall curve with `investigate` as the positive label.
pub fn pr_curve(records: &[ClipEvalRecord]) -> Result<PrCurve> {
    pr_curve_for(records, ClipClass::Investigate)
}

/// Precision-recall curve for an arbitrary positive class. For
/// `explore`-positive the score is mirrored to `1 - s`, which reverses the
/// ranking without changing any tie structure.
pub fn pr_curve_for(records: &[ClipEvalRecord], positive: ClipClass) -> Result<PrCurve> {
    if records.is_empty() {
        return Err(Error::validation("cannot compute AP of an empty batch"));
    }
    let mut ranked: Vec<(f64, bool)> = Vec::with_capacity(records.len());
    for r in records {
        let score = r
            .score
            .ok_or_else(|| Error::validation("AP requires a score on every record"))?;
        let pos_score = match positive {
            ClipClass::Investigate => score,
            ClipClass::Explore => 1.0 - score,
        };
        ranked.push((pos_score, r.true_label == positive));
    }
    let total_pos = ranked.iter().filter(|(_, p)| *p).count();
    if total_pos == 0 {
        return Err(Error::validation(
            "AP undefined: no positive ground-truth records",
        ));
    }
    if total_pos == ranked.len() {
        return Err(Error::validation(
            "AP undefined: no negative ground-truth records",
        ));
    }

    ranked.sort_by(|a, b| b.0.partial_cmp(&a.0).expect("scores are finite"));

    let mut points = Vec::new();
    let mut ap = 0.0;
    let mut prev_recall = 0.0;
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < ranked.len() {
        let threshold = ranked[i].0;
        // consume the whole tie group before emitting a point
        let mut j = i;
        while j < ranked.len() && ranked[j].0 == threshold {
            if ranked[j].1 {
                tp += 1;
            } else {
                fp += 1;
            }
            j += 1;
        }
        let precision = tp as f64 / (tp + fp) as f64;
        let recall = tp as f64 / total_pos as f64;
        ap += (recall - prev_recall) * precision;
        prev_recall = recall;
        points.push(PrPoint {
            threshold,
            precision,
            recall,
        });
        i = j;
    }
    Ok(PrCurve {
        positive,
        points,
        ap,
    })
}

/// Summary of one clip evaluation batch. PR curves are present only when the
/// batch carries scores.
#[derive(Debug, Clone)]
pub struct ClipEvalReport {
    pub n_records: usize,
    pub accuracy: f64,
    pub investigate: Option<PrCurve>,
    pub explore: Option<PrCurve>,
}

pub fn evaluate(records: &[ClipEvalRecord]) -> Result<ClipEvalReport> {
    let accuracy = accuracy(records)?;
    let scored = records.iter().all(|r| r.score.is_some());
    let (investigate, explore) = if scored {
        (
            Some(pr_curve_for(records, ClipClass::Investigate)?),
            Some(pr_curve_for(records, ClipClass::Explore)?),
        )
    } else {
        (None, None)
    };
    Ok(ClipEvalReport {
        n_records: records.len(),
        accuracy,
        investigate,
        explore,
    })
}

const EVAL_HEADER: [&str; 5] = ["video_id", "start_frame", "true_label", "pred_label", "score"];

/// Parse a clip evaluation CSV with exact header
/// `video_id,start_frame,true_label,pred_label,score` (score column
/// optional). Score cells must be filled on every row or on none.
pub fn parse_eval_csv(bytes: &[u8]) -> Result<Vec<ClipEvalRecord>> {
    let text = std::str::from_utf8(bytes)
        .map_err(|e| Error::parse(format!("input is not UTF-8: {e}")))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| Error::parse(format!("missing CSV header: {e}")))?
        .clone();
    let has_score = match headers.len() {
        5 if headers.iter().eq(EVAL_HEADER) => true,
        4 if headers.iter().eq(EVAL_HEADER[..4].iter().copied()) => false,
        _ => {
            return Err(Error::parse_at(
                1,
                format!("expected header '{}' (score column optional)", EVAL_HEADER.join(",")),
            ))
        }
    };
    let mut records = Vec::new();
    let mut scored = 0usize;
    for result in reader.records() {
        let record = result.map_err(|e| Error::parse(e.to_string()))?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let class = |idx: usize, name: &str| -> Result<ClipClass> {
            let raw = record
                .get(idx)
                .ok_or_else(|| Error::parse_at(line, format!("missing field '{name}'")))?
                .trim();
            ClipClass::parse(raw)
                .ok_or_else(|| Error::parse_at(line, format!("unknown {name} '{raw}'")))
        };
        let true_label = class(2, "true_label")?;
        let predicted_label = class(3, "pred_label")?;
        let score = if has_score {
            let raw = record.get(4).unwrap_or("").trim();
            if raw.is_empty() {
                None
            } else {
                let s: f64 = raw
                    .parse()
                    .map_err(|_| Error::parse_at(line, format!("score is not a number: '{raw}'")))?;
                if !(0.0..=1.0).contains(&s) {
                    return Err(Error::validation(format!(
                        "score {s} outside [0, 1] at line {line}"
                    )));
                }
                scored += 1;
                Some(s)
            }
        } else {
            None
        };
        records.push(ClipEvalRecord {
            true_label,
            predicted_label,
            score,
        });
    }
    if scored != 0 && scored != records.len() {
        return Err(Error::validation(
            "score must be present on all records or none",
        ));
    }
    Ok(records)
}

pub fn report_to_csv(report: &ClipEvalReport) -> String {
    let mut out = String::from("metric,value\n");
    out.push_str(&format!("n_records,{}\n", report.n_records));
    out.push_str(&format!("accuracy,{}\n", report.accuracy));
    let ap = |curve: &Option<PrCurve>| curve.as_ref().map(|c| c.ap.to_string()).unwrap_or_default();
    out.push_str(&format!("ap_investigate,{}\n", ap(&report.investigate)));
    out.push_str(&format!("ap_explore,{}\n", ap(&report.explore)));
    out
}

pub fn curves_to_csv(report: &ClipEvalReport) -> String {
    let mut out = String::from("positive_class,threshold,precision,recall\n");
    for curve in [&report.investigate, &report.explore].into_iter().flatten() {
        for p in &curve.points {
            out.push_str(&format!(
                "{},{},{},{}\n",
                match curve.positive {
                    ClipClass::Investigate => "investigate",
                    ClipClass::Explore => "explore",
                },
                p.threshold,
                p.precision,
                p.recall
            ));
        }
    }
    out
}
