//! Subcommand implementations.
//!
//! Batch commands share one shape: expand inputs, parse and score each video
//! on a bounded worker pool, merge results in video-id order, write outputs
//! atomically. A video that fails never aborts the corpus; its error lands
//! in `errors.csv` and the run exits with code 4 (partial failure) as long
//! as at least one video succeeded.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use nor_score::annotation::{
    parse_annotation, parse_interval_predictions, parse_window_predictions, PredictionEntry,
    PredictionSet, TrialAnnotation,
};
use nor_score::clip_metrics;
use nor_score::clipper::{self, ClipRecord, SplitTag};
use nor_score::nor::{self, LatencyConvention, NorMetrics};
use nor_score::rng::SplitMix64;
use nor_score::segmental::{self, Category, SegmentalReport};
use nor_score::synth::{self, BoutModel};
use nor_score::timeline::TimeBase;
use nor_score::{batch, Error};

use crate::fsio::{collect_inputs, read, write_atomic, InputKind};
use crate::CliError;

const EXIT_OK: u8 = 0;
const EXIT_PARTIAL: u8 = 4;

/// One failed work item.
struct Failure {
    video_id: String,
    stage: &'static str,
    message: String,
    exit_code: u8,
}

impl Failure {
    fn new(video_id: &str, stage: &'static str, err: &Error) -> Self {
        Failure {
            video_id: video_id.to_string(),
            stage,
            message: err.to_string(),
            exit_code: if err.is_parse() { 2 } else { 3 },
        }
    }
}

fn failures_csv(failures: &[Failure]) -> String {
    let mut out = String::from("video_id,stage,error\n");
    for f in failures {
        let escaped = f.message.replace('"', "\"\"");
        out.push_str(&format!("{},{},\"{}\"\n", f.video_id, f.stage, escaped));
    }
    out
}

/// Write `errors.csv` when needed and fold the outcome into an exit code.
fn finish(
    out_dir: &Path,
    n_ok: usize,
    mut failures: Vec<Failure>,
) -> Result<u8, CliError> {
    if failures.is_empty() {
        return Ok(EXIT_OK);
    }
    failures.sort_by(|a, b| (&a.video_id, a.stage).cmp(&(&b.video_id, b.stage)));
    write_atomic(&out_dir.join("errors.csv"), &failures_csv(&failures))?;
    for f in &failures {
        eprintln!("error [{}/{}]: {}", f.video_id, f.stage, f.message);
    }
    if n_ok == 0 {
        // nothing succeeded: not a partial failure, surface the first cause
        return Ok(failures[0].exit_code);
    }
    Ok(EXIT_PARTIAL)
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

/// Parse many annotation files, enforcing unique video ids. Successes come
/// back sorted by video id.
fn load_annotations(
    files: &[PathBuf],
    threads: usize,
) -> (Vec<TrialAnnotation>, Vec<Failure>) {
    let parsed = batch::map(files.to_vec(), threads, |path| {
        let contents = std::fs::read(&path);
        (path, contents.map(|bytes| parse_annotation(&bytes)))
    });
    let mut ok: Vec<TrialAnnotation> = Vec::new();
    let mut failures = Vec::new();
    for (path, outcome) in parsed {
        match outcome {
            Ok(Ok(annotation)) => ok.push(annotation),
            Ok(Err(err)) => failures.push(Failure::new(&stem(&path), "parse-annotation", &err)),
            Err(io) => failures.push(Failure {
                video_id: stem(&path),
                stage: "read",
                message: io.to_string(),
                exit_code: 1,
            }),
        }
    }
    ok.sort_by(|a, b| a.video_id().cmp(b.video_id()));
    for pair in ok.windows(2) {
        if pair[0].video_id() == pair[1].video_id() {
            failures.push(Failure {
                video_id: pair[0].video_id().to_string(),
                stage: "duplicate",
                message: "video_id appears in more than one annotation file".into(),
                exit_code: 3,
            });
        }
    }
    ok.dedup_by(|a, b| a.video_id() == b.video_id());
    (ok, failures)
}

fn parse_prediction_file(path: &Path, bytes: &[u8]) -> Result<PredictionSet, Error> {
    if path.extension().is_some_and(|e| e == "csv") {
        parse_window_predictions(bytes)
    } else {
        parse_interval_predictions(bytes)
    }
}

fn load_predictions(
    files: &[PathBuf],
    threads: usize,
) -> (BTreeMap<String, PredictionSet>, Vec<Failure>) {
    let parsed = batch::map(files.to_vec(), threads, |path| {
        let contents = std::fs::read(&path);
        let outcome = contents.map(|bytes| parse_prediction_file(&path, &bytes));
        (path, outcome)
    });
    let mut ok = BTreeMap::new();
    let mut failures = Vec::new();
    for (path, outcome) in parsed {
        match outcome {
            Ok(Ok(set)) => {
                if ok
                    .insert(set.video_id().to_string(), set)
                    .is_some()
                {
                    failures.push(Failure {
                        video_id: stem(&path),
                        stage: "duplicate",
                        message: "video_id appears in more than one prediction file".into(),
                        exit_code: 3,
                    });
                }
            }
            Ok(Err(err)) => failures.push(Failure::new(&stem(&path), "parse-prediction", &err)),
            Err(io) => failures.push(Failure {
                video_id: stem(&path),
                stage: "read",
                message: io.to_string(),
                exit_code: 1,
            }),
        }
    }
    (ok, failures)
}

/// Pair ground truth with predictions by video id; unmatched entries on
/// either side become failures.
fn match_corpus(
    annotations: Vec<TrialAnnotation>,
    mut predictions: BTreeMap<String, PredictionSet>,
    failures: &mut Vec<Failure>,
) -> Vec<(TrialAnnotation, PredictionSet)> {
    let mut pairs = Vec::new();
    for annotation in annotations {
        match predictions.remove(annotation.video_id()) {
            Some(prediction) => pairs.push((annotation, prediction)),
            None => failures.push(Failure {
                video_id: annotation.video_id().to_string(),
                stage: "match",
                message: "no prediction file for this video".into(),
                exit_code: 3,
            }),
        }
    }
    for (video_id, _) in predictions {
        failures.push(Failure {
            video_id,
            stage: "match",
            message: "prediction has no matching annotation".into(),
            exit_code: 3,
        });
    }
    pairs
}

// --- clips ---------------------------------------------------------------

#[allow(clippy::too_many_arguments)]
pub fn clips(
    inputs: &[PathBuf],
    out_dir: &Path,
    clip_len: u64,
    ratio: Option<f64>,
    seed: u64,
    threads: usize,
) -> Result<u8, CliError> {
    let files = collect_inputs(inputs, InputKind::Annotations)?;
    let (annotations, mut failures) = load_annotations(&files, threads);

    let extracted = batch::map(annotations, threads, |annotation| {
        let clips = clipper::extract_clips(&annotation, clip_len);
        (annotation.video_id().to_string(), clips)
    });
    let mut manifest: Vec<ClipRecord> = Vec::new();
    let mut n_videos = 0usize;
    for (video_id, outcome) in extracted {
        match outcome {
            Ok(clips) => {
                n_videos += 1;
                manifest.extend(clips);
            }
            Err(err) => failures.push(Failure::new(&video_id, "extract", &err)),
        }
    }

    if manifest.is_empty() && !failures.is_empty() {
        return finish(out_dir, 0, failures);
    }
    let rows: Vec<(ClipRecord, SplitTag)> = match ratio {
        Some(ratio) => {
            let assignment = clipper::split(manifest.clone(), ratio, seed).map_err(CliError::Core)?;
            let train: std::collections::HashSet<&ClipRecord> = assignment.train.iter().collect();
            let (n_train, n_val) = (assignment.train.len(), assignment.validation.len());
            let rows = manifest
                .iter()
                .map(|record| {
                    let tag = if train.contains(record) {
                        SplitTag::Train
                    } else {
                        SplitTag::Val
                    };
                    (record.clone(), tag)
                })
                .collect();
            println!(
                "{} clips from {} videos -> {} train / {} val (ratio {}, seed {})",
                manifest.len(),
                n_videos,
                n_train,
                n_val,
                ratio,
                seed
            );
            rows
        }
        None => {
            println!("{} clips from {} videos (no split)", manifest.len(), n_videos);
            manifest
                .iter()
                .map(|record| (record.clone(), SplitTag::None))
                .collect()
        }
    };
    write_atomic(&out_dir.join("clip_manifest.csv"), &clipper::manifest_to_csv(&rows))?;
    finish(out_dir, n_videos, failures)
}

// --- clip-eval -----------------------------------------------------------

pub fn clip_eval(inputs: &[PathBuf], out_dir: &Path, threads: usize) -> Result<u8, CliError> {
    let files = collect_inputs(inputs, InputKind::EvalCsv)?;
    let parsed = batch::map(files.clone(), threads, |path| {
        let contents = std::fs::read(&path);
        (path, contents.map(|bytes| clip_metrics::parse_eval_csv(&bytes)))
    });
    let mut records = Vec::new();
    let mut failures = Vec::new();
    let mut ok_files = 0usize;
    for (path, outcome) in parsed {
        match outcome {
            Ok(Ok(batch)) => {
                ok_files += 1;
                records.extend(batch);
            }
            Ok(Err(err)) => failures.push(Failure::new(&stem(&path), "parse-eval", &err)),
            Err(io) => failures.push(Failure {
                video_id: stem(&path),
                stage: "read",
                message: io.to_string(),
                exit_code: 1,
            }),
        }
    }
    if records.is_empty() {
        let err = Error::validation("no clip evaluation records parsed");
        failures.push(Failure::new("__batch__", "evaluate", &err));
        return finish(out_dir, 0, failures);
    }
    let report = clip_metrics::evaluate(&records).map_err(CliError::Core)?;
    write_atomic(
        &out_dir.join("clip_eval_summary.csv"),
        &clip_metrics::report_to_csv(&report),
    )?;
    write_atomic(
        &out_dir.join("pr_curve.csv"),
        &clip_metrics::curves_to_csv(&report),
    )?;

    println!("clip evaluation over {} records", report.n_records);
    println!("  accuracy          {:.4}", report.accuracy);
    match (&report.investigate, &report.explore) {
        (Some(inv), Some(exp)) => {
            println!("  AP (investigate)  {:.4}", inv.ap);
            println!("  AP (explore)      {:.4}", exp.ap);
        }
        _ => println!("  AP                n/a (batch carries no scores)"),
    }
    finish(out_dir, ok_files, failures)
}

// --- segscore ------------------------------------------------------------

pub fn segscore(
    gt: &[PathBuf],
    pred: &[PathBuf],
    out_dir: &Path,
    per_side: bool,
    threads: usize,
) -> Result<u8, CliError> {
    let gt_files = collect_inputs(gt, InputKind::Annotations)?;
    let pred_files = collect_inputs(pred, InputKind::Predictions)?;
    let (annotations, mut failures) = load_annotations(&gt_files, threads);
    let (predictions, pred_failures) = load_predictions(&pred_files, threads);
    failures.extend(pred_failures);
    let pairs = match_corpus(annotations, predictions, &mut failures);

    let scored = batch::map(pairs, threads, |(annotation, prediction)| {
        let video_id = annotation.video_id().to_string();
        let result = (|| -> Result<Vec<SegmentalReport>, Error> {
            let gt_tracks = annotation.timelines();
            let pred_tracks = prediction.to_timelines(annotation.num_frames())?;
            if per_side {
                Ok(vec![
                    segmental::score(&format!("{video_id}#left"), &gt_tracks.left, &pred_tracks.left)?,
                    segmental::score(
                        &format!("{video_id}#right"),
                        &gt_tracks.right,
                        &pred_tracks.right,
                    )?,
                ])
            } else {
                Ok(vec![segmental::score(
                    &video_id,
                    &gt_tracks.combined,
                    &pred_tracks.combined,
                )?])
            }
        })();
        (video_id, result)
    });

    let mut reports = Vec::new();
    let mut n_ok = 0usize;
    for (video_id, outcome) in scored {
        match outcome {
            Ok(video_reports) => {
                n_ok += 1;
                reports.extend(video_reports);
            }
            Err(err) => failures.push(Failure::new(&video_id, "score", &err)),
        }
    }
    if !reports.is_empty() {
        let summary = segmental::aggregate(&reports).map_err(CliError::Core)?;
        write_atomic(
            &out_dir.join("segmental_report.csv"),
            &segmental::reports_to_csv(&reports, &summary),
        )?;
        println!(
            "segmental rules v{} over {} track pairs",
            segmental::RULES_VERSION,
            reports.len()
        );
        for category in Category::ALL {
            println!(
                "  {:<14} mean fraction {:.6}",
                category.as_str(),
                summary.mean_fractions[category.index()]
            );
        }
        println!("  severe error rate {:.6}", summary.severe_error_rate);
    }
    finish(out_dir, n_ok, failures)
}

// --- nor -----------------------------------------------------------------

fn annotation_metrics(
    annotation: &TrialAnnotation,
    fps_override: Option<u32>,
    convention: LatencyConvention,
) -> Result<NorMetrics, Error> {
    let time_base = match fps_override {
        Some(fps) => TimeBase::new(fps)?,
        None => annotation.time_base(),
    };
    Ok(nor::nor_metrics(
        annotation.video_id(),
        &annotation.timelines(),
        annotation.novel_side(),
        time_base,
        convention,
    ))
}

pub fn nor_cmd(
    inputs: &[PathBuf],
    out_dir: &Path,
    fps_override: Option<u32>,
    convention: LatencyConvention,
    threads: usize,
) -> Result<u8, CliError> {
    let files = collect_inputs(inputs, InputKind::Annotations)?;
    let (annotations, mut failures) = load_annotations(&files, threads);
    let computed = batch::map(annotations, threads, |annotation| {
        let video_id = annotation.video_id().to_string();
        (video_id, annotation_metrics(&annotation, fps_override, convention))
    });
    let mut metrics = Vec::new();
    for (video_id, outcome) in computed {
        match outcome {
            Ok(m) => metrics.push(m),
            Err(err) => failures.push(Failure::new(&video_id, "metrics", &err)),
        }
    }
    if !metrics.is_empty() {
        write_atomic(&out_dir.join("nor_metrics.csv"), &nor::metrics_to_csv(&metrics))?;
        print_metric_means(&metrics);
    }
    finish(out_dir, metrics.len(), failures)
}

fn print_metric_means(metrics: &[NorMetrics]) {
    println!("NOR metrics over {} videos (corpus means)", metrics.len());
    let mean_of = |values: Vec<f64>| -> Option<f64> {
        (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
    };
    let rows: [(&str, Option<f64>); 6] = [
        (
            "n",
            mean_of(metrics.iter().map(|m| m.investigations as f64).collect()),
        ),
        (
            "cd_s",
            mean_of(metrics.iter().map(|m| m.investigation_time_s).collect()),
        ),
        (
            "me_s",
            mean_of(metrics.iter().filter_map(|m| m.mean_bout_s).collect()),
        ),
        (
            "lf_s",
            mean_of(metrics.iter().filter_map(|m| m.first_latency_s).collect()),
        ),
        (
            "ll_s",
            mean_of(metrics.iter().filter_map(|m| m.last_latency_s).collect()),
        ),
        (
            "ri",
            mean_of(metrics.iter().filter_map(|m| m.recognition_index).collect()),
        ),
    ];
    for (name, mean) in rows {
        match mean {
            Some(v) => println!("  {name:<6} {v:.4}"),
            None => println!("  {name:<6} absent on all videos"),
        }
    }
}

// --- compare -------------------------------------------------------------

pub fn compare(
    gt: &[PathBuf],
    pred: &[PathBuf],
    out_dir: &Path,
    fps_override: Option<u32>,
    convention: LatencyConvention,
    threads: usize,
) -> Result<u8, CliError> {
    let gt_files = collect_inputs(gt, InputKind::Annotations)?;
    let pred_files = collect_inputs(pred, InputKind::Predictions)?;
    let (annotations, mut failures) = load_annotations(&gt_files, threads);
    let (predictions, pred_failures) = load_predictions(&pred_files, threads);
    failures.extend(pred_failures);
    let pairs = match_corpus(annotations, predictions, &mut failures);

    let computed = batch::map(pairs, threads, |(annotation, prediction)| {
        let video_id = annotation.video_id().to_string();
        let result = (|| -> Result<(NorMetrics, NorMetrics), Error> {
            let gt_metrics = annotation_metrics(&annotation, fps_override, convention)?;
            let time_base = match fps_override {
                Some(fps) => TimeBase::new(fps)?,
                None => annotation.time_base(),
            };
            let pred_tracks = prediction.to_timelines(annotation.num_frames())?;
            let pred_metrics = nor::nor_metrics(
                annotation.video_id(),
                &pred_tracks,
                annotation.novel_side(),
                time_base,
                convention,
            );
            Ok((gt_metrics, pred_metrics))
        })();
        (video_id, result)
    });

    let mut gt_metrics = Vec::new();
    let mut pred_metrics = Vec::new();
    for (video_id, outcome) in computed {
        match outcome {
            Ok((g, p)) => {
                gt_metrics.push(g);
                pred_metrics.push(p);
            }
            Err(err) => failures.push(Failure::new(&video_id, "metrics", &err)),
        }
    }
    let n_ok = gt_metrics.len();
    if n_ok > 0 {
        write_atomic(
            &out_dir.join("nor_metrics_gt.csv"),
            &nor::metrics_to_csv(&gt_metrics),
        )?;
        write_atomic(
            &out_dir.join("nor_metrics_pred.csv"),
            &nor::metrics_to_csv(&pred_metrics),
        )?;
    }
    if n_ok == 1 {
        // per-video metrics are written above; the corpus statistics need
        // at least two aligned videos
        let err = Error::validation("comparison requires at least 2 aligned videos");
        failures.push(Failure::new("__corpus__", "compare", &err));
    } else if n_ok > 1 {
        let stats = nor::compare(&gt_metrics, &pred_metrics).map_err(CliError::Core)?;
        write_atomic(
            &out_dir.join("nor_comparison.csv"),
            &nor::comparison_to_csv(&stats),
        )?;
        println!("NOR metric agreement over {n_ok} videos");
        println!("  {:<6} {:>10} {:>12} {:>12} {:>12}", "metric", "r^2", "mean err", "std err", "pairs");
        for (name, m) in nor::METRIC_NAMES.iter().zip(&stats.metrics) {
            let fmt = |v: Option<f64>| v.map(|x| format!("{x:.4}")).unwrap_or_else(|| "-".into());
            println!(
                "  {:<6} {:>10} {:>12} {:>12} {:>12}",
                name,
                fmt(m.r_squared),
                fmt(m.mean_error),
                fmt(m.std_error),
                m.n_pairs
            );
        }
    }
    finish(out_dir, n_ok, failures)
}

// --- synth ---------------------------------------------------------------

pub struct SynthOverrides {
    pub fps: Option<u32>,
    pub trial_s: Option<f64>,
    pub investigate_min_s: Option<f64>,
    pub investigate_max_s: Option<f64>,
    pub gap_min_s: Option<f64>,
    pub gap_max_s: Option<f64>,
    pub novel_prob: Option<f64>,
}

/// Flat `key = value` config; `#` starts a comment. Recognized keys match
/// the corresponding CLI flags.
fn apply_model_config(text: &str, model: &mut BoutModel) -> Result<(), Error> {
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let lineno = idx as u64 + 1;
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::parse_at(lineno, "expected 'key = value'"))?;
        let key = key.trim();
        let value = value.trim();
        let as_f64 = || -> Result<f64, Error> {
            value
                .parse()
                .map_err(|_| Error::parse_at(lineno, format!("'{value}' is not a number")))
        };
        match key {
            "investigate_min_s" => model.investigate_s.0 = as_f64()?,
            "investigate_max_s" => model.investigate_s.1 = as_f64()?,
            "gap_min_s" => model.gap_s.0 = as_f64()?,
            "gap_max_s" => model.gap_s.1 = as_f64()?,
            "novel_prob" => model.novel_prob = as_f64()?,
            "trial_s" => model.trial_s = as_f64()?,
            "fps" => {
                model.fps = value
                    .parse()
                    .map_err(|_| Error::parse_at(lineno, format!("'{value}' is not an integer")))?
            }
            other => {
                return Err(Error::parse_at(lineno, format!("unknown config key '{other}'")))
            }
        }
    }
    Ok(())
}

pub fn synth_cmd(
    trials: u64,
    seed: u64,
    out_dir: &Path,
    config: Option<&Path>,
    ops: usize,
    overrides: &SynthOverrides,
) -> Result<u8, CliError> {
    let mut model = BoutModel::default();
    if let Some(path) = config {
        let bytes = read(path)?;
        let text = String::from_utf8(bytes)
            .map_err(|e| CliError::Core(Error::parse(format!("config is not UTF-8: {e}"))))?;
        apply_model_config(&text, &mut model).map_err(CliError::Core)?;
    }
    if let Some(v) = overrides.fps {
        model.fps = v;
    }
    if let Some(v) = overrides.trial_s {
        model.trial_s = v;
    }
    if let Some(v) = overrides.investigate_min_s {
        model.investigate_s.0 = v;
    }
    if let Some(v) = overrides.investigate_max_s {
        model.investigate_s.1 = v;
    }
    if let Some(v) = overrides.gap_min_s {
        model.gap_s.0 = v;
    }
    if let Some(v) = overrides.gap_max_s {
        model.gap_s.1 = v;
    }
    if let Some(v) = overrides.novel_prob {
        model.novel_prob = v;
    }

    let mut master = SplitMix64::new(seed);
    for k in 0..trials {
        let video_id = format!("synth-{k:05}");
        let trial_seed = master.next_u64();
        let spec_seed = master.next_u64();
        let annotation =
            synth::generate_trial(&model, trial_seed, &video_id).map_err(CliError::Core)?;
        let gt = annotation.timelines().combined;
        let mut spec_rng = SplitMix64::new(spec_seed);
        let spec = synth::random_spec(&gt, &mut spec_rng, ops);
        let (pred, ledger) = synth::perturb(&gt, &spec).map_err(CliError::Core)?;
        let entries: Vec<PredictionEntry> = pred
            .events()
            .iter()
            .map(|iv| PredictionEntry {
                label: nor_score::annotation::ActivityLabel::Investigate,
                span: *iv,
                score: None,
            })
            .collect();
        let prediction =
            PredictionSet::from_intervals(&video_id, entries).map_err(CliError::Core)?;

        write_atomic(
            &out_dir.join("annotations").join(format!("{video_id}.json")),
            &annotation.to_json(),
        )?;
        write_atomic(
            &out_dir.join("predictions").join(format!("{video_id}.pred.json")),
            &prediction.to_interval_json(),
        )?;
        write_atomic(
            &out_dir.join("ledgers").join(format!("{video_id}.ledger.csv")),
            &ledger.to_csv(),
        )?;
    }
    println!(
        "generated {trials} trial(s) with seed {seed} under {}",
        out_dir.display()
    );
    println!("  annotations/  ground-truth annotation JSON");
    println!("  predictions/  perturbed prediction interval JSON");
    println!("  ledgers/      expected segmental frame counts per video");
    Ok(EXIT_OK)
}
