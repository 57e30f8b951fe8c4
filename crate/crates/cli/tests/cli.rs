//! End-to-end tests of the `nor-score` binary: exit codes, file formats,
//! and the synth -> segscore oracle round trip.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::json;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nor-score"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

fn write(path: &Path, contents: &str) {
    fs::create_dir_all(path.parent().unwrap()).unwrap();
    fs::write(path, contents).unwrap();
}

fn annotation_json(video_id: &str, num_frames: u64, intervals: &[(&str, u64, u64)]) -> String {
    let intervals: Vec<_> = intervals
        .iter()
        .map(|(label, start, end)| {
            json!({"label": label, "start_frame": start, "end_frame": end})
        })
        .collect();
    serde_json::to_string_pretty(&json!({
        "video_id": video_id,
        "fps": 30,
        "num_frames": num_frames,
        "novel_side": "left",
        "intervals": intervals,
    }))
    .unwrap()
}

#[test]
fn help_and_version_exit_zero() {
    let help = run(&["--help"]);
    assert_eq!(exit_code(&help), 0);
    let text = String::from_utf8_lossy(&help.stdout);
    for sub in ["clips", "clip-eval", "segscore", "nor", "compare", "synth"] {
        assert!(text.contains(sub), "help must mention {sub}");
    }

    let version = run(&["--version"]);
    assert_eq!(exit_code(&version), 0);
    assert!(String::from_utf8_lossy(&version.stdout).contains("segmental rules v1"));
}

#[test]
fn usage_error_exits_one() {
    assert_eq!(exit_code(&run(&["segscore", "--no-such-flag"])), 1);
    assert_eq!(exit_code(&run(&["definitely-not-a-subcommand"])), 1);
    // empty input directory is a usage problem too
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "nor",
        "--in",
        dir.path().to_str().unwrap(),
        "--out",
        dir.path().join("out").to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 1);
}

#[test]
fn parse_error_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    write(&dir.path().join("in/broken.json"), "{ not json at all");
    let out = run(&[
        "nor",
        "--in",
        dir.path().join("in").to_str().unwrap(),
        "--out",
        dir.path().join("out").to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 2, "{out:?}");
    let errors = fs::read_to_string(dir.path().join("out/errors.csv")).unwrap();
    assert!(errors.starts_with("video_id,stage,error\n"));
    assert!(errors.contains("broken,parse-annotation"));
}

#[test]
fn validation_error_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    write(
        &dir.path().join("in/clash.json"),
        &annotation_json(
            "clash",
            1000,
            &[("investigate_left", 10, 20), ("investigate_right", 15, 25)],
        ),
    );
    let out = run(&[
        "nor",
        "--in",
        dir.path().join("in").to_str().unwrap(),
        "--out",
        dir.path().join("out").to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 3, "{out:?}");
    assert!(String::from_utf8_lossy(&out.stderr).contains("overlapping object labels"));
}

#[test]
fn partial_failure_exits_four_and_reports() {
    let dir = tempfile::tempdir().unwrap();
    write(
        &dir.path().join("in/good.json"),
        &annotation_json("good", 1000, &[("investigate_left", 100, 200)]),
    );
    write(&dir.path().join("in/bad.json"), "{ nope");
    let out = run(&[
        "nor",
        "--in",
        dir.path().join("in").to_str().unwrap(),
        "--out",
        dir.path().join("out").to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 4, "{out:?}");
    let metrics = fs::read_to_string(dir.path().join("out/nor_metrics.csv")).unwrap();
    assert!(metrics.contains("good,1,"));
    let errors = fs::read_to_string(dir.path().join("out/errors.csv")).unwrap();
    assert!(errors.contains("bad,parse-annotation"));
}

#[test]
fn clips_reproduces_published_split_sizes() {
    // one investigate run of 1109 clips and one explore run of 1134 clips:
    // 2243 eligible clips, split 75/25 -> 1682 train / 561 val
    let investigate_end = 1109 * 60;
    let num_frames = investigate_end + 1134 * 60 + 30;
    let dir = tempfile::tempdir().unwrap();
    write(
        &dir.path().join("in/trial.json"),
        &annotation_json("trial", num_frames, &[("investigate_left", 0, investigate_end)]),
    );
    let out = run(&[
        "clips",
        "--in",
        dir.path().join("in").to_str().unwrap(),
        "--out",
        dir.path().join("out").to_str().unwrap(),
        "--clip-len",
        "60",
        "--ratio",
        "0.75",
        "--seed",
        "7",
    ]);
    assert_eq!(exit_code(&out), 0, "{out:?}");
    let manifest = fs::read_to_string(dir.path().join("out/clip_manifest.csv")).unwrap();
    let mut lines = manifest.lines();
    assert_eq!(
        lines.next(),
        Some("video_id,class,start_frame,length,split")
    );
    let (mut train, mut val, mut investigate, mut explore) = (0, 0, 0, 0);
    for line in lines {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields[3], "60");
        match fields[1] {
            "investigate" => investigate += 1,
            "explore" => explore += 1,
            other => panic!("unexpected class {other}"),
        }
        match fields[4] {
            "train" => train += 1,
            "val" => val += 1,
            other => panic!("unexpected split {other}"),
        }
    }
    assert_eq!((investigate, explore), (1109, 1134));
    assert_eq!((train, val), (1682, 561));
}

#[test]
fn segscore_accepts_window_csv_predictions() {
    let dir = tempfile::tempdir().unwrap();
    write(
        &dir.path().join("gt/w1.json"),
        &annotation_json("w1", 120, &[("investigate_left", 30, 60)]),
    );
    write(
        &dir.path().join("pred/w1.csv"),
        "video_id,window_start_frame,window_len,label\n\
         w1,0,30,explore\n\
         w1,30,30,investigate\n\
         w1,60,30,explore\n\
         w1,90,30,explore\n",
    );
    let out = run(&[
        "segscore",
        "--gt",
        dir.path().join("gt").to_str().unwrap(),
        "--pred",
        dir.path().join("pred").to_str().unwrap(),
        "--out",
        dir.path().join("out").to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0, "{out:?}");
    let report = fs::read_to_string(dir.path().join("out/segmental_report.csv")).unwrap();
    assert!(report.contains("w1,true_positive,30,1,0.25"));
    assert!(report.contains("w1,true_negative,90,2,0.75"));
}

#[test]
fn segscore_per_side_rows() {
    let dir = tempfile::tempdir().unwrap();
    write(
        &dir.path().join("gt/v.json"),
        &annotation_json(
            "v",
            300,
            &[("investigate_left", 30, 60), ("investigate_right", 100, 130)],
        ),
    );
    // predictions as an annotation-shaped interval file
    write(
        &dir.path().join("pred/v.pred.json"),
        &serde_json::to_string_pretty(&json!({
            "video_id": "v",
            "intervals": [
                {"label": "investigate_left", "start_frame": 30, "end_frame": 60},
                {"label": "investigate_right", "start_frame": 110, "end_frame": 130},
            ],
        }))
        .unwrap(),
    );
    let out = run(&[
        "segscore",
        "--gt",
        dir.path().join("gt").to_str().unwrap(),
        "--pred",
        dir.path().join("pred").to_str().unwrap(),
        "--out",
        dir.path().join("out").to_str().unwrap(),
        "--per-side",
    ]);
    assert_eq!(exit_code(&out), 0, "{out:?}");
    let report = fs::read_to_string(dir.path().join("out/segmental_report.csv")).unwrap();
    assert!(report.contains("v#left,true_positive,30,"));
    assert!(report.contains("v#right,underfill,10,"));
}

#[test]
fn synth_then_segscore_reports_equal_ledgers() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus");
    let out = run(&[
        "synth",
        "--trials",
        "5",
        "--seed",
        "1",
        "--out",
        corpus.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0, "{out:?}");

    let seg = dir.path().join("seg");
    let out = run(&[
        "segscore",
        "--gt",
        corpus.join("annotations").to_str().unwrap(),
        "--pred",
        corpus.join("predictions").to_str().unwrap(),
        "--out",
        seg.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0, "{out:?}");

    let report = fs::read_to_string(seg.join("segmental_report.csv")).unwrap();
    for k in 0..5 {
        let video_id = format!("synth-{k:05}");
        let ledger =
            fs::read_to_string(corpus.join("ledgers").join(format!("{video_id}.ledger.csv")))
                .unwrap();
        for line in ledger.lines().skip(1) {
            let (category, frames) = line.split_once(',').unwrap();
            let row = format!("{video_id},{category},{frames},");
            assert!(
                report.contains(&row),
                "report is missing expected row '{row}'"
            );
        }
    }
}

#[test]
fn clip_eval_reports_accuracy_and_ap() {
    let dir = tempfile::tempdir().unwrap();
    write(
        &dir.path().join("in/eval.csv"),
        "video_id,start_frame,true_label,pred_label,score\n\
         v,0,investigate,investigate,0.9\n\
         v,60,investigate,investigate,0.8\n\
         v,120,explore,investigate,0.6\n\
         v,180,explore,explore,0.2\n",
    );
    let out = run(&[
        "clip-eval",
        "--in",
        dir.path().join("in").to_str().unwrap(),
        "--out",
        dir.path().join("out").to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0, "{out:?}");
    let summary = fs::read_to_string(dir.path().join("out/clip_eval_summary.csv")).unwrap();
    assert!(summary.contains("accuracy,0.75"));
    assert!(summary.contains("ap_investigate,1\n"));
    let curves = fs::read_to_string(dir.path().join("out/pr_curve.csv")).unwrap();
    assert!(curves.starts_with("positive_class,threshold,precision,recall\n"));
}

#[test]
fn compare_on_identical_sets_gives_unit_r_squared() {
    let dir = tempfile::tempdir().unwrap();
    // event counts and durations must vary across videos or the r^2
    // denominator degenerates
    let corpora = [
        ("v1", vec![("investigate_left", 30, 90)]),
        (
            "v2",
            vec![("investigate_left", 60, 150), ("investigate_right", 300, 345)],
        ),
        (
            "v3",
            vec![
                ("investigate_left", 10, 40),
                ("investigate_right", 100, 190),
                ("investigate_left", 400, 475),
            ],
        ),
    ];
    for (id, intervals) in corpora {
        write(
            &dir.path().join("gt").join(format!("{id}.json")),
            &annotation_json(id, 9900, &intervals),
        );
    }
    let out = run(&[
        "compare",
        "--gt",
        dir.path().join("gt").to_str().unwrap(),
        "--pred",
        dir.path().join("gt").to_str().unwrap(),
        "--out",
        dir.path().join("out").to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0, "{out:?}");
    let csv = fs::read_to_string(dir.path().join("out/nor_comparison.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next(),
        Some("metric,gt_mean,r_squared,mean_error,std_error,n_pairs,n_excluded")
    );
    for line in lines {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields[2], "1", "r_squared must be 1 in {line}");
        assert_eq!(fields[3], "0");
        assert_eq!(fields[4], "0");
        assert_eq!(fields[5], "3");
    }
}

#[test]
fn segscore_missing_prediction_is_partial_failure() {
    let dir = tempfile::tempdir().unwrap();
    write(
        &dir.path().join("gt/a.json"),
        &annotation_json("a", 300, &[("investigate_left", 30, 60)]),
    );
    write(
        &dir.path().join("gt/b.json"),
        &annotation_json("b", 300, &[("investigate_left", 30, 60)]),
    );
    write(
        &dir.path().join("pred/a.pred.json"),
        &serde_json::to_string_pretty(&json!({
            "video_id": "a",
            "intervals": [{"label": "investigate", "start_frame": 30, "end_frame": 60}],
        }))
        .unwrap(),
    );
    let out = run(&[
        "segscore",
        "--gt",
        dir.path().join("gt").to_str().unwrap(),
        "--pred",
        dir.path().join("pred").to_str().unwrap(),
        "--out",
        dir.path().join("out").to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 4, "{out:?}");
    let errors = fs::read_to_string(dir.path().join("out/errors.csv")).unwrap();
    assert!(errors.contains("b,match"));
}
