//! Property tests for the interval algebra, clip extraction, and the
//! segmental partition, checked against set-of-frames models.

use std::collections::BTreeSet;

use proptest::prelude::*;

use nor_score::annotation::{Side, TrialAnnotation};
use nor_score::clipper::{self, ClipClass, ClipRecord};
use nor_score::segmental::{self, Category};
use nor_score::timeline::{Frame, FrameInterval, TimeBase, Timeline};

const HORIZON: Frame = 240;

fn raw_intervals() -> impl Strategy<Value = Vec<FrameInterval>> {
    prop::collection::vec((0..HORIZON - 1, 1..32u64), 0..12).prop_map(|pairs| {
        pairs
            .into_iter()
            .map(|(start, len)| {
                FrameInterval::new(start, (start + len).min(HORIZON)).unwrap()
            })
            .collect()
    })
}

fn timeline() -> impl Strategy<Value = Timeline> {
    raw_intervals().prop_map(|raw| Timeline::normalize(raw, HORIZON).unwrap())
}

fn frame_set(t: &Timeline) -> BTreeSet<Frame> {
    t.events()
        .iter()
        .flat_map(|iv| iv.start()..iv.end())
        .collect()
}

proptest! {
    #[test]
    fn normalize_preserves_frame_union(raw in raw_intervals()) {
        let expected: BTreeSet<Frame> = raw
            .iter()
            .flat_map(|iv| iv.start()..iv.end())
            .collect();
        let t = Timeline::normalize(raw, HORIZON).unwrap();
        prop_assert_eq!(frame_set(&t), expected);
        // normalized output is sorted, disjoint, non-adjacent
        for pair in t.events().windows(2) {
            prop_assert!(pair[0].end() < pair[1].start());
        }
    }

    #[test]
    fn normalize_is_idempotent(t in timeline()) {
        let again = Timeline::normalize(t.events().to_vec(), HORIZON).unwrap();
        prop_assert_eq!(again, t);
    }

    #[test]
    fn complement_is_involutive_and_partitions(t in timeline()) {
        prop_assert_eq!(t.complement().complement(), t.clone());
        prop_assert_eq!(t.total_frames() + t.complement().total_frames(), HORIZON);
        prop_assert!(frame_set(&t).is_disjoint(&frame_set(&t.complement())));
    }

    #[test]
    fn de_morgan_on_frames(a in timeline(), b in timeline()) {
        let lhs = a.union(&b).unwrap().complement();
        let rhs = a.complement().intersection(&b.complement()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn union_intersection_model(a in timeline(), b in timeline()) {
        let sa = frame_set(&a);
        let sb = frame_set(&b);
        let union = a.union(&b).unwrap();
        let inter = a.intersection(&b).unwrap();
        prop_assert_eq!(frame_set(&union), sa.union(&sb).copied().collect::<BTreeSet<_>>());
        prop_assert_eq!(frame_set(&inter), sa.intersection(&sb).copied().collect::<BTreeSet<_>>());
        prop_assert_eq!(
            union.total_frames() + inter.total_frames(),
            a.total_frames() + b.total_frames()
        );
    }

    #[test]
    fn half_open_adjacency(split_at in 1..HORIZON - 1) {
        let left = FrameInterval::new(0, split_at).unwrap();
        let right = FrameInterval::new(split_at, HORIZON).unwrap();
        let merged = Timeline::normalize(vec![left, right], HORIZON).unwrap();
        prop_assert_eq!(merged.event_count(), 1);
        let a = Timeline::normalize(vec![left], HORIZON).unwrap();
        let b = Timeline::normalize(vec![right], HORIZON).unwrap();
        prop_assert!(a.intersection(&b).unwrap().is_empty());
    }

    #[test]
    fn segmental_counts_partition_horizon(gt in timeline(), pred in timeline()) {
        let report = segmental::score("p", &gt, &pred).unwrap();
        prop_assert_eq!(report.frame_counts().iter().sum::<u64>(), HORIZON);
        let fraction_sum: f64 = Category::ALL.iter().map(|&c| report.fraction(c)).sum();
        prop_assert!((fraction_sum - 1.0).abs() < 1e-12);
        // identity pairs are error-free
        let same = segmental::score("p", &gt, &gt).unwrap();
        prop_assert_eq!(same.error_frames(), 0);
    }

    #[test]
    fn swapping_tracks_swaps_paired_categories(gt in timeline(), pred in timeline()) {
        let fwd = segmental::score("p", &gt, &pred).unwrap();
        let rev = segmental::score("p", &pred, &gt).unwrap();
        prop_assert_eq!(fwd.frames(Category::Deletion), rev.frames(Category::Insertion));
        prop_assert_eq!(fwd.frames(Category::Underfill), rev.frames(Category::Overfill));
        prop_assert_eq!(fwd.frames(Category::Fragmentation), rev.frames(Category::Merge));
        prop_assert_eq!(fwd.frames(Category::TruePositive), rev.frames(Category::TruePositive));
        prop_assert_eq!(fwd.frames(Category::TrueNegative), rev.frames(Category::TrueNegative));
    }

    #[test]
    fn clip_extraction_conserves_frames(raw in raw_intervals(), clip_len in 1..80u64) {
        let left = Timeline::normalize(raw, HORIZON).unwrap();
        let annotation = TrialAnnotation::new(
            "p",
            TimeBase::default(),
            HORIZON,
            Side::Left,
            left.events().to_vec(),
            vec![],
        )
        .unwrap();
        let clips = clipper::extract_clips(&annotation, clip_len).unwrap();
        for clip in &clips {
            prop_assert_eq!(clip.length, clip_len);
            // label purity: every clip lies inside one source track
            let track = match clip.class_label {
                ClipClass::Investigate => left.clone(),
                ClipClass::Explore => left.complement(),
            };
            let clip_frames = clip.start_frame..clip.start_frame + clip.length;
            prop_assert!(clip_frames.clone().all(|f| track.contains_frame(f)));
        }
        let total: u64 = clips.iter().map(|c| c.length).sum();
        prop_assert!(total <= HORIZON);
    }

    #[test]
    fn split_partitions_any_manifest(n in 1..400usize, ratio in 0.05f64..0.95, seed in any::<u64>()) {
        let manifest: Vec<ClipRecord> = (0..n)
            .map(|k| ClipRecord {
                video_id: format!("v{}", k % 7),
                class_label: if k % 2 == 0 { ClipClass::Explore } else { ClipClass::Investigate },
                start_frame: k as u64 * 60,
                length: 60,
            })
            .collect();
        let assignment = clipper::split(manifest.clone(), ratio, seed).unwrap();
        prop_assert_eq!(assignment.train.len(), (ratio * n as f64).floor() as usize);
        let mut all: Vec<ClipRecord> = assignment
            .train
            .into_iter()
            .chain(assignment.validation)
            .collect();
        all.sort();
        let mut expected = manifest;
        expected.sort();
        prop_assert_eq!(all, expected);
    }
}
