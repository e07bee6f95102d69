//! Prediction-to-ground-truth assignment, AP/mAP, MOTA and pair accuracy.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::assoc::TrackRecord;
use crate::calib::PairCounts;
use crate::{iou, BoundingBox, Error, FrameRecord, Identity, Result, TrackId};

/// Ground-truth box tagged with its image slot in a (possibly concatenated) image.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlotGtBox {
    #[serde(rename = "box")]
    pub bbox: BoundingBox,
    pub id: Identity,
    pub image_slot: u8,
}

/// Outcome for one predicted box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Assignment {
    Assigned {
        gt_index: usize,
        id: Identity,
        image_slot: u8,
        iou: f64,
    },
    /// Confidence below the score threshold.
    Filtered,
    /// No ground truth above the IoU threshold, or lost to a better prediction.
    Abandoned,
}

impl Assignment {
    pub fn identity(&self) -> Option<(Identity, u8)> {
        match *self {
            Assignment::Assigned { id, image_slot, .. } => Some((id, image_slot)),
            _ => None,
        }
    }
}

/// Per-prediction assignments, parallel to the input predictions.
#[derive(Debug, Clone, PartialEq)]
pub struct AssignmentResult(pub Vec<Assignment>);

impl AssignmentResult {
    /// `(prediction index, identity, slot)` of every kept prediction.
    pub fn assigned(&self) -> impl Iterator<Item = (usize, Identity, u8)> + '_ {
        self.0
            .iter()
            .enumerate()
            .filter_map(|(i, a)| a.identity().map(|(id, s)| (i, id, s)))
    }

    pub fn gt_of(&self, pred: usize) -> Option<usize> {
        match self.0[pred] {
            Assignment::Assigned { gt_index, .. } => Some(gt_index),
            _ => None,
        }
    }
}

/// Label predicted boxes with ground-truth identities.
///
/// Predictions scoring below `score_threshold` are dropped. Each survivor
/// claims its highest-IoU ground truth when that IoU exceeds `iou_min`; if
/// several claim the same ground truth only the highest-IoU one keeps it.
/// Ties resolve to the lower index.
pub fn assign_predictions(
    preds: &[(BoundingBox, f64)],
    gts: &[SlotGtBox],
    score_threshold: f64,
    iou_min: f64,
) -> AssignmentResult {
    let mut out = vec![Assignment::Abandoned; preds.len()];
    let mut owner: Vec<Option<(usize, f64)>> = vec![None; gts.len()];
    for (i, (bbox, score)) in preds.iter().enumerate() {
        if *score < score_threshold {
            out[i] = Assignment::Filtered;
            continue;
        }
        let best =
            gts.iter()
                .enumerate()
                .map(|(g, gt)| (g, iou(bbox, &gt.bbox)))
                .fold(None::<(usize, f64)>, |acc, (g, v)| match acc {
                    Some((_, b)) if v <= b => acc,
                    _ => Some((g, v)),
                });
        if let Some((g, v)) = best {
            if v > iou_min && owner[g].is_none_or(|(_, held)| v > held) {
                owner[g] = Some((i, v));
            }
        }
    }
    for (g, own) in owner.iter().enumerate() {
        if let Some((i, v)) = *own {
            out[i] = Assignment::Assigned {
                gt_index: g,
                id: gts[g].id,
                image_slot: gts[g].image_slot,
                iou: v,
            };
        }
    }
    AssignmentResult(out)
}

/// A scored detection in image `image`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoredBox {
    pub image: usize,
    pub bbox: BoundingBox,
    pub score: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImageBox {
    pub image: usize,
    pub bbox: BoundingBox,
}

/// How the precision-recall curve is integrated.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ApInterpolation {
    /// Area under the monotone precision envelope at every recall step.
    #[default]
    AllPoint,
    /// Mean of the envelope at recall 0, 0.1, ..., 1.0.
    ElevenPoint,
}

/// AP with all-point interpolation.
pub fn average_precision(preds: &[ScoredBox], gts: &[ImageBox], iou_t: f64) -> Result<f64> {
    average_precision_with(preds, gts, iou_t, ApInterpolation::AllPoint)
}

/// Score-ranked greedy matching at `IoU >= iou_t`, each prediction taking the
/// best still-unmatched ground truth of its image. Equal scores keep input order.
pub fn average_precision_with(
    preds: &[ScoredBox],
    gts: &[ImageBox],
    iou_t: f64,
    interp: ApInterpolation,
) -> Result<f64> {
    if gts.is_empty() {
        return Err(Error::UndefinedMetric("average precision needs ground truth"));
    }
    let mut order: Vec<usize> = (0..preds.len()).collect();
    order.sort_by(|&a, &b| preds[b].score.partial_cmp(&preds[a].score).unwrap_or(Ordering::Equal));

    let mut taken = vec![false; gts.len()];
    let mut tp = 0usize;
    let mut recall = Vec::with_capacity(preds.len());
    let mut precision = Vec::with_capacity(preds.len());
    for (rank, &p) in order.iter().enumerate() {
        let pred = &preds[p];
        let mut best: Option<(usize, f64)> = None;
        for (g, gt) in gts.iter().enumerate() {
            if taken[g] || gt.image != pred.image {
                continue;
            }
            let v = iou(&pred.bbox, &gt.bbox);
            if best.is_none_or(|(_, b)| v > b) {
                best = Some((g, v));
            }
        }
        if let Some((g, v)) = best {
            if v >= iou_t {
                taken[g] = true;
                tp += 1;
            }
        }
        recall.push(tp as f64 / gts.len() as f64);
        precision.push(tp as f64 / (rank + 1) as f64);
    }

    // precision envelope: best precision at any equal-or-higher recall
    for k in (0..precision.len().saturating_sub(1)).rev() {
        precision[k] = precision[k].max(precision[k + 1]);
    }
    let ap = match interp {
        ApInterpolation::AllPoint => {
            let mut prev_r = 0.0;
            let mut area = 0.0;
            for (r, p) in recall.iter().zip(&precision) {
                area += (r - prev_r) * p;
                prev_r = *r;
            }
            area
        }
        ApInterpolation::ElevenPoint => {
            (0..=10)
                .map(|k| {
                    let r = k as f64 / 10.0;
                    recall
                        .iter()
                        .position(|&x| x >= r - 1e-12)
                        .map_or(0.0, |i| precision[i])
                })
                .sum::<f64>()
                / 11.0
        }
    };
    Ok(ap)
}

/// IoU thresholds 0.50, 0.55, ..., 0.95.
pub fn map_iou_thresholds() -> [f64; 10] {
    core::array::from_fn(|k| 0.5 + 0.05 * k as f64)
}

/// Mean of [`average_precision`] over the ten thresholds of [`map_iou_thresholds`].
pub fn mean_ap(preds: &[ScoredBox], gts: &[ImageBox]) -> Result<f64> {
    let ts = map_iou_thresholds();
    let mut sum = 0.0;
    for t in ts {
        sum += average_precision(preds, gts, t)?;
    }
    Ok(sum / ts.len() as f64)
}

/// Error totals summed over all frames.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MotCounts {
    pub fp: u64,
    pub miss: u64,
    pub mismatch: u64,
    pub gt_total: u64,
}

/// `1 - (miss + fp + mismatch) / gt_total`. Can be negative.
pub fn mota(c: &MotCounts) -> Result<f64> {
    if c.gt_total == 0 {
        return Err(Error::UndefinedMetric("MOTA needs at least one ground-truth object"));
    }
    Ok(1.0 - (c.miss + c.fp + c.mismatch) as f64 / c.gt_total as f64)
}

/// What a ground-truth object's current track ID is compared against.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MismatchRule {
    /// The track ID it was matched to in the immediately preceding frame.
    /// An object reappearing after a miss starts fresh.
    #[default]
    PreviousFrame,
    /// The last track ID it was ever matched to, across gaps.
    LastAssociated,
}

fn group_by_frame(tracks: &[TrackRecord]) -> BTreeMap<u64, Vec<&TrackRecord>> {
    let mut by_frame: BTreeMap<u64, Vec<&TrackRecord>> = BTreeMap::new();
    for t in tracks {
        by_frame.entry(t.frame_index).or_default().push(t);
    }
    by_frame
}

fn frame_targets(frame: &FrameRecord) -> Vec<SlotGtBox> {
    frame
        .gt_boxes
        .iter()
        .map(|g| SlotGtBox {
            bbox: g.bbox,
            id: g.id,
            image_slot: 0,
        })
        .collect()
}

/// `(identity, track id)` of every track record matched to ground truth in one frame.
fn matched_in_frame(
    frame: &FrameRecord,
    recs: &[&TrackRecord],
    iou_min: f64,
) -> (AssignmentResult, Vec<(Identity, TrackId)>) {
    let preds: Vec<(BoundingBox, f64)> = recs.iter().map(|r| (r.bbox, r.confidence)).collect();
    let result = assign_predictions(&preds, &frame_targets(frame), f64::NEG_INFINITY, iou_min);
    let matched = result.assigned().map(|(i, id, _)| (id, recs[i].track_id)).collect();
    (result, matched)
}

/// Per-frame false positives, misses and ID mismatches of a tracker output.
///
/// Tracks are matched to ground truth frame by frame with the same rule as
/// [`assign_predictions`]. Track records whose frame has no ground-truth
/// record count as false positives.
pub fn mot_counts(tracks: &[TrackRecord], frames: &[FrameRecord], iou_min: f64, rule: MismatchRule) -> MotCounts {
    let mut by_frame = group_by_frame(tracks);
    let mut c = MotCounts::default();
    let mut last: BTreeMap<Identity, TrackId> = BTreeMap::new();
    for frame in frames {
        let recs = by_frame.remove(&frame.frame_index).unwrap_or_default();
        let (_, matched) = matched_in_frame(frame, &recs, iou_min);
        c.gt_total += frame.gt_boxes.len() as u64;
        c.fp += (recs.len() - matched.len()) as u64;
        c.miss += (frame.gt_boxes.len() - matched.len()) as u64;
        let mut current = BTreeMap::new();
        for (id, track) in matched {
            if last.get(&id).is_some_and(|prev| *prev != track) {
                c.mismatch += 1;
            }
            current.insert(id, track);
        }
        match rule {
            MismatchRule::PreviousFrame => last = current,
            MismatchRule::LastAssociated => last.extend(current),
        }
    }
    c.fp += by_frame.values().map(|v| v.len() as u64).sum::<u64>();
    c
}

/// Cross-frame pair confusion between consecutive frames.
///
/// Every pair of ground-truth-matched detections from frames `t` and `t + 1`
/// is a positive if both carry the same identity; it is predicted positive if
/// both carry the same track ID.
pub fn pair_counts(tracks: &[TrackRecord], frames: &[FrameRecord], iou_min: f64) -> PairCounts {
    let by_frame = group_by_frame(tracks);
    let labeled: Vec<Vec<(Identity, TrackId)>> = frames
        .iter()
        .map(|f| {
            let recs = by_frame.get(&f.frame_index).cloned().unwrap_or_default();
            matched_in_frame(f, &recs, iou_min).1
        })
        .collect();
    let mut c = PairCounts::default();
    for w in labeled.windows(2) {
        for &(id_a, tr_a) in &w[0] {
            for &(id_b, tr_b) in &w[1] {
                let same = id_a == id_b;
                let linked = tr_a == tr_b;
                match (same, linked) {
                    (true, true) => c.tp += 1,
                    (true, false) => c.fn_ += 1,
                    (false, true) => c.fp += 1,
                    (false, false) => c.tn += 1,
                }
            }
        }
    }
    c.gp = c.tp + c.fn_;
    c.gn = c.tn + c.fp;
    c
}

/// `(tp + tn) / (tp + tn + fp + fn)`.
pub fn pair_accuracy(c: &PairCounts) -> Result<f64> {
    let total = c.total();
    if total == 0 {
        return Err(Error::UndefinedMetric("pair accuracy needs at least one pair"));
    }
    Ok((c.tp + c.tn) as f64 / total as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::GtBox;
    use proptest::prelude::*;

    fn bb(x1: f64, y1: f64, x2: f64, y2: f64) -> BoundingBox {
        BoundingBox::new(x1, y1, x2, y2).unwrap()
    }

    fn gt(b: BoundingBox, id: Identity) -> SlotGtBox {
        SlotGtBox {
            bbox: b,
            id,
            image_slot: 0,
        }
    }

    #[test]
    fn exact_prediction_is_assigned() {
        let b = bb(0.0, 0.0, 10.0, 10.0);
        let r = assign_predictions(&[(b, 0.9)], &[gt(b, 7)], 0.5, 0.5);
        assert_eq!(r.0[0].identity(), Some((7, 0)));
    }

    #[test]
    fn highest_iou_claim_wins() {
        let g = bb(0.0, 0.0, 10.0, 10.0);
        let p_hi = bb(0.0, 0.0, 10.0, 8.0); // IoU 0.8
        let p_lo = bb(0.0, 0.0, 10.0, 6.0); // IoU 0.6
        assert!((iou(&p_hi, &g) - 0.8).abs() < 1e-12);
        assert!((iou(&p_lo, &g) - 0.6).abs() < 1e-12);
        let r = assign_predictions(&[(p_lo, 0.9), (p_hi, 0.9)], &[gt(g, 3)], 0.5, 0.5);
        assert_eq!(r.0[0], Assignment::Abandoned);
        assert_eq!(r.0[1].identity(), Some((3, 0)));
    }

    #[test]
    fn low_iou_and_low_score() {
        let g = bb(0.0, 0.0, 10.0, 10.0);
        let p = bb(0.0, 0.0, 10.0, 4.0); // IoU 0.4
        let r = assign_predictions(&[(p, 0.9), (g, 0.3)], &[gt(g, 1)], 0.5, 0.5);
        assert_eq!(r.0, vec![Assignment::Abandoned, Assignment::Filtered]);
        // exactly at iou_min is not enough
        let p = bb(0.0, 0.0, 10.0, 5.0);
        let r = assign_predictions(&[(p, 0.9)], &[gt(g, 1)], 0.5, 0.5);
        assert_eq!(r.0[0], Assignment::Abandoned);
    }

    #[test]
    fn each_gt_claimed_once_per_slot() {
        let g0 = bb(0.0, 0.0, 10.0, 10.0);
        let g1 = bb(100.0, 0.0, 110.0, 10.0);
        let gts = [
            gt(g0, 5),
            SlotGtBox {
                bbox: g1,
                id: 5,
                image_slot: 1,
            },
        ];
        let r = assign_predictions(&[(g0, 0.8), (g1, 0.8)], &gts, 0.5, 0.5);
        let got: Vec<_> = r.assigned().collect();
        assert_eq!(got, vec![(0, 5, 0), (1, 5, 1)]);
    }

    fn sb(image: usize, b: BoundingBox, score: f64) -> ScoredBox {
        ScoredBox { image, bbox: b, score }
    }

    #[test]
    fn ap_examples() {
        let g = bb(0.0, 0.0, 10.0, 10.0);
        let gts = [ImageBox { image: 0, bbox: g }];
        assert_eq!(average_precision(&[sb(0, g, 0.9)], &gts, 0.5).unwrap(), 1.0);
        let fp = bb(50.0, 50.0, 60.0, 60.0);
        let ap = average_precision(&[sb(0, fp, 0.95), sb(0, g, 0.9)], &gts, 0.5).unwrap();
        assert_eq!(ap, 0.5);
        // TP ranked first: the trailing FP does not lower AP
        let ap = average_precision(&[sb(0, fp, 0.5), sb(0, g, 0.9)], &gts, 0.5).unwrap();
        assert_eq!(ap, 1.0);
        assert!(matches!(
            average_precision(&[sb(0, g, 0.9)], &[], 0.5),
            Err(Error::UndefinedMetric(_))
        ));
    }

    #[test]
    fn ap_wrong_image_is_false_positive() {
        let g = bb(0.0, 0.0, 10.0, 10.0);
        let gts = [ImageBox { image: 1, bbox: g }];
        assert_eq!(average_precision(&[sb(0, g, 0.9)], &gts, 0.5).unwrap(), 0.0);
    }

    #[test]
    fn eleven_point_interpolation() {
        let g = bb(0.0, 0.0, 10.0, 10.0);
        let gts = [ImageBox { image: 0, bbox: g }];
        let fp = bb(50.0, 50.0, 60.0, 60.0);
        let ap = average_precision_with(
            &[sb(0, fp, 0.95), sb(0, g, 0.9)],
            &gts,
            0.5,
            ApInterpolation::ElevenPoint,
        )
        .unwrap();
        assert!((ap - 0.5).abs() < 1e-12);
    }

    #[test]
    fn map_exact_and_empty() {
        let boxes = [
            bb(0.0, 0.0, 10.0, 10.0),
            bb(20.0, 5.0, 40.0, 30.0),
            bb(3.0, 3.0, 9.0, 9.5),
        ];
        let gts: Vec<ImageBox> = boxes
            .iter()
            .enumerate()
            .map(|(k, b)| ImageBox { image: k % 2, bbox: *b })
            .collect();
        let preds: Vec<ScoredBox> = gts.iter().map(|g| sb(g.image, g.bbox, 0.7)).collect();
        for t in map_iou_thresholds() {
            assert_eq!(average_precision(&preds, &gts, t).unwrap(), 1.0);
        }
        assert_eq!(mean_ap(&preds, &gts).unwrap(), 1.0);
        assert_eq!(mean_ap(&[], &gts).unwrap(), 0.0);
        let ts = map_iou_thresholds();
        assert!((ts[0] - 0.5).abs() < 1e-15 && (ts[9] - 0.95).abs() < 1e-12);
    }

    #[test]
    fn mota_values() {
        let c = |fp, miss, mismatch| MotCounts {
            fp,
            miss,
            mismatch,
            gt_total: 667,
        };
        assert!((mota(&c(604, 8, 1)).unwrap() - 0.0810).abs() < 5e-5);
        assert!((mota(&c(585, 8, 1)).unwrap() - 0.1094).abs() < 5e-5);
        assert!((mota(&c(671, 7, 1)).unwrap() + 0.0180).abs() < 5e-5);
        assert_eq!(mota(&c(0, 0, 0)).unwrap(), 1.0);
        assert!(mota(&MotCounts::default()).is_err());
    }

    #[test]
    fn pair_accuracy_values() {
        let pa = |tp, tn, fp, fn_| pair_accuracy(&PairCounts::from_confusion(tp, tn, fp, fn_)).unwrap();
        // printed as percentages with two decimals
        assert!((100.0 * pa(5176, 6098, 2, 16) - 99.84).abs() < 0.005);
        assert!((100.0 * pa(645, 4729, 1036, 432) - 78.54).abs() < 0.005);
        assert!((100.0 * pa(575, 4350, 1496, 495) - 71.21).abs() < 0.005);
        assert!(pair_accuracy(&PairCounts::default()).is_err());
    }

    fn frame(idx: u64, gts: &[(BoundingBox, Identity)]) -> FrameRecord {
        FrameRecord {
            frame_index: idx,
            camera_id: 0,
            detections: vec![],
            gt_boxes: gts.iter().map(|&(bbox, id)| GtBox { bbox, id }).collect(),
        }
    }

    fn rec(idx: u64, track: u64, b: BoundingBox) -> TrackRecord {
        TrackRecord {
            frame_index: idx,
            track_id: TrackId(track),
            bbox: b,
            confidence: 0.9,
        }
    }

    #[test]
    fn perfect_tracking() {
        let a = bb(0.0, 0.0, 10.0, 10.0);
        let b = bb(30.0, 0.0, 40.0, 10.0);
        let frames: Vec<_> = (0..3).map(|t| frame(t, &[(a, 1), (b, 2)])).collect();
        let tracks: Vec<_> = (0..3).flat_map(|t| [rec(t, 10, a), rec(t, 11, b)]).collect();
        let c = mot_counts(&tracks, &frames, 0.5, MismatchRule::default());
        assert_eq!(
            c,
            MotCounts {
                fp: 0,
                miss: 0,
                mismatch: 0,
                gt_total: 6
            }
        );
        assert_eq!(mota(&c).unwrap(), 1.0);
        let p = pair_counts(&tracks, &frames[..2], 0.5);
        assert_eq!(p, PairCounts::from_confusion(2, 2, 0, 0));
    }

    #[test]
    fn single_switch_is_one_mismatch() {
        let a = bb(0.0, 0.0, 10.0, 10.0);
        let frames: Vec<_> = (0..3).map(|t| frame(t, &[(a, 1)])).collect();
        let tracks = [rec(0, 4, a), rec(1, 9, a), rec(2, 9, a)];
        for rule in [MismatchRule::PreviousFrame, MismatchRule::LastAssociated] {
            assert_eq!(mot_counts(&tracks, &frames, 0.5, rule).mismatch, 1);
        }
    }

    #[test]
    fn gap_then_new_id_depends_on_rule() {
        let a = bb(0.0, 0.0, 10.0, 10.0);
        let frames: Vec<_> = (0..3).map(|t| frame(t, &[(a, 1)])).collect();
        let tracks = [rec(0, 4, a), rec(2, 9, a)];
        let prev = mot_counts(&tracks, &frames, 0.5, MismatchRule::PreviousFrame);
        assert_eq!((prev.miss, prev.mismatch), (1, 0));
        let clear = mot_counts(&tracks, &frames, 0.5, MismatchRule::LastAssociated);
        assert_eq!((clear.miss, clear.mismatch), (1, 1));
    }

    #[test]
    fn extra_box_per_frame_is_false_positive() {
        let a = bb(0.0, 0.0, 10.0, 10.0);
        let junk = bb(200.0, 200.0, 220.0, 220.0);
        let frames: Vec<_> = (0..10).map(|t| frame(t, &[(a, 1)])).collect();
        let tracks: Vec<_> = (0..10).flat_map(|t| [rec(t, 0, a), rec(t, 100 + t, junk)]).collect();
        let c = mot_counts(&tracks, &frames, 0.5, MismatchRule::default());
        assert_eq!((c.fp, c.miss, c.mismatch, c.gt_total), (10, 0, 0, 10));
        // records for a frame without ground truth are false positives too
        let mut more = tracks.clone();
        more.push(rec(99, 0, a));
        assert_eq!(mot_counts(&more, &frames, 0.5, MismatchRule::default()).fp, 11);
    }

    #[test]
    fn pair_counts_cases() {
        let a = bb(0.0, 0.0, 10.0, 10.0);
        let b = bb(30.0, 0.0, 40.0, 10.0);
        let frames: Vec<_> = (0..2).map(|t| frame(t, &[(a, 1), (b, 2)])).collect();
        let fresh = [rec(0, 0, a), rec(0, 1, b), rec(1, 2, a), rec(1, 3, b)];
        let c = pair_counts(&fresh, &frames, 0.5);
        assert_eq!((c.tp, c.fn_, c.gp), (0, 2, 2));

        let single: Vec<_> = (0..2).map(|t| frame(t, &[(a, 1)])).collect();
        let c = pair_counts(&[rec(0, 5, a), rec(1, 5, a)], &single, 0.5);
        assert_eq!((c.tp, c.gp, c.gn), (1, 1, 0));
    }

    proptest! {
        #[test]
        fn ap_depends_only_on_ranking(scores in proptest::collection::vec(0.01..1.0f64, 6), shift in -3.0..3.0f64, scale in 0.1..10.0f64) {
            let g = [bb(0.0, 0.0, 10.0, 10.0), bb(20.0, 0.0, 30.0, 10.0), bb(0.0, 20.0, 10.0, 30.0)];
            let gts: Vec<ImageBox> = g.iter().map(|b| ImageBox { image: 0, bbox: *b }).collect();
            let boxes = [g[0], g[1], bb(0.0, 0.0, 10.0, 4.0), bb(50.0, 50.0, 60.0, 60.0), g[2], bb(21.0, 0.0, 30.0, 10.0)];
            let preds: Vec<ScoredBox> = boxes.iter().zip(&scores).map(|(b, s)| sb(0, *b, *s)).collect();
            let warped: Vec<ScoredBox> = preds.iter().map(|p| sb(0, p.bbox, (scale * p.score).exp() + shift)).collect();
            for t in [0.5, 0.75] {
                prop_assert_eq!(average_precision(&preds, &gts, t).unwrap(), average_precision(&warped, &gts, t).unwrap());
            }
        }

        #[test]
        fn mota_strictly_decreasing(fp in 0u64..100, miss in 0u64..100, mm in 0u64..100) {
            let base = MotCounts { fp, miss, mismatch: mm, gt_total: 50 };
            let m = mota(&base).unwrap();
            let more_fp = mota(&MotCounts { fp: fp + 1, ..base }).unwrap();
            let more_miss = mota(&MotCounts { miss: miss + 1, ..base }).unwrap();
            let more_mm = mota(&MotCounts { mismatch: mm + 1, ..base }).unwrap();
            prop_assert!(more_fp < m && more_miss < m && more_mm < m);
        }
    }
}
