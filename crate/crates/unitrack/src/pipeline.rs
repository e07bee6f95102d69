//! End-to-end steps shared by the CLI and tests: training-set construction,
//! threshold calibration, tracking and evaluation over frame files.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use unitrack_core::assoc::{to_track_records, track_sequence, TrackRecord};
use unitrack_core::calib::{
    distance_histogram, sweep_threshold_with, DistanceHistogram, LabeledDistance, PairCounts, Sweep, TieBreak,
};
use unitrack_core::data::{concat_neighbor_frames, samples_to_batches};
use unitrack_core::metrics::{
    assign_predictions, mean_ap, mot_counts, mota, pair_accuracy, pair_counts, ImageBox, MismatchRule, MotCounts,
    ScoredBox, SlotGtBox,
};
use unitrack_core::trackhead::{train, LabeledBatch, LossConfig, TrackHeadParams, TrainConfig, TrainOutcome};
use unitrack_core::{BoundingBox, FrameRecord, Identity};

use crate::{Error, Result};

pub const DEFAULT_IOU_MIN: f64 = 0.5;

/// Contents of a `train` config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainSettings {
    pub loss: LossConfig,
    pub train: TrainConfig,
    /// Horizontal offset of the second frame in a concatenated pair. Raised
    /// to the widest box edge in the data when smaller.
    pub image_width: f64,
    pub iou_min: f64,
}

impl Default for TrainSettings {
    fn default() -> Self {
        Self {
            loss: LossConfig::default(),
            train: TrainConfig::default(),
            image_width: 1920.0,
            iou_min: DEFAULT_IOU_MIN,
        }
    }
}

fn by_camera(frames: &[FrameRecord]) -> BTreeMap<i64, Vec<&FrameRecord>> {
    let mut out: BTreeMap<i64, Vec<&FrameRecord>> = BTreeMap::new();
    for f in frames {
        out.entry(f.camera_id).or_default().push(f);
    }
    out
}

/// Concatenates every pair of consecutive frames per camera and labels the
/// detections against ground truth. Pairs across a gap in frame indices are
/// skipped.
pub fn training_batches(frames: &[FrameRecord], settings: &TrainSettings) -> Result<Vec<LabeledBatch>> {
    let widest = frames
        .iter()
        .flat_map(|f| {
            f.detections
                .iter()
                .map(|d| d.bbox.x2())
                .chain(f.gt_boxes.iter().map(|g| g.bbox.x2()))
        })
        .fold(0.0, f64::max);
    let width = settings.image_width.max(widest);
    let mut samples = Vec::new();
    for seq in by_camera(frames).values() {
        for w in seq.windows(2) {
            if w[1].frame_index == w[0].frame_index + 1 {
                samples.push(concat_neighbor_frames(w[0], w[1], width)?);
            }
        }
    }
    Ok(samples_to_batches(
        &samples,
        settings.loss.score_threshold,
        settings.iou_min,
    ))
}

/// Builds the training set and trains. Refuses data with fewer than two
/// labeled identities, where the triplet loss is undefined.
pub fn train_on_frames(frames: &[FrameRecord], settings: &TrainSettings) -> Result<TrainOutcome> {
    let batches = training_batches(frames, settings)?;
    let ids: BTreeSet<Identity> = batches.iter().flat_map(|b| b.identities().iter().copied()).collect();
    if ids.len() < 2 {
        return Err(Error::Invalid(format!(
            "training needs at least two labeled identities, found {}",
            ids.len()
        )));
    }
    Ok(train(&batches, &settings.loss, &settings.train)?)
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

/// Embeddings of the detections matched to ground truth, with their identities.
fn labeled_embeddings(
    frame: &FrameRecord,
    params: &TrackHeadParams,
    score_threshold: f64,
    iou_min: f64,
) -> Result<Vec<(Identity, Vec<f64>)>> {
    let preds: Vec<(BoundingBox, f64)> = frame.detections.iter().map(|d| (d.bbox, d.confidence)).collect();
    let assigned = assign_predictions(&preds, &frame_targets(frame), score_threshold, iou_min);
    assigned
        .assigned()
        .map(|(i, id, _)| Ok((id, params.forward(&frame.detections[i].feature)?)))
        .collect()
}

/// Labeled distances of all cross-frame detection pairs between consecutive
/// frames of each camera.
pub fn dev_pairs(
    frames: &[FrameRecord],
    params: &TrackHeadParams,
    score_threshold: f64,
    iou_min: f64,
) -> Result<Vec<LabeledDistance>> {
    let mut pairs = Vec::new();
    for seq in by_camera(frames).values() {
        let labeled = seq
            .iter()
            .map(|f| labeled_embeddings(f, params, score_threshold, iou_min))
            .collect::<Result<Vec<_>>>()?;
        for w in labeled.windows(2) {
            for (ia, ea) in &w[0] {
                for (ib, eb) in &w[1] {
                    let d: f64 = ea.iter().zip(eb).map(|(x, y)| (x - y) * (x - y)).sum();
                    pairs.push(LabeledDistance {
                        distance: d,
                        is_same: ia == ib,
                    });
                }
            }
        }
    }
    Ok(pairs)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CalibSettings {
    pub score_threshold: f64,
    pub iou_min: f64,
    pub bins: usize,
    pub tie_break: TieBreak,
}

impl Default for CalibSettings {
    fn default() -> Self {
        Self {
            score_threshold: LossConfig::default().score_threshold,
            iou_min: DEFAULT_IOU_MIN,
            bins: 20,
            tie_break: TieBreak::Smallest,
        }
    }
}

/// Summary written by `calibrate`; `track` reads `threshold` from it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationSummary {
    pub threshold: f64,
    pub objective: f64,
    pub counts: PairCounts,
    pub same_pairs: u64,
    pub diff_pairs: u64,
}

pub struct Calibration {
    pub summary: CalibrationSummary,
    pub sweep: Sweep,
    pub histogram: DistanceHistogram,
}

pub fn calibrate(frames: &[FrameRecord], params: &TrackHeadParams, settings: &CalibSettings) -> Result<Calibration> {
    let pairs = dev_pairs(frames, params, settings.score_threshold, settings.iou_min)?;
    let sweep = sweep_threshold_with(&pairs, settings.tie_break)?;
    let histogram = distance_histogram(&pairs, settings.bins)?;
    let same = pairs.iter().filter(|p| p.is_same).count() as u64;
    Ok(Calibration {
        summary: CalibrationSummary {
            threshold: sweep.threshold,
            objective: sweep.objective,
            counts: sweep.counts,
            same_pairs: same,
            diff_pairs: pairs.len() as u64 - same,
        },
        sweep,
        histogram,
    })
}

/// Tracks a single-camera sequence and returns one record per kept detection.
pub fn track(
    frames: &[FrameRecord],
    params: &TrackHeadParams,
    threshold: f64,
    score_threshold: f64,
) -> Result<Vec<TrackRecord>> {
    if by_camera(frames).len() > 1 {
        return Err(Error::Invalid("tracking expects frames from a single camera".into()));
    }
    if let Some(dim) = frames.iter().find_map(|f| f.feature_dim()) {
        if dim != params.dims().input {
            return Err(Error::Invalid(format!(
                "parameters expect {}-dimensional features, frames carry {dim}",
                params.dims().input
            )));
        }
    }
    let assigned = track_sequence(frames, params, threshold, score_threshold)?;
    Ok(to_track_records(frames, &assigned))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvalSettings {
    pub iou_min: f64,
    pub mismatch_rule: MismatchRule,
}

impl Default for EvalSettings {
    fn default() -> Self {
        Self {
            iou_min: DEFAULT_IOU_MIN,
            mismatch_rule: MismatchRule::PreviousFrame,
        }
    }
}

/// Evaluation report. Metrics whose inputs are missing or empty are `null`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub mota: Option<f64>,
    pub pair_accuracy: Option<f64>,
    pub map: Option<f64>,
    pub mot_counts: Option<MotCounts>,
    pub pair_counts: Option<PairCounts>,
    pub config: EvalSettings,
}

/// Counts supplied directly instead of computed from a run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CountsFixture {
    pub mot: Option<MotCounts>,
    pub pair: Option<PairCounts>,
}

pub fn evaluate(tracks: &[TrackRecord], frames: &[FrameRecord], settings: &EvalSettings) -> Result<EvalReport> {
    let mc = mot_counts(tracks, frames, settings.iou_min, settings.mismatch_rule);
    let pc = pair_counts(tracks, frames, settings.iou_min);

    let image_of: BTreeMap<u64, usize> = frames.iter().enumerate().map(|(k, f)| (f.frame_index, k)).collect();
    let preds: Vec<ScoredBox> = tracks
        .iter()
        .filter_map(|t| {
            image_of.get(&t.frame_index).map(|&image| ScoredBox {
                image,
                bbox: t.bbox,
                score: t.confidence,
            })
        })
        .collect();
    let gts: Vec<ImageBox> = frames
        .iter()
        .enumerate()
        .flat_map(|(image, f)| f.gt_boxes.iter().map(move |g| ImageBox { image, bbox: g.bbox }))
        .collect();
    let map = if gts.is_empty() {
        None
    } else {
        Some(mean_ap(&preds, &gts)?)
    };

    Ok(EvalReport {
        mota: mota(&mc).ok(),
        pair_accuracy: pair_accuracy(&pc).ok(),
        map,
        mot_counts: Some(mc),
        pair_counts: Some(pc),
        config: settings.clone(),
    })
}

pub fn report_from_counts(fixture: &CountsFixture, settings: &EvalSettings) -> Result<EvalReport> {
    let mota = fixture.mot.as_ref().map(mota).transpose()?;
    let pair_accuracy = fixture.pair.as_ref().map(pair_accuracy).transpose()?;
    Ok(EvalReport {
        mota,
        pair_accuracy,
        map: None,
        mot_counts: fixture.mot,
        pair_counts: fixture.pair,
        config: settings.clone(),
    })
}
