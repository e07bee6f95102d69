//! Training-sample construction and the synthetic scenario generator.
//!
//! Two frames are placed side by side, the second shifted right by the width
//! of the first, so one sample can hold the same vehicle twice. Multi-camera
//! samples pair two frames from different cameras that share a vehicle.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use rand::distr::{Distribution, Uniform};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Normal;
use serde::{Deserialize, Serialize};

use crate::metrics::{assign_predictions, SlotGtBox};
use crate::trackhead::LabeledBatch;
use crate::{BoundingBox, DetectionRecord, Error, FrameRecord, GtBox, Identity, Result};

/// Two frames composed into one wide image.
#[derive(Debug, Clone, PartialEq)]
pub struct ConcatSample {
    pub detections: Vec<DetectionRecord>,
    pub gt_boxes: Vec<SlotGtBox>,
    /// Width of the slot-0 image; slot-1 x-coordinates are offset by it.
    pub width_first: f64,
    /// Some identity appears in both slots.
    pub has_positive_pairs: bool,
}

fn shift_frame(frame: &FrameRecord, dx: f64, slot: u8) -> Result<(Vec<DetectionRecord>, Vec<SlotGtBox>)> {
    let dets = frame
        .detections
        .iter()
        .map(|d| {
            Ok(DetectionRecord {
                bbox: d.bbox.translate(dx, 0.0)?,
                image_slot: slot,
                ..d.clone()
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let gts = frame
        .gt_boxes
        .iter()
        .map(|g| {
            Ok(SlotGtBox {
                bbox: g.bbox.translate(dx, 0.0)?,
                id: g.id,
                image_slot: slot,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((dets, gts))
}

fn concat_frames(a: &FrameRecord, b: &FrameRecord, width_a: f64) -> Result<ConcatSample> {
    if !(width_a > 0.0 && width_a.is_finite()) {
        return Err(Error::Config("image width must be positive".into()));
    }
    let (mut detections, mut gt_boxes) = shift_frame(a, 0.0, 0)?;
    let (d1, g1) = shift_frame(b, width_a, 1)?;
    detections.extend(d1);
    gt_boxes.extend(g1);
    let first: BTreeSet<Identity> = a.gt_boxes.iter().map(|g| g.id).collect();
    let has_positive_pairs = b.gt_boxes.iter().any(|g| first.contains(&g.id));
    Ok(ConcatSample {
        detections,
        gt_boxes,
        width_first: width_a,
        has_positive_pairs,
    })
}

/// Places `b` to the right of `a`. The frames must come from one camera with
/// consecutive frame indices.
pub fn concat_neighbor_frames(a: &FrameRecord, b: &FrameRecord, width_a: f64) -> Result<ConcatSample> {
    if a.camera_id != b.camera_id {
        return Err(Error::Config(alloc::format!(
            "neighbouring frames must share a camera, got {} and {}",
            a.camera_id,
            b.camera_id
        )));
    }
    if b.frame_index != a.frame_index + 1 {
        return Err(Error::NonConsecutiveFrames {
            first: a.frame_index,
            second: b.frame_index,
        });
    }
    concat_frames(a, b, width_a)
}

/// Concatenates every adjacent frame pair of a sequence.
pub fn neighbor_samples(frames: &[FrameRecord], width: f64) -> Result<Vec<ConcatSample>> {
    frames
        .windows(2)
        .map(|w| concat_neighbor_frames(&w[0], &w[1], width))
        .collect()
}

/// First `(camera, position in the frame list)` at which each identity is
/// labeled, per camera.
pub type IdentityIndex = BTreeMap<Identity, BTreeMap<i64, usize>>;

pub fn identity_index(frames: &[FrameRecord]) -> IdentityIndex {
    let mut index = IdentityIndex::new();
    for (pos, f) in frames.iter().enumerate() {
        for g in &f.gt_boxes {
            index.entry(g.id).or_default().entry(f.camera_id).or_insert(pos);
        }
    }
    index
}

/// One sample per identity and unordered camera pair in which it appears,
/// pairing its first occurrence in each camera. Identities seen by a single
/// camera contribute nothing.
pub fn build_mtmc_pairs(frames: &[FrameRecord], index: &IdentityIndex, width: f64) -> Result<Vec<ConcatSample>> {
    let mut out = Vec::new();
    for cams in index.values() {
        let occ: Vec<usize> = cams.values().copied().collect();
        for (k, &a) in occ.iter().enumerate() {
            for &b in &occ[k + 1..] {
                let (fa, fb) = (
                    frames
                        .get(a)
                        .ok_or_else(|| Error::Invariant("identity index out of range".into()))?,
                    frames
                        .get(b)
                        .ok_or_else(|| Error::Invariant("identity index out of range".into()))?,
                );
                out.push(concat_frames(fa, fb, width)?);
            }
        }
    }
    Ok(out)
}

/// Labels each sample's detections through [`assign_predictions`] and keeps
/// samples with at least two labeled detections as training batches.
pub fn samples_to_batches(samples: &[ConcatSample], score_threshold: f64, iou_min: f64) -> Vec<LabeledBatch> {
    samples
        .iter()
        .filter_map(|s| {
            let preds: Vec<(BoundingBox, f64)> = s.detections.iter().map(|d| (d.bbox, d.confidence)).collect();
            let assigned = assign_predictions(&preds, &s.gt_boxes, score_threshold, iou_min);
            let (feats, ids): (Vec<_>, Vec<_>) = assigned
                .assigned()
                .map(|(i, id, _)| (s.detections[i].feature.clone(), id))
                .unzip();
            LabeledBatch::new(feats, ids).ok()
        })
        .collect()
}

/// Settings of the synthetic single-camera scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    pub identities: usize,
    pub frames: usize,
    pub feature_dim: usize,
    /// Euclidean distance between any two identity archetypes.
    pub archetype_spread: f64,
    /// Root-mean-square norm of the per-detection feature noise.
    pub noise_sigma: f64,
    /// Probability that a visible object produces no detection in a frame.
    pub dropout: f64,
    pub image_width: f64,
    pub image_height: f64,
    /// Largest per-frame displacement along each axis, in pixels.
    pub max_speed: f64,
    pub min_box_size: f64,
    pub max_box_size: f64,
    /// Detection confidences are drawn uniformly from `[min_confidence, 1)`.
    pub min_confidence: f64,
    pub camera_id: i64,
    pub first_frame_index: u64,
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            identities: 5,
            frames: 50,
            feature_dim: 16,
            archetype_spread: 10.0,
            noise_sigma: 0.5,
            dropout: 0.05,
            image_width: 1920.0,
            image_height: 1080.0,
            max_speed: 8.0,
            min_box_size: 40.0,
            max_box_size: 160.0,
            min_confidence: 0.6,
            camera_id: 0,
            first_frame_index: 0,
            seed: 0,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.into()));
        if self.identities == 0 {
            return bad("identities must be positive");
        }
        if self.feature_dim < self.identities {
            return bad("feature_dim must be at least the identity count");
        }
        if !(self.archetype_spread > 0.0 && self.archetype_spread.is_finite()) {
            return bad("archetype_spread must be positive");
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return bad("noise_sigma must be non-negative");
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return bad("dropout must lie in [0, 1)");
        }
        if !(self.min_box_size > 0.0 && self.min_box_size <= self.max_box_size) {
            return bad("box sizes must satisfy 0 < min_box_size <= max_box_size");
        }
        if !(self.max_box_size < self.image_width && self.max_box_size < self.image_height) {
            return bad("boxes must fit inside the image");
        }
        if !(self.max_speed >= 0.0 && self.max_speed.is_finite()) {
            return bad("max_speed must be non-negative");
        }
        if !(0.0..1.0).contains(&self.min_confidence) {
            return bad("min_confidence must lie in [0, 1)");
        }
        Ok(())
    }
}

/// A simulated sequence and the per-identity feature archetypes behind it.
#[derive(Debug, Clone, PartialEq)]
pub struct Simulation {
    pub frames: Vec<FrameRecord>,
    pub archetypes: Vec<Vec<f64>>,
}

/// Scaled simplex vertices: archetype `k` is `spread/√2 · e_k`, so every
/// pair of archetypes is exactly `spread` apart.
pub fn simplex_archetypes(identities: usize, feature_dim: usize, spread: f64) -> Vec<Vec<f64>> {
    let scale = spread / core::f64::consts::SQRT_2;
    (0..identities)
        .map(|k| {
            let mut v = alloc::vec![0.0; feature_dim];
            v[k] = scale;
            v
        })
        .collect()
}

/// Generates a sequence using simplex archetypes.
pub fn simulate(cfg: &SimConfig) -> Result<Simulation> {
    cfg.validate()?;
    let arch = simplex_archetypes(cfg.identities, cfg.feature_dim, cfg.archetype_spread);
    simulate_with_archetypes(cfg, arch)
}

/// Generates a sequence around given archetypes (one per identity).
///
/// Every identity is visible in every frame, moving linearly and clamped to
/// the image. Each visible object yields a detection with probability
/// `1 - dropout`; its box equals the ground-truth box and its feature is the
/// archetype plus isotropic Gaussian noise.
pub fn simulate_with_archetypes(cfg: &SimConfig, archetypes: Vec<Vec<f64>>) -> Result<Simulation> {
    cfg.validate()?;
    if archetypes.len() != cfg.identities {
        return Err(Error::DimensionMismatch {
            context: "archetype count",
            expected: cfg.identities,
            actual: archetypes.len(),
        });
    }
    if let Some(a) = archetypes.iter().find(|a| a.len() != cfg.feature_dim) {
        return Err(Error::DimensionMismatch {
            context: "archetype dimension",
            expected: cfg.feature_dim,
            actual: a.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let per_component = cfg.noise_sigma / libm::sqrt(cfg.feature_dim as f64);
    let noise = Normal::new(0.0, per_component).map_err(|_| Error::Config("invalid noise".into()))?;
    let size = Uniform::new_inclusive(cfg.min_box_size, cfg.max_box_size)
        .map_err(|_| Error::Config("invalid box size range".into()))?;
    let speed =
        Uniform::new_inclusive(-cfg.max_speed, cfg.max_speed).map_err(|_| Error::Config("invalid speed".into()))?;

    struct Mover {
        x: f64,
        y: f64,
        w: f64,
        h: f64,
        vx: f64,
        vy: f64,
    }
    let mut movers: Vec<Mover> = (0..cfg.identities)
        .map(|_| {
            let w = size.sample(&mut rng);
            let h = size.sample(&mut rng);
            Mover {
                x: rng.random_range(0.0..=cfg.image_width - w),
                y: rng.random_range(0.0..=cfg.image_height - h),
                w,
                h,
                vx: speed.sample(&mut rng),
                vy: speed.sample(&mut rng),
            }
        })
        .collect();

    let mut frames = Vec::with_capacity(cfg.frames);
    for t in 0..cfg.frames {
        let mut detections = Vec::new();
        let mut gt_boxes = Vec::with_capacity(cfg.identities);
        for (id, m) in movers.iter_mut().enumerate() {
            if t > 0 {
                m.x = (m.x + m.vx).clamp(0.0, cfg.image_width - m.w);
                m.y = (m.y + m.vy).clamp(0.0, cfg.image_height - m.h);
            }
            let bbox = BoundingBox::new(m.x, m.y, m.x + m.w, m.y + m.h)?;
            let id = id as Identity;
            gt_boxes.push(GtBox { bbox, id });
            let dropped = rng.random::<f64>() < cfg.dropout;
            // draw noise and score even for dropped detections so dropout does
            // not shift the rest of the random stream
            let feature: Vec<f64> = archetypes[id as usize]
                .iter()
                .map(|a| {
                    a + if per_component > 0.0 {
                        noise.sample(&mut rng)
                    } else {
                        0.0
                    }
                })
                .collect();
            let confidence = rng.random_range(cfg.min_confidence..1.0);
            if !dropped {
                detections.push(DetectionRecord::new(bbox, confidence, feature).with_identity(id));
            }
        }
        frames.push(FrameRecord {
            frame_index: cfg.first_frame_index + t as u64,
            camera_id: cfg.camera_id,
            detections,
            gt_boxes,
        });
    }
    Ok(Simulation { frames, archetypes })
}
