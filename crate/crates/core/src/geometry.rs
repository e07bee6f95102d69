//! Boxes, per-detection records and per-frame containers.

use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Ground-truth object identity.
pub type Identity = u32;

/// Identifier issued by the tracker.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TrackId(pub u64);

impl fmt::Display for TrackId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Axis-aligned box in pixel coordinates, corner form.
///
/// Always satisfies `x1 < x2`, `y1 < y2` with finite coordinates; zero-area
/// boxes are rejected. Serialized as `[x1, y1, x2, y2]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 4]", into = "[f64; 4]")]
pub struct BoundingBox {
    x1: f64,
    y1: f64,
    x2: f64,
    y2: f64,
}

impl BoundingBox {
    pub fn new(x1: f64, y1: f64, x2: f64, y2: f64) -> Result<Self> {
        let invalid = |reason| Error::InvalidBox { x1, y1, x2, y2, reason };
        if !(x1.is_finite() && y1.is_finite() && x2.is_finite() && y2.is_finite()) {
            return Err(invalid("non-finite coordinate"));
        }
        if x1 >= x2 {
            return Err(invalid("x1 must be less than x2"));
        }
        if y1 >= y2 {
            return Err(invalid("y1 must be less than y2"));
        }
        Ok(Self { x1, y1, x2, y2 })
    }

    pub fn x1(&self) -> f64 {
        self.x1
    }
    pub fn y1(&self) -> f64 {
        self.y1
    }
    pub fn x2(&self) -> f64 {
        self.x2
    }
    pub fn y2(&self) -> f64 {
        self.y2
    }

    pub fn width(&self) -> f64 {
        self.x2 - self.x1
    }

    pub fn height(&self) -> f64 {
        self.y2 - self.y1
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn to_array(&self) -> [f64; 4] {
        [self.x1, self.y1, self.x2, self.y2]
    }

    /// Shifts the box; fails only if the result overflows to a non-finite value.
    pub fn translate(&self, dx: f64, dy: f64) -> Result<Self> {
        Self::new(self.x1 + dx, self.y1 + dy, self.x2 + dx, self.y2 + dy)
    }

    pub fn iou(&self, other: &BoundingBox) -> f64 {
        iou(self, other)
    }
}

impl TryFrom<[f64; 4]> for BoundingBox {
    type Error = Error;

    fn try_from(v: [f64; 4]) -> Result<Self> {
        Self::new(v[0], v[1], v[2], v[3])
    }
}

impl From<BoundingBox> for [f64; 4] {
    fn from(b: BoundingBox) -> Self {
        b.to_array()
    }
}

/// Intersection over union. Returns 0 for disjoint or edge-touching boxes.
pub fn iou(a: &BoundingBox, b: &BoundingBox) -> f64 {
    if a == b {
        return 1.0;
    }
    let iw = a.x2.min(b.x2) - a.x1.max(b.x1);
    let ih = a.y2.min(b.y2) - a.y1.max(b.y1);
    if iw <= 0.0 || ih <= 0.0 {
        return 0.0;
    }
    let inter = iw * ih;
    let union = a.area() + b.area() - inter;
    (inter / union).clamp(0.0, 1.0)
}

/// A detector output: box, score, ROI feature vector and optional labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionRecord {
    #[serde(rename = "box")]
    pub bbox: BoundingBox,
    pub confidence: f64,
    pub feature: Vec<f64>,
    #[serde(rename = "gt_id", default, skip_serializing_if = "Option::is_none")]
    pub gt_identity: Option<Identity>,
    /// 0 for the first image of a concatenated pair, 1 for the second.
    #[serde(default, skip_serializing_if = "is_zero")]
    pub image_slot: u8,
}

fn is_zero(v: &u8) -> bool {
    *v == 0
}

impl DetectionRecord {
    pub fn new(bbox: BoundingBox, confidence: f64, feature: Vec<f64>) -> Self {
        Self {
            bbox,
            confidence,
            feature,
            gt_identity: None,
            image_slot: 0,
        }
    }

    pub fn with_identity(mut self, id: Identity) -> Self {
        self.gt_identity = Some(id);
        self
    }

    /// Checks the confidence range, slot range and feature finiteness.
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.confidence) {
            return Err(Error::Config(alloc::format!(
                "confidence {} outside [0, 1]",
                self.confidence
            )));
        }
        if self.image_slot > 1 {
            return Err(Error::Config(alloc::format!(
                "image slot {} outside {{0, 1}}",
                self.image_slot
            )));
        }
        if self.feature.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("non-finite feature value".into()));
        }
        Ok(())
    }
}

/// Labeled ground-truth box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GtBox {
    #[serde(rename = "box")]
    pub bbox: BoundingBox,
    pub id: Identity,
}

/// One video frame: detector output plus ground truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameRecord {
    pub frame_index: u64,
    pub camera_id: i64,
    pub detections: Vec<DetectionRecord>,
    pub gt_boxes: Vec<GtBox>,
}

impl FrameRecord {
    /// Feature dimension of the first detection, if any.
    pub fn feature_dim(&self) -> Option<usize> {
        self.detections.first().map(|d| d.feature.len())
    }
}

/// Checks that frame indices strictly increase and every feature has the
/// same dimension. Returns that dimension (`None` if there are no detections).
pub fn validate_sequence(frames: &[FrameRecord]) -> Result<Option<usize>> {
    let mut dim = None;
    for pair in frames.windows(2) {
        if pair[1].frame_index <= pair[0].frame_index && pair[1].camera_id == pair[0].camera_id {
            return Err(Error::Config(alloc::format!(
                "frame_index must strictly increase: {} then {}",
                pair[0].frame_index,
                pair[1].frame_index
            )));
        }
    }
    for f in frames {
        for d in &f.detections {
            d.validate()?;
            match dim {
                None => dim = Some(d.feature.len()),
                Some(n) if n != d.feature.len() => {
                    return Err(Error::DimensionMismatch {
                        context: "detection feature",
                        expected: n,
                        actual: d.feature.len(),
                    })
                }
                _ => {}
            }
        }
    }
    Ok(dim)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bb(x1: f64, y1: f64, x2: f64, y2: f64) -> BoundingBox {
        BoundingBox::new(x1, y1, x2, y2).unwrap()
    }

    #[test]
    fn identical_boxes() {
        let a = bb(3.0, 4.0, 10.5, 20.0);
        assert_eq!(iou(&a, &a), 1.0);
    }

    #[test]
    fn disjoint_boxes() {
        assert_eq!(iou(&bb(0.0, 0.0, 1.0, 1.0), &bb(5.0, 5.0, 6.0, 6.0)), 0.0);
        // touching edges share no area
        assert_eq!(iou(&bb(0.0, 0.0, 1.0, 1.0), &bb(1.0, 0.0, 2.0, 1.0)), 0.0);
    }

    #[test]
    fn half_overlap_is_one_third() {
        let v = iou(&bb(0.0, 0.0, 10.0, 10.0), &bb(5.0, 0.0, 15.0, 10.0));
        assert!((v - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn degenerate_boxes_rejected() {
        assert!(BoundingBox::new(1.0, 1.0, 1.0, 5.0).is_err());
        assert!(BoundingBox::new(1.0, 5.0, 3.0, 5.0).is_err());
        assert!(BoundingBox::new(2.0, 0.0, 1.0, 1.0).is_err());
        assert!(BoundingBox::new(f64::NAN, 0.0, 1.0, 1.0).is_err());
        assert!(BoundingBox::new(0.0, 0.0, f64::INFINITY, 1.0).is_err());
    }

    #[test]
    fn sequence_validation() {
        let d = |n| DetectionRecord::new(bb(0.0, 0.0, 1.0, 1.0), 0.9, alloc::vec![0.0; n]);
        let f = |i, dets| FrameRecord {
            frame_index: i,
            camera_id: 0,
            detections: dets,
            gt_boxes: Vec::new(),
        };
        assert_eq!(
            validate_sequence(&[f(0, alloc::vec![d(3)]), f(1, alloc::vec![d(3)])]),
            Ok(Some(3))
        );
        assert!(validate_sequence(&[f(0, alloc::vec![d(3)]), f(1, alloc::vec![d(4)])]).is_err());
        assert!(validate_sequence(&[f(1, alloc::vec![]), f(1, alloc::vec![])]).is_err());
        let mut bad = d(3);
        bad.confidence = 1.5;
        assert!(validate_sequence(&[f(0, alloc::vec![bad])]).is_err());
    }

    fn arb_box() -> impl Strategy<Value = BoundingBox> {
        (-500.0..500.0f64, -500.0..500.0f64, 0.5..300.0f64, 0.5..300.0f64)
            .prop_map(|(x, y, w, h)| bb(x, y, x + w, y + h))
    }

    proptest! {
        #[test]
        fn iou_symmetric_and_bounded(a in arb_box(), b in arb_box()) {
            let ab = iou(&a, &b);
            prop_assert_eq!(ab, iou(&b, &a));
            prop_assert!((0.0..=1.0).contains(&ab));
            prop_assert_eq!(iou(&a, &a), 1.0);
        }

        #[test]
        fn iou_translation_invariant(a in arb_box(), b in arb_box(), dx in -100.0..100.0f64, dy in -100.0..100.0f64) {
            let before = iou(&a, &b);
            let after = iou(&a.translate(dx, dy).unwrap(), &b.translate(dx, dy).unwrap());
            prop_assert!((before - after).abs() < 1e-9);
        }
    }
}
