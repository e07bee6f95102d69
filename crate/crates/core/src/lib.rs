//! Track-branch embedding, association and evaluation primitives.
//!
//! The crate is `no_std` and only needs `alloc`. It covers:
//!
//! - [`geometry`]: boxes, detection and frame records, IoU.
//! - [`trackhead`]: the two-layer embedding head, batch-hard triplet and pull
//!   losses, the analytic gradient, the cosine learning-rate schedule and the
//!   training loop.
//! - [`assoc`]: frame-to-frame distance matrices, mutual-minimum matching and
//!   track-ID bookkeeping.
//! - [`calib`]: distance-threshold selection and distance histograms.
//! - [`metrics`]: prediction-to-ground-truth assignment, AP/mAP, MOTA and
//!   pair accuracy.
//! - [`data`]: frame concatenation, multi-camera pair construction and the
//!   synthetic scenario generator.
//!
//! File formats, pipelines and the command-line tool live in the `unitrack`
//! crate.

#![cfg_attr(not(test), no_std)]
#![allow(clippy::needless_range_loop)]

extern crate alloc;

pub mod assoc;
pub mod calib;
pub mod data;
mod error;
pub mod geometry;
mod matrix;
pub mod metrics;
pub mod trackhead;

pub use error::{Error, Result};
pub use geometry::{iou, BoundingBox, DetectionRecord, FrameRecord, GtBox, Identity, TrackId};
pub use matrix::Matrix;
