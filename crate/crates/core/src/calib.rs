//! Distance-threshold selection on a labeled dev set.
//!
//! The threshold `h` minimizes `fp/gn + fn/gp`, where a pair is predicted
//! "same" when its distance is strictly below `h`.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A dev-set pair distance and whether the two detections are the same object.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LabeledDistance {
    pub distance: f64,
    pub is_same: bool,
}

impl LabeledDistance {
    pub fn same(distance: f64) -> Self {
        Self {
            distance,
            is_same: true,
        }
    }

    pub fn diff(distance: f64) -> Self {
        Self {
            distance,
            is_same: false,
        }
    }
}

/// Pair confusion counts with ground-truth positive/negative totals.
///
/// Counts produced here always satisfy `tp + fn = gp` and `tn + fp = gn`.
/// Externally reported tables do not always, so the fields stay public and
/// [`PairCounts::is_consistent`] reports it.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairCounts {
    pub tp: u64,
    pub tn: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub gp: u64,
    pub gn: u64,
}

impl PairCounts {
    /// Builds consistent counts, deriving `gp` and `gn`.
    pub fn from_confusion(tp: u64, tn: u64, fp: u64, fn_: u64) -> Self {
        Self {
            tp,
            tn,
            fp,
            fn_,
            gp: tp + fn_,
            gn: tn + fp,
        }
    }

    pub fn is_consistent(&self) -> bool {
        self.tp + self.fn_ == self.gp && self.tn + self.fp == self.gn
    }

    pub fn total(&self) -> u64 {
        self.tp + self.tn + self.fp + self.fn_
    }
}

impl core::ops::AddAssign for PairCounts {
    fn add_assign(&mut self, o: Self) {
        self.tp += o.tp;
        self.tn += o.tn;
        self.fp += o.fp;
        self.fn_ += o.fn_;
        self.gp += o.gp;
        self.gn += o.gn;
    }
}

/// `fp/gn + fn/gp`.
pub fn objective(c: &PairCounts) -> Result<f64> {
    if c.gp == 0 {
        return Err(Error::DegenerateDevSet("no ground-truth positive pairs"));
    }
    if c.gn == 0 {
        return Err(Error::DegenerateDevSet("no ground-truth negative pairs"));
    }
    Ok(c.fp as f64 / c.gn as f64 + c.fn_ as f64 / c.gp as f64)
}

/// Tallies predictions `distance < h` against the labels.
pub fn counts_at(pairs: &[LabeledDistance], h: f64) -> PairCounts {
    let mut c = PairCounts::default();
    for p in pairs {
        let predicted = p.distance < h;
        match (p.is_same, predicted) {
            (true, true) => c.tp += 1,
            (true, false) => c.fn_ += 1,
            (false, true) => c.fp += 1,
            (false, false) => c.tn += 1,
        }
    }
    c.gp = c.tp + c.fn_;
    c.gn = c.tn + c.fp;
    c
}

/// Which threshold wins when several reach the same objective.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TieBreak {
    /// Fewer pairs predicted "same".
    #[default]
    Smallest,
    Largest,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub h: f64,
    #[serde(flatten)]
    pub counts: PairCounts,
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub threshold: f64,
    pub objective: f64,
    pub counts: PairCounts,
    /// Every candidate in ascending order of `h`.
    pub table: Vec<SweepRow>,
}

/// Exact minimizer over candidates placed between consecutive distinct
/// distances, plus one below the minimum and one above the maximum.
/// Ties resolve to the smallest threshold.
pub fn sweep_threshold(pairs: &[LabeledDistance]) -> Result<Sweep> {
    sweep_threshold_with(pairs, TieBreak::Smallest)
}

pub fn sweep_threshold_with(pairs: &[LabeledDistance], tie: TieBreak) -> Result<Sweep> {
    if pairs.iter().any(|p| !(p.distance.is_finite() && p.distance >= 0.0)) {
        return Err(Error::Config("distances must be finite and non-negative".into()));
    }
    let gp = pairs.iter().filter(|p| p.is_same).count() as u64;
    let gn = pairs.len() as u64 - gp;
    if gp == 0 {
        return Err(Error::DegenerateDevSet("no same-identity pairs"));
    }
    if gn == 0 {
        return Err(Error::DegenerateDevSet("no different-identity pairs"));
    }

    let mut sorted: Vec<LabeledDistance> = pairs.to_vec();
    sorted.sort_by(|a, b| a.distance.partial_cmp(&b.distance).unwrap_or(Ordering::Equal));
    let lo = sorted[0].distance;
    let hi = sorted[sorted.len() - 1].distance;

    let mut candidates = vec![0.5 * lo];
    let mut prev = lo;
    for p in &sorted[1..] {
        if p.distance > prev {
            let mut mid = prev + 0.5 * (p.distance - prev);
            if mid <= prev {
                mid = p.distance;
            }
            candidates.push(mid);
            prev = p.distance;
        }
    }
    candidates.push(hi + 1.0);

    // one pass: `below` counts sorted entries with distance < h
    let mut table = Vec::with_capacity(candidates.len());
    let (mut tp, mut fp, mut below) = (0u64, 0u64, 0usize);
    for h in candidates {
        while below < sorted.len() && sorted[below].distance < h {
            if sorted[below].is_same {
                tp += 1;
            } else {
                fp += 1;
            }
            below += 1;
        }
        let counts = PairCounts {
            tp,
            tn: gn - fp,
            fp,
            fn_: gp - tp,
            gp,
            gn,
        };
        table.push(SweepRow {
            h,
            counts,
            objective: objective(&counts)?,
        });
    }

    let mut best = 0;
    for (k, row) in table.iter().enumerate() {
        let better = match tie {
            TieBreak::Smallest => row.objective < table[best].objective,
            TieBreak::Largest => row.objective <= table[best].objective,
        };
        if better {
            best = k;
        }
    }
    Ok(Sweep {
        threshold: table[best].h,
        objective: table[best].objective,
        counts: table[best].counts,
        table,
    })
}

/// Same- and different-pair counts over equal-width bins spanning `[0, max]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceHistogram {
    /// `bin_count + 1` bin edges.
    pub edges: Vec<f64>,
    pub same: Vec<u64>,
    pub diff: Vec<u64>,
}

impl DistanceHistogram {
    pub fn bin_count(&self) -> usize {
        self.same.len()
    }
}

pub fn distance_histogram(pairs: &[LabeledDistance], bin_count: usize) -> Result<DistanceHistogram> {
    if bin_count == 0 {
        return Err(Error::Config("histogram needs at least one bin".into()));
    }
    let max = pairs.iter().map(|p| p.distance).fold(0.0, f64::max);
    let width = max / bin_count as f64;
    let edges = (0..=bin_count).map(|k| width * k as f64).collect();
    let mut same = vec![0u64; bin_count];
    let mut diff = vec![0u64; bin_count];
    for p in pairs {
        let bin = if width > 0.0 {
            ((p.distance / width) as usize).min(bin_count - 1)
        } else {
            0
        };
        if p.is_same {
            same[bin] += 1;
        } else {
            diff[bin] += 1;
        }
    }
    Ok(DistanceHistogram { edges, same, diff })
}
