use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::TrackHeadParams;
use crate::matrix::{squared_distance, Matrix};
use crate::{Error, Identity, Result};

/// Margins, loss weights and the detection score threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LossConfig {
    /// Triplet margin.
    pub m: f64,
    /// Target for the largest same-identity distance.
    pub m_pull: f64,
    /// Weight of the externally supplied classification loss.
    pub lambda1: f64,
    /// Weight of the externally supplied box regression loss.
    pub lambda2: f64,
    pub lambda3: f64,
    pub lambda4: f64,
    /// Detections scoring below this are ignored.
    pub score_threshold: f64,
}

impl Default for LossConfig {
    fn default() -> Self {
        Self {
            m: 5.0,
            m_pull: 1.0,
            lambda1: 1.0,
            lambda2: 1.0,
            lambda3: 0.2,
            lambda4: 0.2,
            score_threshold: 0.5,
        }
    }
}

impl LossConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Config(msg.into()));
        if !(self.m > 0.0 && self.m.is_finite()) {
            return bad("triplet margin m must be positive");
        }
        if !(self.m_pull >= 0.0 && self.m_pull.is_finite()) {
            return bad("pull margin m_pull must be non-negative");
        }
        let lambdas = [self.lambda1, self.lambda2, self.lambda3, self.lambda4];
        if lambdas.iter().any(|l| !(*l >= 0.0 && l.is_finite())) {
            return bad("loss weights must be non-negative");
        }
        if !(0.0..=1.0).contains(&self.score_threshold) {
            return bad("score threshold must lie in [0, 1]");
        }
        Ok(())
    }
}

/// ROI features with their identity labels, the unit of one training step.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledBatch {
    features: Vec<Vec<f64>>,
    identities: Vec<Identity>,
}

impl LabeledBatch {
    pub fn new(features: Vec<Vec<f64>>, identities: Vec<Identity>) -> Result<Self> {
        if features.len() != identities.len() {
            return Err(Error::DimensionMismatch {
                context: "batch identities",
                expected: features.len(),
                actual: identities.len(),
            });
        }
        if features.len() < 2 {
            return Err(Error::Config("a batch needs at least two entries".into()));
        }
        let dim = features[0].len();
        if let Some(f) = features.iter().find(|f| f.len() != dim) {
            return Err(Error::DimensionMismatch {
                context: "batch feature",
                expected: dim,
                actual: f.len(),
            });
        }
        Ok(Self { features, identities })
    }

    pub fn features(&self) -> &[Vec<f64>] {
        &self.features
    }

    pub fn identities(&self) -> &[Identity] {
        &self.identities
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn feature_dim(&self) -> usize {
        self.features[0].len()
    }

    /// True when some identity occurs at least twice.
    pub fn has_positive_pair(&self) -> bool {
        let mut seen = BTreeMap::new();
        self.identities.iter().any(|id| seen.insert(*id, ()).is_some())
    }
}

/// Squared Euclidean distance between every pair of embeddings.
pub fn pairwise_distances<E: AsRef<[f64]>>(embeddings: &[E]) -> Matrix {
    let n = embeddings.len();
    let mut d = Matrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let v = squared_distance(embeddings[i].as_ref(), embeddings[j].as_ref());
            d.set(i, j, v);
            d.set(j, i, v);
        }
    }
    d
}

/// Hardest positive and negative for one anchor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct HardTriplet {
    pub anchor: usize,
    pub positive: usize,
    pub negative: usize,
    /// `d(anchor, positive) - d(anchor, negative) + m`, before the hinge.
    pub margin_gap: f64,
}

/// Anchors that have at least one positive and one negative. Ties go to the
/// lowest index.
pub(crate) fn hard_triplets(d: &Matrix, ids: &[Identity], m: f64) -> Vec<HardTriplet> {
    let n = ids.len();
    let mut out = Vec::new();
    for a in 0..n {
        let mut pos: Option<(usize, f64)> = None;
        let mut neg: Option<(usize, f64)> = None;
        for j in 0..n {
            if j == a {
                continue;
            }
            let v = d.get(a, j);
            if ids[j] == ids[a] {
                if pos.is_none_or(|(_, best)| v > best) {
                    pos = Some((j, v));
                }
            } else if neg.is_none_or(|(_, best)| v < best) {
                neg = Some((j, v));
            }
        }
        if let (Some((p, dp)), Some((q, dn))) = (pos, neg) {
            out.push(HardTriplet {
                anchor: a,
                positive: p,
                negative: q,
                margin_gap: dp - dn + m,
            });
        }
    }
    out
}

/// Farthest same-identity pair for every identity with two or more members,
/// in ascending identity order.
pub(crate) fn farthest_pairs(d: &Matrix, ids: &[Identity]) -> Vec<(usize, usize, f64)> {
    let mut groups: BTreeMap<Identity, Vec<usize>> = BTreeMap::new();
    for (i, id) in ids.iter().enumerate() {
        groups.entry(*id).or_default().push(i);
    }
    groups
        .values()
        .filter(|members| members.len() >= 2)
        .map(|members| {
            let mut best = (members[0], members[1], d.get(members[0], members[1]));
            for (k, &i) in members.iter().enumerate() {
                for &j in &members[k + 1..] {
                    if d.get(i, j) > best.2 {
                        best = (i, j, d.get(i, j));
                    }
                }
            }
            best
        })
        .collect()
}

/// Batch-hard triplet loss: mean over valid anchors of
/// `max(max d_same - min d_diff + m, 0)`; zero when no anchor is valid.
pub fn triplet_loss(distances: &Matrix, identities: &[Identity], m: f64) -> f64 {
    let terms = hard_triplets(distances, identities, m);
    if terms.is_empty() {
        return 0.0;
    }
    terms.iter().map(|t| t.margin_gap.max(0.0)).sum::<f64>() / terms.len() as f64
}

/// Pull loss: mean over multi-member identities of `|max d_same - m_pull|`.
pub fn pull_loss(distances: &Matrix, identities: &[Identity], m_pull: f64) -> f64 {
    let pairs = farthest_pairs(distances, identities);
    if pairs.is_empty() {
        return 0.0;
    }
    pairs.iter().map(|&(_, _, v)| (v - m_pull).abs()).sum::<f64>() / pairs.len() as f64
}

/// Weighted sum of detector and track losses. Detector terms come from outside.
pub fn joint_loss(l_cls: f64, l_reg: f64, l_tri: f64, l_pull: f64, cfg: &LossConfig) -> f64 {
    cfg.lambda1 * l_cls + cfg.lambda2 * l_reg + cfg.lambda3 * l_tri + cfg.lambda4 * l_pull
}

/// Track-branch objective `λ3·L_tri + λ4·L_pull` of one batch.
pub fn batch_loss(params: &TrackHeadParams, batch: &LabeledBatch, cfg: &LossConfig) -> Result<f64> {
    let emb = params.forward_batch(batch.features())?;
    let d = pairwise_distances(&emb);
    let ids = batch.identities();
    Ok(joint_loss(
        0.0,
        0.0,
        triplet_loss(&d, ids, cfg.m),
        pull_loss(&d, ids, cfg.m_pull),
        cfg,
    ))
}
