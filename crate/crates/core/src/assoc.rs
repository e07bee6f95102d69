//! Frame-to-frame association by mutual-minimum embedding distance.
//!
//! A current-frame detection links to a former-frame detection only when each
//! is the other's nearest neighbour and their distance is below a threshold.
//! Only the immediately preceding frame is remembered; a vehicle missed for a
//! frame comes back under a fresh track ID.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::matrix::{squared_distance, Matrix};
use crate::trackhead::TrackHeadParams;
use crate::{BoundingBox, Error, FrameRecord, Result, TrackId};

/// `M × N` distances, rows = current frame, columns = former frame.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix(Matrix);

impl DistanceMatrix {
    /// Wraps a matrix whose entries must all be finite and non-negative.
    pub fn new(m: Matrix) -> Result<Self> {
        if m.as_slice().iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::Config("distances must be finite and non-negative".into()));
        }
        Ok(Self(m))
    }

    pub fn rows(&self) -> usize {
        self.0.rows()
    }

    pub fn cols(&self) -> usize {
        self.0.cols()
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.0.get(r, c)
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.0
    }
}

/// Squared Euclidean distance from every current embedding to every former one.
pub fn distance_matrix<C, F>(current: &[C], former: &[F]) -> Result<DistanceMatrix>
where
    C: AsRef<[f64]>,
    F: AsRef<[f64]>,
{
    let dim = current
        .first()
        .map(|c| c.as_ref().len())
        .or_else(|| former.first().map(|f| f.as_ref().len()));
    let mut m = Matrix::zeros(current.len(), former.len());
    for (i, c) in current.iter().enumerate() {
        for (j, f) in former.iter().enumerate() {
            let (c, f) = (c.as_ref(), f.as_ref());
            if c.len() != f.len() || Some(c.len()) != dim {
                return Err(Error::DimensionMismatch {
                    context: "embedding",
                    expected: dim.unwrap_or(0),
                    actual: if c.len() != f.len() { f.len() } else { c.len() },
                });
            }
            m.set(i, j, squared_distance(c, f));
        }
    }
    DistanceMatrix::new(m)
}

/// Mutual-minimum matching under threshold `h`.
///
/// Row `i` matches column `j` iff `j` is the row minimum, `i` is the column
/// minimum and `d(i, j) < h`. Ties resolve to the lowest index.
pub fn match_frames(d: &DistanceMatrix, h: f64) -> Vec<Option<usize>> {
    let (rows, cols) = (d.rows(), d.cols());
    let col_argmin: Vec<usize> = (0..cols)
        .map(|j| (1..rows).fold(0, |best, i| if d.get(i, j) < d.get(best, j) { i } else { best }))
        .collect();
    (0..rows)
        .map(|i| {
            if cols == 0 {
                return None;
            }
            let j = (1..cols).fold(0, |best, j| if d.get(i, j) < d.get(i, best) { j } else { best });
            (col_argmin[j] == i && d.get(i, j) < h).then_some(j)
        })
        .collect()
}

/// The former frame's embeddings and track IDs plus the ID counter.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrackState {
    former: Vec<Vec<f64>>,
    former_ids: Vec<TrackId>,
    next_id: u64,
}

impl TrackState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn former_embeddings(&self) -> &[Vec<f64>] {
        &self.former
    }

    pub fn former_ids(&self) -> &[TrackId] {
        &self.former_ids
    }

    /// Smallest ID that has not been issued yet.
    pub fn next_id(&self) -> u64 {
        self.next_id
    }

    /// Gives matched detections their former track ID and the rest fresh IDs,
    /// then makes the current frame the former frame.
    pub fn update(&mut self, embeddings: Vec<Vec<f64>>, matches: &[Option<usize>]) -> Result<Vec<TrackId>> {
        if matches.len() != embeddings.len() {
            return Err(Error::Invariant(alloc::format!(
                "{} matches for {} detections",
                matches.len(),
                embeddings.len()
            )));
        }
        let mut used = alloc::vec![false; self.former_ids.len()];
        let mut ids = Vec::with_capacity(matches.len());
        for m in matches {
            let id = match *m {
                Some(j) => {
                    let slot = used
                        .get_mut(j)
                        .ok_or_else(|| Error::Invariant(alloc::format!("match references missing column {j}")))?;
                    if *slot {
                        return Err(Error::Invariant(alloc::format!("column {j} matched twice")));
                    }
                    *slot = true;
                    self.former_ids[j]
                }
                None => {
                    let id = TrackId(self.next_id);
                    self.next_id += 1;
                    id
                }
            };
            ids.push(id);
        }
        self.former = embeddings;
        self.former_ids = ids.clone();
        Ok(ids)
    }
}

/// Functional form of [`TrackState::update`].
pub fn update_tracks(
    mut state: TrackState,
    embeddings: Vec<Vec<f64>>,
    matches: &[Option<usize>],
) -> Result<(TrackState, Vec<TrackId>)> {
    let ids = state.update(embeddings, matches)?;
    Ok((state, ids))
}

/// One tracked detection, as written to track output files.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackRecord {
    pub frame_index: u64,
    pub track_id: TrackId,
    #[serde(rename = "box")]
    pub bbox: BoundingBox,
    pub confidence: f64,
}

/// Embeds, matches and labels one frame at a time.
#[derive(Debug, Clone)]
pub struct Tracker<'a> {
    params: &'a TrackHeadParams,
    threshold: f64,
    score_threshold: f64,
    state: TrackState,
}

impl<'a> Tracker<'a> {
    pub fn new(params: &'a TrackHeadParams, threshold: f64, score_threshold: f64) -> Self {
        Self {
            params,
            threshold,
            score_threshold,
            state: TrackState::new(),
        }
    }

    pub fn state(&self) -> &TrackState {
        &self.state
    }

    /// Returns `(detection index, track id)` for every detection scoring at
    /// least the score threshold.
    pub fn step(&mut self, frame: &FrameRecord) -> Result<Vec<(usize, TrackId)>> {
        let kept: Vec<usize> = frame
            .detections
            .iter()
            .enumerate()
            .filter(|(_, d)| d.confidence >= self.score_threshold)
            .map(|(i, _)| i)
            .collect();
        let emb = kept
            .iter()
            .map(|&i| self.params.forward(&frame.detections[i].feature))
            .collect::<Result<Vec<_>>>()?;
        let d = distance_matrix(&emb, self.state.former_embeddings())?;
        let matches = match_frames(&d, self.threshold);
        let ids = self.state.update(emb, &matches)?;
        Ok(kept.into_iter().zip(ids).collect())
    }
}

/// Runs a [`Tracker`] over a single-camera sequence.
pub fn track_sequence(
    frames: &[FrameRecord],
    params: &TrackHeadParams,
    threshold: f64,
    score_threshold: f64,
) -> Result<Vec<Vec<(usize, TrackId)>>> {
    let mut tracker = Tracker::new(params, threshold, score_threshold);
    frames.iter().map(|f| tracker.step(f)).collect()
}

/// Flattens per-frame assignments into output records.
pub fn to_track_records(frames: &[FrameRecord], assigned: &[Vec<(usize, TrackId)>]) -> Vec<TrackRecord> {
    frames
        .iter()
        .zip(assigned)
        .flat_map(|(f, a)| {
            a.iter().map(move |&(i, id)| TrackRecord {
                frame_index: f.frame_index,
                track_id: id,
                bbox: f.detections[i].bbox,
                confidence: f.detections[i].confidence,
            })
        })
        .collect()
}
