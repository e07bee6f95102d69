//! On-disk formats.
//!
//! - Frame files: JSON lines, one [`FrameRecord`] per line.
//! - Track files: JSON lines, one [`TrackRecord`] per line.
//! - Parameter files: one JSON document, see [`ParamsFile`].
//! - Sweep, histogram and loss-trace tables: CSV with a header row.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use unitrack_core::assoc::TrackRecord;
use unitrack_core::calib::{DistanceHistogram, SweepRow};
use unitrack_core::trackhead::{HeadDims, LossConfig, TrackHeadParams};
use unitrack_core::FrameRecord;

use crate::{Error, Result};

/// Path next to `path` with its extension replaced, e.g. `run.jsonl` →
/// `run.manifest.json` for `suffix = "manifest.json"`.
pub fn sibling(path: &Path, suffix: &str) -> PathBuf {
    path.with_extension(suffix)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

fn parse_line<T: DeserializeOwned>(path: &Path, line_no: usize, line: &str) -> Result<T> {
    let mut de = serde_json::Deserializer::from_str(line);
    serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let field = e.path().to_string();
        Error::Parse {
            path: path.to_owned(),
            line: line_no,
            field: if field.is_empty() || field == "." {
                "<record>".into()
            } else {
                field
            },
            message: e.into_inner().to_string(),
        }
    })
}

fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<(usize, T)>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (k, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push((k + 1, parse_line(path, k + 1, &line)?));
    }
    Ok(out)
}

fn write_jsonl<T: Serialize>(items: &[T], path: &Path) -> Result<()> {
    let mut w = create(path)?;
    for item in items {
        serde_json::to_writer(&mut w, item).map_err(|e| Error::Json {
            path: path.to_owned(),
            source: e,
        })?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Reads a frame file, checking confidences, slots and that every feature
/// vector has the dimension of the first one.
pub fn load_frames(path: impl AsRef<Path>) -> Result<Vec<FrameRecord>> {
    let path = path.as_ref();
    let mut dim: Option<usize> = None;
    let mut frames = Vec::new();
    for (line, frame) in read_jsonl::<FrameRecord>(path)? {
        for (k, d) in frame.detections.iter().enumerate() {
            let bad = |field: &str, message: String| Error::Parse {
                path: path.to_owned(),
                line,
                field: format!("detections[{k}].{field}"),
                message,
            };
            match dim {
                None => dim = Some(d.feature.len()),
                Some(n) if n != d.feature.len() => {
                    return Err(bad(
                        "feature",
                        format!("expected dimension {n}, got {}", d.feature.len()),
                    ))
                }
                _ => {}
            }
            if !(0.0..=1.0).contains(&d.confidence) {
                return Err(bad("confidence", format!("{} outside [0, 1]", d.confidence)));
            }
            if d.image_slot > 1 {
                return Err(bad("image_slot", format!("{} outside {{0, 1}}", d.image_slot)));
            }
        }
        frames.push(frame);
    }
    Ok(frames)
}

pub fn save_frames(frames: &[FrameRecord], path: impl AsRef<Path>) -> Result<()> {
    write_jsonl(frames, path.as_ref())
}

pub fn load_tracks(path: impl AsRef<Path>) -> Result<Vec<TrackRecord>> {
    Ok(read_jsonl(path.as_ref())?.into_iter().map(|(_, t)| t).collect())
}

pub fn save_tracks(tracks: &[TrackRecord], path: impl AsRef<Path>) -> Result<()> {
    write_jsonl(tracks, path.as_ref())
}

pub const PARAMS_FORMAT: &str = "unitrack-trackhead";
pub const PARAMS_VERSION: u32 = 1;

/// Serialized track-head parameters.
///
/// Weight arrays are row-major: `w1` is `hidden × input`, `w2` is
/// `embed × hidden`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamsFile {
    pub format: String,
    pub version: u32,
    pub dims: HeadDims,
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: Vec<f64>,
    pub seed: u64,
    pub loss: LossConfig,
}

impl ParamsFile {
    pub fn new(params: &TrackHeadParams, seed: u64, loss: LossConfig) -> Self {
        Self {
            format: PARAMS_FORMAT.into(),
            version: PARAMS_VERSION,
            dims: params.dims(),
            w1: params.w1().to_vec(),
            b1: params.b1().to_vec(),
            w2: params.w2().to_vec(),
            b2: params.b2().to_vec(),
            seed,
            loss,
        }
    }

    pub fn params(&self) -> Result<TrackHeadParams> {
        Ok(TrackHeadParams::from_parts(
            self.dims,
            self.w1.clone(),
            self.b1.clone(),
            self.w2.clone(),
            self.b2.clone(),
        )?)
    }
}

pub fn save_json<T: Serialize>(value: &T, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| Error::Json {
        path: path.to_owned(),
        source: e,
    })?;
    w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn load_json<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<T> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut de = serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(&mut de).map_err(|e| Error::Parse {
        path: path.to_owned(),
        line: e.inner().line(),
        field: e.path().to_string(),
        message: e.into_inner().to_string(),
    })
}

pub fn save_params(file: &ParamsFile, path: impl AsRef<Path>) -> Result<()> {
    save_json(file, path)
}

pub fn load_params(path: impl AsRef<Path>) -> Result<ParamsFile> {
    let path = path.as_ref();
    let file: ParamsFile = load_json(path)?;
    if file.format != PARAMS_FORMAT || file.version != PARAMS_VERSION {
        return Err(Error::Invalid(format!(
            "{}: unsupported parameter file {} v{}",
            path.display(),
            file.format,
            file.version
        )));
    }
    file.params()?;
    Ok(file)
}

fn write_csv<T: Serialize>(rows: impl IntoIterator<Item = T>, path: &Path) -> Result<()> {
    let csv_err = |e| Error::Csv {
        path: path.to_owned(),
        source: e,
    };
    let mut w = csv::Writer::from_writer(create(path)?);
    for row in rows {
        w.serialize(row).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[derive(Serialize)]
struct SweepCsvRow {
    h: f64,
    fp: u64,
    #[serde(rename = "fn")]
    fn_: u64,
    tp: u64,
    tn: u64,
    objective: f64,
}

/// Columns `h, fp, fn, tp, tn, objective`.
pub fn write_sweep_csv(rows: &[SweepRow], path: impl AsRef<Path>) -> Result<()> {
    write_csv(
        rows.iter().map(|r| SweepCsvRow {
            h: r.h,
            fp: r.counts.fp,
            fn_: r.counts.fn_,
            tp: r.counts.tp,
            tn: r.counts.tn,
            objective: r.objective,
        }),
        path.as_ref(),
    )
}

#[derive(Serialize)]
struct HistogramCsvRow {
    bin_lo: f64,
    bin_hi: f64,
    same_count: u64,
    diff_count: u64,
}

/// Columns `bin_lo, bin_hi, same_count, diff_count`.
pub fn write_histogram_csv(h: &DistanceHistogram, path: impl AsRef<Path>) -> Result<()> {
    write_csv(
        (0..h.bin_count()).map(|k| HistogramCsvRow {
            bin_lo: h.edges[k],
            bin_hi: h.edges[k + 1],
            same_count: h.same[k],
            diff_count: h.diff[k],
        }),
        path.as_ref(),
    )
}

#[derive(Serialize)]
struct LossCsvRow {
    epoch: usize,
    loss: f64,
}

/// Columns `epoch, loss`.
pub fn write_loss_csv(losses: &[f64], path: impl AsRef<Path>) -> Result<()> {
    write_csv(
        losses
            .iter()
            .enumerate()
            .map(|(epoch, &loss)| LossCsvRow { epoch, loss }),
        path.as_ref(),
    )
}
