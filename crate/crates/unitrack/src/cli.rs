//! `unitrack simulate | train | calibrate | track | eval`.
//!
//! Each subcommand reads an optional JSON config (`--config`); flags named
//! after config fields override it.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use unitrack_core::calib::TieBreak;
use unitrack_core::data::{simulate, simulate_with_archetypes, SimConfig};
use unitrack_core::geometry::validate_sequence;
use unitrack_core::metrics::MismatchRule;

use crate::io::{self, sibling, ParamsFile};
use crate::manifest::RunManifest;
use crate::pipeline::{self, CalibSettings, CalibrationSummary, CountsFixture, EvalSettings, TrainSettings};
use crate::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "unitrack", version, about = "Embedding-based multi-object tracking toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic labeled frame sequence.
    Simulate(SimulateArgs),
    /// Train the embedding head on consecutive-frame pairs.
    Train(TrainArgs),
    /// Choose the association distance threshold on a dev sequence.
    Calibrate(CalibrateArgs),
    /// Assign track IDs to a frame sequence.
    Track(TrackArgs),
    /// Compute MOTA, pair accuracy and mAP.
    Eval(EvalArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Frame file to write (JSON lines).
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Reuse the archetype table written by an earlier run.
    #[arg(long)]
    pub archetypes: Option<PathBuf>,
    #[arg(long)]
    pub identities: Option<usize>,
    #[arg(long)]
    pub frames: Option<usize>,
    #[arg(long)]
    pub feature_dim: Option<usize>,
    #[arg(long)]
    pub archetype_spread: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub noise_sigma: Option<f64>,
    #[arg(long)]
    pub dropout: Option<f64>,
    #[arg(long)]
    pub image_width: Option<f64>,
    #[arg(long)]
    pub image_height: Option<f64>,
    #[arg(long)]
    pub max_speed: Option<f64>,
    #[arg(long)]
    pub min_box_size: Option<f64>,
    #[arg(long)]
    pub max_box_size: Option<f64>,
    #[arg(long)]
    pub min_confidence: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub camera_id: Option<i64>,
    #[arg(long)]
    pub first_frame_index: Option<u64>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Training frame file.
    #[arg(long)]
    pub frames: PathBuf,
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Parameter file to write.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub m: Option<f64>,
    #[arg(long)]
    pub m_pull: Option<f64>,
    #[arg(long)]
    pub lambda1: Option<f64>,
    #[arg(long)]
    pub lambda2: Option<f64>,
    #[arg(long)]
    pub lambda3: Option<f64>,
    #[arg(long)]
    pub lambda4: Option<f64>,
    #[arg(long)]
    pub score_threshold: Option<f64>,
    #[arg(long)]
    pub lr0: Option<f64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub hidden_dim: Option<usize>,
    #[arg(long)]
    pub embed_dim: Option<usize>,
    #[arg(long)]
    pub shuffle: Option<bool>,
    #[arg(long)]
    pub image_width: Option<f64>,
    #[arg(long)]
    pub iou_min: Option<f64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum TieBreakArg {
    Smallest,
    Largest,
}

impl From<TieBreakArg> for TieBreak {
    fn from(t: TieBreakArg) -> Self {
        match t {
            TieBreakArg::Smallest => TieBreak::Smallest,
            TieBreakArg::Largest => TieBreak::Largest,
        }
    }
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    /// Labeled dev frame file.
    #[arg(long)]
    pub frames: PathBuf,
    #[arg(long)]
    pub params: PathBuf,
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Calibration summary to write; sweep and histogram CSVs go beside it.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub score_threshold: Option<f64>,
    #[arg(long)]
    pub iou_min: Option<f64>,
    #[arg(long)]
    pub bins: Option<usize>,
    #[arg(long, value_enum)]
    pub tie_break: Option<TieBreakArg>,
}

/// Contents of a `track` config file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrackSettings {
    pub threshold: Option<f64>,
    pub score_threshold: Option<f64>,
}

#[derive(Debug, Args)]
pub struct TrackArgs {
    #[arg(long)]
    pub frames: PathBuf,
    #[arg(long)]
    pub params: PathBuf,
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Track file to write (JSON lines).
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Distance threshold; overrides `--calibration`.
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Summary written by `calibrate`, used for the threshold.
    #[arg(long)]
    pub calibration: Option<PathBuf>,
    /// Defaults to the score threshold stored in the parameter file.
    #[arg(long)]
    pub score_threshold: Option<f64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MismatchRuleArg {
    PreviousFrame,
    LastAssociated,
}

impl From<MismatchRuleArg> for MismatchRule {
    fn from(r: MismatchRuleArg) -> Self {
        match r {
            MismatchRuleArg::PreviousFrame => MismatchRule::PreviousFrame,
            MismatchRuleArg::LastAssociated => MismatchRule::LastAssociated,
        }
    }
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Track file produced by `track`.
    #[arg(long, requires = "frames", conflicts_with = "counts")]
    pub tracks: Option<PathBuf>,
    /// Ground-truth frame file.
    #[arg(long)]
    pub frames: Option<PathBuf>,
    /// JSON with precomputed `mot` and/or `pair` counts.
    #[arg(long)]
    pub counts: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Report to write (JSON).
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub iou_min: Option<f64>,
    #[arg(long, value_enum)]
    pub mismatch_rule: Option<MismatchRuleArg>,
}

macro_rules! apply_overrides {
    ($target:expr, $args:expr, [$($field:ident),* $(,)?]) => {
        $( if let Some(v) = $args.$field.clone() { $target.$field = v.into(); } )*
    };
}

fn load_config<T: DeserializeOwned + Default>(path: Option<&Path>) -> Result<T> {
    path.map_or_else(|| Ok(T::default()), io::load_json)
}

fn to_value<T: Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).expect("config serializes")
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(a) => cmd_simulate(&a),
        Command::Train(a) => cmd_train(&a),
        Command::Calibrate(a) => cmd_calibrate(&a),
        Command::Track(a) => cmd_track(&a),
        Command::Eval(a) => cmd_eval(&a),
    }
}

#[derive(Serialize, Deserialize)]
struct ArchetypeTable {
    archetypes: Vec<Vec<f64>>,
}

pub fn cmd_simulate(a: &SimulateArgs) -> Result<()> {
    let mut cfg: SimConfig = load_config(a.config.as_deref())?;
    apply_overrides!(
        cfg,
        a,
        [
            seed,
            identities,
            frames,
            feature_dim,
            archetype_spread,
            noise_sigma,
            dropout,
            image_width,
            image_height,
            max_speed,
            min_box_size,
            max_box_size,
            min_confidence,
            camera_id,
            first_frame_index,
        ]
    );
    cfg.validate()?;
    let sim = match &a.archetypes {
        Some(p) => simulate_with_archetypes(&cfg, io::load_json::<ArchetypeTable>(p)?.archetypes)?,
        None => simulate(&cfg)?,
    };
    io::save_frames(&sim.frames, &a.out)?;
    let arch_path = sibling(&a.out, "archetypes.json");
    io::save_json(
        &ArchetypeTable {
            archetypes: sim.archetypes,
        },
        &arch_path,
    )?;
    let mut m = RunManifest::new("simulate", to_value(&cfg), Some(cfg.seed))
        .output(&a.out)
        .output(&arch_path);
    if let Some(p) = &a.config {
        m = m.input("config", p);
    }
    if let Some(p) = &a.archetypes {
        m = m.input("archetypes", p);
    }
    m.write_beside(&a.out)?;
    Ok(())
}

pub fn cmd_train(a: &TrainArgs) -> Result<()> {
    let mut s: TrainSettings = load_config(a.config.as_deref())?;
    apply_overrides!(
        s.loss,
        a,
        [m, m_pull, lambda1, lambda2, lambda3, lambda4, score_threshold]
    );
    apply_overrides!(s.train, a, [lr0, epochs, hidden_dim, embed_dim, shuffle, seed]);
    apply_overrides!(s, a, [image_width, iou_min]);
    s.loss.validate()?;
    s.train.validate()?;
    let frames = io::load_frames(&a.frames)?;
    validate_sequence(&frames)?;
    let outcome = pipeline::train_on_frames(&frames, &s)?;
    io::save_params(&ParamsFile::new(&outcome.params, s.train.seed, s.loss), &a.out)?;
    let trace = sibling(&a.out, "loss.csv");
    io::write_loss_csv(&outcome.epoch_losses, &trace)?;
    let mut m = RunManifest::new("train", to_value(&s), Some(s.train.seed))
        .input("frames", &a.frames)
        .output(&a.out)
        .output(&trace);
    if let Some(p) = &a.config {
        m = m.input("config", p);
    }
    m.write_beside(&a.out)?;
    Ok(())
}

pub fn cmd_calibrate(a: &CalibrateArgs) -> Result<()> {
    let mut s: CalibSettings = load_config(a.config.as_deref())?;
    apply_overrides!(s, a, [score_threshold, iou_min, bins, tie_break]);
    let params = io::load_params(&a.params)?.params()?;
    let frames = io::load_frames(&a.frames)?;
    let cal = pipeline::calibrate(&frames, &params, &s)?;
    io::save_json(&cal.summary, &a.out)?;
    let sweep = sibling(&a.out, "sweep.csv");
    let hist = sibling(&a.out, "histogram.csv");
    io::write_sweep_csv(&cal.sweep.table, &sweep)?;
    io::write_histogram_csv(&cal.histogram, &hist)?;
    let mut m = RunManifest::new("calibrate", to_value(&s), a.seed)
        .input("frames", &a.frames)
        .input("params", &a.params)
        .output(&a.out)
        .output(&sweep)
        .output(&hist);
    if let Some(p) = &a.config {
        m = m.input("config", p);
    }
    m.write_beside(&a.out)?;
    Ok(())
}

pub fn cmd_track(a: &TrackArgs) -> Result<()> {
    let mut s: TrackSettings = load_config(a.config.as_deref())?;
    if let Some(p) = &a.calibration {
        let cal: CalibrationSummary = io::load_json(p)?;
        s.threshold = Some(cal.threshold);
    }
    if a.threshold.is_some() {
        s.threshold = a.threshold;
    }
    if a.score_threshold.is_some() {
        s.score_threshold = a.score_threshold;
    }
    let file = io::load_params(&a.params)?;
    let params = file.params()?;
    let threshold = s
        .threshold
        .ok_or_else(|| Error::Invalid("a distance threshold is required (--threshold or --calibration)".into()))?;
    if !(threshold > 0.0 && threshold.is_finite()) {
        return Err(Error::Invalid(format!("threshold must be positive, got {threshold}")));
    }
    let score_threshold = s.score_threshold.unwrap_or(file.loss.score_threshold);
    s.score_threshold = Some(score_threshold);
    let frames = io::load_frames(&a.frames)?;
    validate_sequence(&frames)?;
    let tracks = pipeline::track(&frames, &params, threshold, score_threshold)?;
    io::save_tracks(&tracks, &a.out)?;
    let mut m = RunManifest::new("track", to_value(&s), a.seed)
        .input("frames", &a.frames)
        .input("params", &a.params)
        .output(&a.out);
    if let Some(p) = &a.calibration {
        m = m.input("calibration", p);
    }
    m.write_beside(&a.out)?;
    Ok(())
}

pub fn cmd_eval(a: &EvalArgs) -> Result<()> {
    let mut s: EvalSettings = load_config(a.config.as_deref())?;
    apply_overrides!(s, a, [iou_min, mismatch_rule]);
    let mut m = RunManifest::new("eval", to_value(&s), a.seed);
    let report = match (&a.counts, &a.tracks, &a.frames) {
        (Some(c), _, _) => {
            m = m.input("counts", c);
            pipeline::report_from_counts(&io::load_json::<CountsFixture>(c)?, &s)?
        }
        (None, Some(t), Some(f)) => {
            m = m.input("tracks", t).input("frames", f);
            pipeline::evaluate(&io::load_tracks(t)?, &io::load_frames(f)?, &s)?
        }
        _ => return Err(Error::Invalid("eval needs --tracks with --frames, or --counts".into())),
    };
    io::save_json(&report, &a.out)?;
    m.output(&a.out).write_beside(&a.out)?;
    Ok(())
}
