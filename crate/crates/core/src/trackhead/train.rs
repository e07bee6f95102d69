use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{batch_loss, gradient, lr_at, HeadDims, LabeledBatch, LossConfig, TrackHeadParams};
use crate::{Error, Result};

/// Optimizer and model-shape settings for [`train`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    /// Initial learning rate of the cosine schedule.
    pub lr0: f64,
    pub epochs: usize,
    pub hidden_dim: usize,
    pub embed_dim: usize,
    /// Visit batches in a seeded random order each epoch.
    pub shuffle: bool,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            lr0: 1e-3,
            epochs: 40,
            hidden_dim: 64,
            embed_dim: 32,
            shuffle: true,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lr0 > 0.0 && self.lr0.is_finite()) {
            return Err(Error::Config("lr0 must be positive".into()));
        }
        if self.epochs == 0 {
            return Err(Error::Config("epochs must be positive".into()));
        }
        if self.hidden_dim == 0 || self.embed_dim == 0 {
            return Err(Error::Config("hidden_dim and embed_dim must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub params: TrackHeadParams,
    /// Mean batch loss of each epoch, measured before each update.
    pub epoch_losses: Vec<f64>,
}

/// Initializes from `tcfg.seed` and trains. See [`train_from`].
pub fn train(dataset: &[LabeledBatch], cfg: &LossConfig, tcfg: &TrainConfig) -> Result<TrainOutcome> {
    let first = dataset
        .first()
        .ok_or_else(|| Error::Config("training set is empty".into()))?;
    let dims = HeadDims::new(first.feature_dim(), tcfg.hidden_dim, tcfg.embed_dim);
    let init = TrackHeadParams::init(dims, tcfg.seed)?;
    train_from(init, dataset, cfg, tcfg)
}

/// Plain gradient descent on `λ3·L_tri + λ4·L_pull` with a cosine schedule
/// spanning `epochs × batches` steps, one step per batch.
pub fn train_from(
    mut params: TrackHeadParams,
    dataset: &[LabeledBatch],
    cfg: &LossConfig,
    tcfg: &TrainConfig,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    tcfg.validate()?;
    if dataset.is_empty() {
        return Err(Error::Config("training set is empty".into()));
    }
    let total = tcfg.epochs * dataset.len();
    let mut order: Vec<usize> = (0..dataset.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(tcfg.seed);
    rng.set_stream(1);
    let mut epoch_losses = Vec::with_capacity(tcfg.epochs);
    let mut step = 0;
    for epoch in 0..tcfg.epochs {
        if tcfg.shuffle {
            order.shuffle(&mut rng);
        }
        let mut sum = 0.0;
        for &b in &order {
            let batch = &dataset[b];
            let loss = batch_loss(&params, batch, cfg)?;
            if !loss.is_finite() {
                return Err(Error::NonFiniteLoss {
                    epoch,
                    step,
                    value: loss,
                });
            }
            sum += loss;
            let grad = gradient(&params, batch, cfg)?;
            params.add_scaled(&grad, -lr_at(step, total, tcfg.lr0));
            if params.values().any(|v| !v.is_finite()) {
                return Err(Error::NonFiniteLoss {
                    epoch,
                    step,
                    value: f64::NAN,
                });
            }
            step += 1;
        }
        epoch_losses.push(sum / dataset.len() as f64);
    }
    Ok(TrainOutcome { params, epoch_losses })
}

/// Mean batch loss over a dataset.
pub fn dataset_loss(params: &TrackHeadParams, dataset: &[LabeledBatch], cfg: &LossConfig) -> Result<f64> {
    if dataset.is_empty() {
        return Ok(0.0);
    }
    let mut sum = 0.0;
    for b in dataset {
        sum += batch_loss(params, b, cfg)?;
    }
    Ok(sum / dataset.len() as f64)
}
