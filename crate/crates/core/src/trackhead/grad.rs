use alloc::vec;
use alloc::vec::Vec;

use super::loss::{farthest_pairs, hard_triplets, pairwise_distances};
use super::{batch_loss, LabeledBatch, LossConfig, TrackHeadParams};
use crate::{Error, Result};

/// Exact gradient of `λ3·L_tri + λ4·L_pull` with respect to every parameter.
///
/// Hinges contribute nothing at exactly zero and `|x|` uses `sign(0) = 0`.
pub fn gradient(params: &TrackHeadParams, batch: &LabeledBatch, cfg: &LossConfig) -> Result<TrackHeadParams> {
    let traces = batch
        .features()
        .iter()
        .map(|f| params.forward_trace(f))
        .collect::<Result<Vec<_>>>()?;
    let emb: Vec<&[f64]> = traces.iter().map(|t| t.embed.as_slice()).collect();
    let d = pairwise_distances(&emb);
    let ids = batch.identities();

    // dLoss/d(distance) for the pairs the losses actually touch
    let mut pair_weights: Vec<(usize, usize, f64)> = Vec::new();
    let triplets = hard_triplets(&d, ids, cfg.m);
    if !triplets.is_empty() {
        let w = cfg.lambda3 / triplets.len() as f64;
        for t in triplets.iter().filter(|t| t.margin_gap > 0.0) {
            pair_weights.push((t.anchor, t.positive, w));
            pair_weights.push((t.anchor, t.negative, -w));
        }
    }
    let pulls = farthest_pairs(&d, ids);
    if !pulls.is_empty() {
        let w = cfg.lambda4 / pulls.len() as f64;
        for &(i, j, v) in &pulls {
            let s = v - cfg.m_pull;
            let sign = if s > 0.0 {
                1.0
            } else if s < 0.0 {
                -1.0
            } else {
                0.0
            };
            if sign != 0.0 {
                pair_weights.push((i, j, w * sign));
            }
        }
    }

    let e_dim = params.dims().embed;
    let mut grad_emb = vec![vec![0.0; e_dim]; emb.len()];
    for (i, j, w) in pair_weights {
        // d ||e_i - e_j||^2 / d e_i = 2 (e_i - e_j)
        for k in 0..e_dim {
            let g = 2.0 * w * (emb[i][k] - emb[j][k]);
            grad_emb[i][k] += g;
            grad_emb[j][k] -= g;
        }
    }

    let dims = params.dims();
    let mut grad = TrackHeadParams::zeros(dims);
    for ((trace, ge), x) in traces.iter().zip(&grad_emb).zip(batch.features()) {
        if ge.iter().all(|g| *g == 0.0) {
            continue;
        }
        let mut g_hidden = vec![0.0; dims.hidden];
        for e in 0..dims.embed {
            grad.b2[e] += ge[e];
            let row = e * dims.hidden;
            for h in 0..dims.hidden {
                grad.w2[row + h] += ge[e] * trace.hidden[h];
                g_hidden[h] += ge[e] * params.w2[row + h];
            }
        }
        for h in 0..dims.hidden {
            if trace.pre[h] <= 0.0 {
                continue;
            }
            let gz = g_hidden[h];
            grad.b1[h] += gz;
            let row = h * dims.input;
            for i in 0..dims.input {
                grad.w1[row + i] += gz * x[i];
            }
        }
    }
    Ok(grad)
}

/// Central-difference estimate of the same gradient, one parameter at a time.
pub fn finite_diff_gradient(
    params: &TrackHeadParams,
    batch: &LabeledBatch,
    cfg: &LossConfig,
    eps: f64,
) -> Result<TrackHeadParams> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::Config("finite-difference step must be positive".into()));
    }
    let mut probe = params.clone();
    let mut out = TrackHeadParams::zeros(params.dims());
    let n = params.len();
    for k in 0..n {
        let orig = *probe.values().nth(k).expect("index in range");
        set_nth(&mut probe, k, orig + eps);
        let plus = batch_loss(&probe, batch, cfg)?;
        set_nth(&mut probe, k, orig - eps);
        let minus = batch_loss(&probe, batch, cfg)?;
        set_nth(&mut probe, k, orig);
        set_nth(&mut out, k, (plus - minus) / (2.0 * eps));
    }
    Ok(out)
}

fn set_nth(p: &mut TrackHeadParams, k: usize, v: f64) {
    *p.values_mut().nth(k).expect("index in range") = v;
}
