use ndarray::Array3;

use super::MaskTensor;
use crate::error::{Error, Result};
use crate::graph::HopAdjacencyStack;

pub const PROB_CLAMP: f64 = 1e-7;

/// Masked binary cross-entropy and its gradient.
#[derive(Debug, Clone)]
pub struct MaskedLoss {
    /// Mean over channels that kept at least one entry.
    pub total: f64,
    /// Per-channel mean BCE over kept entries; `None` for skipped channels.
    pub per_channel: Vec<Option<f64>>,
    /// `dL/d(logit)` with `probs = sigmoid(logit)`, stored on the upper
    /// triangle only (each undirected entry once). Zero where the clamp is active.
    pub grad_logits: Array3<f64>,
}

/// BCE over the kept upper-triangle entries of each hop channel.
pub fn masked_bce(probs: &Array3<f64>, targets: &HopAdjacencyStack, mask: &MaskTensor) -> Result<MaskedLoss> {
    if probs.shape() != targets.data.shape() || mask.data.shape() != targets.data.shape() {
        return Err(Error::Shape(format!(
            "predictions {:?}, targets {:?} and mask {:?} must agree",
            probs.shape(),
            targets.data.shape(),
            mask.data.shape()
        )));
    }
    let n = targets.n();
    let r = targets.channels();
    let active = mask.per_channel.iter().filter(|c| c.is_active()).count();
    if active == 0 {
        return Err(Error::NoTrainableEntries);
    }
    let mut grad_logits = Array3::zeros((n, n, r));
    let mut per_channel = Vec::with_capacity(r);
    let mut total = 0.0;
    for c in 0..r {
        let info = mask.per_channel[c];
        if !info.is_active() {
            per_channel.push(None);
            continue;
        }
        let count = (info.edges_kept + info.nonedges_kept) as f64;
        let mut sum = 0.0;
        for u in 0..n {
            for v in u..n {
                if mask.data[[u, v, c]] == 0 {
                    continue;
                }
                let y = f64::from(targets.data[[u, v, c]]);
                let p = probs[[u, v, c]];
                let pc = p.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP);
                sum -= y * pc.ln() + (1.0 - y) * (1.0 - pc).ln();
                if pc == p {
                    grad_logits[[u, v, c]] = (p - y) / (count * active as f64);
                }
            }
        }
        let mean = sum / count;
        per_channel.push(Some(mean));
        total += mean;
    }
    Ok(MaskedLoss { total: total / active as f64, per_channel, grad_logits })
}
