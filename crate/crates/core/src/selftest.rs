//! Fast property checks: permutation equivariance of the model, mask
//! balance, and reverse-mode gradients against finite differences.

use ndarray::{Array2, Array3, Dimension};
use rand::seq::SliceRandom;
use rand::Rng as _;

use crate::error::Result;
use crate::graph::{gen_synthetic, hop_adjacency_stack, Graph, HopAdjacencyStack, SyntheticKind};
use crate::net::{backward, forward_full, permute_graph_action, ForwardTrace, ModelConfig, ModelParams};
use crate::rng::{substream, Purpose, Rng};
use crate::spectral::{wavelet_tensor, WaveletMethod};
use crate::train::{masked_bce, sample_mask, MaskTensor};

/// Outcome of one check.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Random connected-or-not ER graph with `n` in `[lo, hi]`.
pub fn random_graph(rng: &mut Rng, lo: usize, hi: usize) -> Result<Graph> {
    let n = rng.random_range(lo..=hi);
    let p = rng.random_range(0.1..0.7);
    gen_synthetic(SyntheticKind::ErdosRenyi { n, p }, rng.random(), false)
}

pub fn random_permutation(rng: &mut Rng, n: usize) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    perm
}

/// Parameters drawn uniformly from `[-scale, scale]`, biases included.
pub fn random_params(config: &ModelConfig, seed: u64, scale: f64) -> Result<ModelParams> {
    let mut rng = substream(seed, Purpose::Probe, 0);
    let len = ModelParams::init(config, seed)?.len();
    let values = (0..len).map(|_| rng.random_range(-scale..=scale)).collect();
    ModelParams::from_values(config, values, seed)
}

fn max_dev<D: Dimension>(a: &ndarray::Array<f64, D>, b: &ndarray::Array<f64, D>) -> f64 {
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

fn rows_as_pairs(x: &Array2<f64>, n: usize) -> Array3<f64> {
    x.clone().into_shape_with_order((n, n, x.ncols())).expect("n² rows")
}

/// Largest deviation between `trace_p` (run on the permuted input) and the
/// permuted activations of `trace`, over every cached stage.
pub fn trace_deviation(trace: &ForwardTrace, trace_p: &ForwardTrace, perm: &[usize]) -> Result<f64> {
    let n = trace.n();
    let mut dev = 0.0f64;
    let mut second = |a: &Array3<f64>, b: &Array3<f64>| -> Result<()> {
        dev = dev.max(max_dev(&permute_graph_action(a, 2, perm)?, b));
        Ok(())
    };
    for (a, b) in trace.encoder.layers.iter().zip(&trace_p.encoder.layers) {
        second(a, b)?;
    }
    second(&trace.decoder.lifted, &trace_p.decoder.lifted)?;
    for (a, b) in trace.decoder.layers.iter().zip(&trace_p.decoder.layers) {
        second(a, b)?;
    }
    for (a, b) in trace.decoder.head_hidden.iter().zip(&trace_p.decoder.head_hidden) {
        second(&rows_as_pairs(a, n), &rows_as_pairs(b, n))?;
    }
    second(&trace.decoder.logits, &trace_p.decoder.logits)?;
    second(&trace.decoder.probs, &trace_p.decoder.probs)?;
    for (a, b) in [
        (&trace.encoder.pooled, &trace_p.encoder.pooled),
        (&trace.encoder.hidden, &trace_p.encoder.hidden),
        (&trace.latent, &trace_p.latent),
    ] {
        dev = dev.max(max_dev(&permute_graph_action(a, 1, perm)?, b));
    }
    Ok(dev)
}

/// Max stage deviation of `forward_full(σ(W))` vs `σ(forward_full(W))` over
/// `pairs` random (graph, permutation) pairs with `n <= max_n`.
pub fn equivariance_deviation(pairs: usize, max_n: usize, seed: u64) -> Result<f64> {
    let config = ModelConfig { hops: vec![1, 2, 4, 8], ..ModelConfig::default() };
    let params = random_params(&config, seed, 0.5)?;
    let scales = [1.0, 2.0, 4.0, 16.0];
    let mut worst = 0.0f64;
    for i in 0..pairs {
        let mut rng = substream(seed, Purpose::Probe, 1 + i as u64);
        let g = random_graph(&mut rng, 2, max_n)?;
        let perm = random_permutation(&mut rng, g.n());
        let w = wavelet_tensor(&g, &scales, WaveletMethod::Chebyshev { order: 30 })?.data;
        let w_p = permute_graph_action(&w, 2, &perm)?;
        let trace = forward_full(w.view(), &params, &config)?;
        let trace_p = forward_full(w_p.view(), &params, &config)?;
        worst = worst.max(trace_deviation(&trace, &trace_p, &perm)?);
    }
    Ok(worst)
}

/// Mask-balance violations among `count` masks over random targets.
/// Returns the number of masks breaking a balance or class-subset rule.
pub fn mask_balance_violations(count: usize, seed: u64) -> Result<usize> {
    let mut bad = 0;
    for i in 0..count {
        let mut rng = substream(seed, Purpose::Probe, 10_000 + i as u64);
        let g = random_graph(&mut rng, 1, 14)?;
        let hops = [1, 2, 3, 8];
        let targets = hop_adjacency_stack(&g, &hops)?;
        let threshold = rng.random_range(1..=30);
        let mask = sample_mask(&targets, threshold, &mut rng)?;
        if !mask_is_balanced(&targets, &mask, threshold) {
            bad += 1;
        }
    }
    Ok(bad)
}

/// Checks kept counts `min(edges, non-edges, T)` per class on the upper
/// triangle, mirroring, and per-class membership.
pub fn mask_is_balanced(targets: &HopAdjacencyStack, mask: &MaskTensor, threshold: usize) -> bool {
    let n = targets.n();
    (0..targets.channels()).all(|c| {
        let (mut ones, mut zeros, mut kept_ones, mut kept_zeros) = (0, 0, 0, 0);
        for u in 0..n {
            for v in u..n {
                if mask.data[[u, v, c]] != mask.data[[v, u, c]] {
                    return false;
                }
                let t = targets.data[[u, v, c]];
                let k = usize::from(mask.data[[u, v, c]]);
                if t == 1 {
                    ones += 1;
                    kept_ones += k;
                } else {
                    zeros += 1;
                    kept_zeros += k;
                }
            }
        }
        let m = ones.min(zeros).min(threshold);
        let info = &mask.per_channel[c];
        kept_ones == m
            && kept_zeros == m
            && info.edges_kept == m
            && info.nonedges_kept == m
            && info.saturated == (ones == 0 || zeros == 0)
    })
}

/// Tiny model for gradient checks: `k = 2`, widths `[3, 3]`, `d_ℓ = 4`, `r = 2`.
pub fn tiny_model() -> ModelConfig {
    ModelConfig {
        wavelet_channels: 2,
        encoder_widths: vec![3, 3],
        latent_hidden: 3,
        latent_dim: 4,
        decoder_widths: vec![3, 3],
        head_widths: vec![3, 3],
        hops: vec![1, 2],
    }
}

/// Worst relative error between reverse-mode and central-difference
/// gradients (step `h`), over parameters whose gradient exceeds `1e-8`.
pub fn gradient_check(seed: u64, h: f64) -> Result<f64> {
    let config = tiny_model();
    let mut rng = substream(seed, Purpose::Probe, 20_000);
    let g = loop {
        let g = random_graph(&mut rng, 6, 6)?;
        if g.num_edges() > 0 {
            break g;
        }
    };
    let w = wavelet_tensor(&g, &[1.0, 4.0], WaveletMethod::Exact)?.data;
    let targets = hop_adjacency_stack(&g, &config.hops)?;
    let mask = sample_mask(&targets, 100, &mut rng)?;
    let params = random_params(&config, seed, 0.8)?;

    let loss_at = |p: &ModelParams| -> Result<f64> {
        Ok(masked_bce(forward_full(w.view(), p, &config)?.probs(), &targets, &mask)?.total)
    };
    let trace = forward_full(w.view(), &params, &config)?;
    let loss = masked_bce(trace.probs(), &targets, &mask)?;
    let grad = backward(&trace, &params, &config, &loss.grad_logits)?;

    let mut worst = 0.0f64;
    for i in 0..params.len() {
        if grad[i].abs() <= 1e-8 {
            continue;
        }
        let mut plus = params.values.clone();
        plus[i] += h;
        let mut minus = params.values.clone();
        minus[i] -= h;
        let fp = loss_at(&ModelParams::from_values(&config, plus, seed)?)?;
        let fm = loss_at(&ModelParams::from_values(&config, minus, seed)?)?;
        let fd = (fp - fm) / (2.0 * h);
        worst = worst.max((grad[i] - fd).abs() / grad[i].abs().max(fd.abs()));
    }
    Ok(worst)
}

/// The suite run by the `selftest` command.
pub fn run_all() -> Vec<CheckResult> {
    let mut out = Vec::new();
    let mut push = |name, res: Result<(bool, String)>| {
        let (passed, detail) = res.unwrap_or_else(|e| (false, format!("error: {e}")));
        out.push(CheckResult { name, passed, detail });
    };
    push(
        "equivariance",
        equivariance_deviation(20, 12, 1).map(|d| (d <= 1e-9, format!("max deviation {d:.3e} over 20 pairs"))),
    );
    push(
        "mask-balance",
        mask_balance_violations(200, 2).map(|b| (b == 0, format!("{b} of 200 masks unbalanced"))),
    );
    push(
        "gradient",
        (0..3)
            .map(|s| gradient_check(s, 1e-5))
            .collect::<Result<Vec<_>>>()
            .map(|e| {
                let worst = e.iter().cloned().fold(0.0, f64::max);
                (worst <= 1e-4, format!("max relative error {worst:.3e} over 3 seeds"))
            }),
    );
    out
}
