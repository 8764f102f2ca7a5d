use ndarray::Array3;
use rand::seq::SliceRandom;
use rayon::prelude::*;

use super::{
    adam_step, masked_bce, sample_mask, Checkpoint, EpochRecord, MaskTensor, OptimizerState, TrainConfig,
    TrainingMeta,
};
use crate::error::{Error, Result};
use crate::eval::metrics::masked_accuracy;
use crate::graph::{hop_adjacency_stack, Graph, GraphCorpus, HopAdjacencyStack};
use crate::net::{backward, forward_full, ModelConfig, ModelParams};
use crate::rng::{pair_id, substream, Purpose};
use crate::spectral::WaveletConfig;

/// Model input and reconstruction targets for one graph.
#[derive(Debug, Clone)]
pub struct Sample {
    pub wavelet: Array3<f64>,
    pub targets: HopAdjacencyStack,
}

pub fn prepare_samples(graphs: &[Graph], wavelet: &WaveletConfig, hops: &[usize]) -> Result<Vec<Sample>> {
    graphs
        .par_iter()
        .map(|g| {
            Ok(Sample { wavelet: wavelet.compute(g)?.data, targets: hop_adjacency_stack(g, hops)? })
        })
        .collect()
}

/// Mask used for training graph `graph` in `epoch`.
pub fn training_mask(sample: &Sample, cfg: &TrainConfig, epoch: usize, graph: usize) -> Result<MaskTensor> {
    if !cfg.masking {
        return Ok(MaskTensor::full(&sample.targets));
    }
    let epoch_id = if cfg.resample_masks { epoch as u64 } else { 0 };
    let mut rng = substream(cfg.seed, Purpose::Mask, pair_id(epoch_id, graph as u64));
    sample_mask(&sample.targets, cfg.threshold, &mut rng)
}

/// Fixed balanced mask used to score graph `graph` outside training.
pub fn evaluation_mask(targets: &HopAdjacencyStack, threshold: usize, seed: u64, graph: usize) -> Result<MaskTensor> {
    sample_mask(targets, threshold, &mut substream(seed, Purpose::EvalMask, graph as u64))
}

/// Loss and parameter gradient for one graph; `None` when every hop channel
/// is skipped by the mask.
pub fn graph_gradient(
    sample: &Sample,
    mask: &MaskTensor,
    params: &ModelParams,
    config: &ModelConfig,
) -> Result<Option<(f64, Vec<f64>)>> {
    let trace = forward_full(sample.wavelet.view(), params, config)?;
    let loss = match masked_bce(trace.probs(), &sample.targets, mask) {
        Ok(l) => l,
        Err(Error::NoTrainableEntries) => return Ok(None),
        Err(e) => return Err(e),
    };
    let grad = backward(&trace, params, config, &loss.grad_logits)?;
    Ok(Some((loss.total, grad)))
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    /// Parameters from the best validation epoch.
    pub checkpoint: Checkpoint,
    pub final_params: ModelParams,
    pub history: Vec<EpochRecord>,
}

pub fn pretrain(
    corpus: &GraphCorpus,
    model: &ModelConfig,
    train: &TrainConfig,
    wavelet: &WaveletConfig,
) -> Result<TrainOutcome> {
    pretrain_with_progress(corpus, model, train, wavelet, &mut |_| {})
}

/// Mini-batch Adam over the training split.
///
/// Per batch, graphs run forward/backward independently (in parallel) and
/// their gradients are summed in index order, then divided by the batch size.
/// Validation uses one fixed balanced mask per graph; the kept checkpoint is
/// the epoch with the lowest validation loss (earliest on ties), or the lowest
/// training loss when there is no validation split.
pub fn pretrain_with_progress(
    corpus: &GraphCorpus,
    model: &ModelConfig,
    train: &TrainConfig,
    wavelet: &WaveletConfig,
    progress: &mut dyn FnMut(&EpochRecord),
) -> Result<TrainOutcome> {
    model.validate()?;
    train.validate()?;
    if corpus.train.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    if wavelet.scales.len() != model.wavelet_channels {
        return Err(Error::InvalidParam(format!(
            "{} wavelet scales for a model with {} input channels",
            wavelet.scales.len(),
            model.wavelet_channels
        )));
    }
    let samples = prepare_samples(&corpus.graphs, wavelet, &model.hops)?;
    let valid_masks: Vec<MaskTensor> = corpus
        .valid
        .iter()
        .map(|&gi| evaluation_mask(&samples[gi].targets, train.threshold, train.seed, gi))
        .collect::<Result<_>>()?;

    let mut params = ModelParams::init(model, train.seed)?;
    let mut state = OptimizerState::new(params.len());
    let mut history = Vec::with_capacity(train.epochs);
    let mut best: Option<(f64, usize, ModelParams)> = None;

    for epoch in 1..=train.epochs {
        let mut order = corpus.train.clone();
        order.shuffle(&mut substream(train.seed, Purpose::Shuffle, epoch as u64));
        let mut loss_sum = 0.0;
        let mut loss_count = 0usize;
        for batch in order.chunks(train.batch_size) {
            let results: Vec<Option<(f64, Vec<f64>)>> = batch
                .par_iter()
                .map(|&gi| {
                    let mask = training_mask(&samples[gi], train, epoch, gi)?;
                    graph_gradient(&samples[gi], &mask, &params, model)
                })
                .collect::<Result<_>>()?;
            let mut grad = vec![0.0; params.len()];
            for (loss, g) in results.into_iter().flatten() {
                loss_sum += loss;
                loss_count += 1;
                for (acc, x) in grad.iter_mut().zip(&g) {
                    *acc += x;
                }
            }
            let inv = 1.0 / batch.len() as f64;
            grad.iter_mut().for_each(|g| *g *= inv);
            adam_step(&mut params, &grad, &mut state, train)?;
        }
        let train_loss = if loss_count > 0 { loss_sum / loss_count as f64 } else { f64::NAN };
        if loss_count > 0 && !train_loss.is_finite() {
            return Err(Error::NonFiniteLoss { epoch });
        }

        let (valid_loss, valid_hop_accuracy) = validate(corpus, &samples, &valid_masks, &params, model)?;
        let record = EpochRecord { epoch, train_loss, valid_loss, valid_hop_accuracy };
        progress(&record);
        let score = valid_loss.unwrap_or(train_loss);
        if score.is_finite() && best.as_ref().is_none_or(|(b, _, _)| score < *b) {
            best = Some((score, epoch, params.clone()));
        }
        history.push(record);
    }

    let (best_epoch, best_params) = match best {
        Some((_, e, p)) => (e, p),
        None => (0, params.clone()),
    };
    let checkpoint = Checkpoint {
        model: model.clone(),
        wavelet: wavelet.clone(),
        params: best_params,
        meta: TrainingMeta {
            seed: train.seed,
            epoch: best_epoch,
            train_config: Some(train.clone()),
            history: history.clone(),
        },
    };
    Ok(TrainOutcome { checkpoint, final_params: params, history })
}

fn validate(
    corpus: &GraphCorpus,
    samples: &[Sample],
    masks: &[MaskTensor],
    params: &ModelParams,
    model: &ModelConfig,
) -> Result<(Option<f64>, Vec<Option<f64>>)> {
    let r = model.num_hops();
    if corpus.valid.is_empty() {
        return Ok((None, vec![None; r]));
    }
    let per_graph: Vec<(Option<f64>, Vec<Option<f64>>)> = corpus
        .valid
        .par_iter()
        .zip(masks.par_iter())
        .map(|(&gi, mask)| {
            let s = &samples[gi];
            let trace = forward_full(s.wavelet.view(), params, model)?;
            let loss = match masked_bce(trace.probs(), &s.targets, mask) {
                Ok(l) => Some(l.total),
                Err(Error::NoTrainableEntries) => None,
                Err(e) => return Err(e),
            };
            Ok((loss, masked_accuracy(trace.probs(), &s.targets, mask)))
        })
        .collect::<Result<_>>()?;
    let losses: Vec<f64> = per_graph.iter().filter_map(|(l, _)| *l).collect();
    let valid_loss = (!losses.is_empty()).then(|| losses.iter().sum::<f64>() / losses.len() as f64);
    let acc = (0..r)
        .map(|c| {
            let vals: Vec<f64> = per_graph.iter().filter_map(|(_, a)| a[c]).collect();
            (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
        })
        .collect();
    Ok((valid_loss, acc))
}
