use std::io::Write;

use rayon::prelude::*;

use super::predictor::ModelPredictor;
use super::report::{fmt6, reconstruction_accuracy, MaskMode, ReconReport};
use crate::error::{Error, Result};
use crate::graph::{Graph, GraphCorpus};
use crate::net::ModelConfig;
use crate::spectral::WaveletConfig;
use crate::train::{pretrain, Checkpoint, TrainConfig};

/// Everything needed for one training run plus its evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub model: ModelConfig,
    pub train: TrainConfig,
    pub wavelet: WaveletConfig,
    /// Seed of the evaluation masks.
    pub eval_seed: u64,
}

impl RunConfig {
    pub fn fit(&self, corpus: &GraphCorpus) -> Result<Checkpoint> {
        Ok(pretrain(corpus, &self.model, &self.train, &self.wavelet)?.checkpoint)
    }

    pub fn evaluate(&self, ckpt: &Checkpoint, graphs: &[Graph], corpus_id: &str) -> Result<ReconReport> {
        reconstruction_accuracy(
            &ModelPredictor::new(ckpt),
            graphs,
            &ckpt.model.hops,
            MaskMode::Masked,
            self.train.threshold,
            self.eval_seed,
            corpus_id,
        )
    }
}

/// Graphs used for evaluation: the validation split, or every graph when
/// there is none.
pub fn held_out(corpus: &GraphCorpus) -> Vec<Graph> {
    if corpus.valid.is_empty() {
        corpus.graphs.clone()
    } else {
        corpus.valid_graphs().cloned().collect()
    }
}

/// `k` scales spaced geometrically on `[min, max]`; a single channel uses `min`.
pub fn geometric_scales(k: usize, min: f64, max: f64) -> Result<Vec<f64>> {
    if k == 0 || !(min > 0.0) || !(max >= min) {
        return Err(Error::InvalidParam(format!(
            "need k >= 1 and 0 < min <= max, got k={k}, min={min}, max={max}"
        )));
    }
    if k == 1 {
        return Ok(vec![min]);
    }
    let ratio = (max / min).ln() / (k - 1) as f64;
    Ok((0..k).map(|i| if i + 1 == k { max } else { min * (ratio * i as f64).exp() }).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRow {
    pub channels: usize,
    pub scales: Vec<f64>,
    pub report: ReconReport,
}

/// One trained model per wavelet-channel count, all other settings shared.
pub fn channel_ablation(
    corpus: &GraphCorpus,
    counts: &[usize],
    scale_range: (f64, f64),
    base: &RunConfig,
) -> Result<Vec<ChannelRow>> {
    let eval = held_out(corpus);
    counts
        .par_iter()
        .map(|&k| {
            let scales = geometric_scales(k, scale_range.0, scale_range.1)?;
            let mut run = base.clone();
            run.model.wavelet_channels = k;
            run.wavelet.scales = scales.clone();
            let ckpt = run.fit(corpus)?;
            let report = run.evaluate(&ckpt, &eval, "corpus")?;
            Ok(ChannelRow { channels: k, scales, report })
        })
        .collect()
}

pub fn channel_ablation_csv(rows: &[ChannelRow], writer: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["channels", "scales", "hop", "masked_accuracy", "unmasked_accuracy"])?;
    for row in rows {
        let scales = row.scales.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(";");
        let rep = &row.report;
        for (c, hop) in rep.hops.iter().enumerate() {
            w.write_record([
                row.channels.to_string(),
                scales.clone(),
                hop.to_string(),
                fmt6(rep.masked[c]),
                fmt6(Some(rep.unmasked[c])),
            ])?;
        }
        w.write_record([
            row.channels.to_string(),
            scales,
            "aggregate".into(),
            fmt6(rep.masked_aggregate()),
            fmt6(rep.unmasked_aggregate()),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Paired runs with masking on and off.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskAblation {
    pub masked: ReconReport,
    pub unmasked: ReconReport,
    /// Hops that are all-ones on every evaluation graph.
    pub saturated_hops: Vec<usize>,
}

impl MaskAblation {
    /// Masked-accuracy mean over hops that are not saturated everywhere.
    pub fn non_saturated_aggregate(report: &ReconReport) -> Option<f64> {
        report.masked_aggregate()
    }
}

pub fn mask_ablation(corpus: &GraphCorpus, base: &RunConfig) -> Result<MaskAblation> {
    let eval = held_out(corpus);
    let runs: Vec<ReconReport> = [true, false]
        .par_iter()
        .map(|&masking| {
            let mut run = base.clone();
            run.train.masking = masking;
            let ckpt = run.fit(corpus)?;
            run.evaluate(&ckpt, &eval, if masking { "masked" } else { "unmasked" })
        })
        .collect::<Result<_>>()?;
    let [masked, unmasked]: [ReconReport; 2] = runs.try_into().expect("two runs");
    let saturated_hops = masked.hops.iter().zip(&masked.masked).filter(|(_, a)| a.is_none()).map(|(h, _)| *h).collect();
    Ok(MaskAblation { masked, unmasked, saturated_hops })
}

pub fn mask_ablation_csv(result: &MaskAblation, writer: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["training", "hop", "saturated", "masked_accuracy", "unmasked_accuracy"])?;
    for (name, rep) in [("masked", &result.masked), ("unmasked", &result.unmasked)] {
        for (c, hop) in rep.hops.iter().enumerate() {
            w.write_record([
                name.to_string(),
                hop.to_string(),
                result.saturated_hops.contains(hop).to_string(),
                fmt6(rep.masked[c]),
                fmt6(Some(rep.unmasked[c])),
            ])?;
        }
        w.write_record([
            name.to_string(),
            "non_saturated".into(),
            "false".into(),
            fmt6(MaskAblation::non_saturated_aggregate(rep)),
            String::new(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Train-corpus by eval-corpus hop-1 masked accuracy.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossMatrix {
    pub names: Vec<String>,
    /// `values[train][eval]`.
    pub values: Vec<Vec<f64>>,
}

pub fn cross_corpus_matrix(corpora: &[(String, GraphCorpus)], base: &RunConfig) -> Result<CrossMatrix> {
    if corpora.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    if !base.model.hops.contains(&1) {
        return Err(Error::UnknownHop(1));
    }
    let evals: Vec<Vec<Graph>> = corpora.iter().map(|(_, c)| held_out(c)).collect();
    let ckpts: Vec<Checkpoint> = corpora.par_iter().map(|(_, c)| base.fit(c)).collect::<Result<_>>()?;
    let values = ckpts
        .par_iter()
        .map(|ckpt| {
            corpora
                .iter()
                .zip(&evals)
                .map(|((name, _), graphs)| {
                    let rep = base.evaluate(ckpt, graphs, name)?;
                    Ok(rep.masked_for(1)?.unwrap_or(f64::NAN))
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    Ok(CrossMatrix { names: corpora.iter().map(|(n, _)| n.clone()).collect(), values })
}

pub fn cross_matrix_csv(m: &CrossMatrix, writer: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["train".to_string()];
    header.extend(m.names.iter().cloned());
    w.write_record(&header)?;
    for (name, row) in m.names.iter().zip(&m.values) {
        let mut rec = vec![name.clone()];
        rec.extend(row.iter().map(|&v| fmt6(Some(v))));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{gen_synthetic, Family, SyntheticKind};
    use crate::spectral::WaveletMethod;

    fn run() -> RunConfig {
        RunConfig {
            model: ModelConfig {
                wavelet_channels: 2,
                encoder_widths: vec![4],
                latent_hidden: 4,
                latent_dim: 3,
                decoder_widths: vec![4],
                head_widths: vec![4],
                hops: vec![1, 2, 8],
            },
            train: TrainConfig { epochs: 2, batch_size: 4, seed: 5, learning_rate: 1e-2, ..TrainConfig::default() },
            wavelet: WaveletConfig { scales: vec![1.0, 4.0], method: WaveletMethod::Exact },
            eval_seed: 9,
        }
    }

    fn corpus(seed: u64) -> GraphCorpus {
        GraphCorpus::synthetic_mix(&[Family::Tree, Family::Cycle], 8, (5, 8), seed).unwrap().split(0.25, 0).unwrap()
    }

    #[test]
    fn geometric_scales_span_range() {
        assert_eq!(geometric_scales(1, 1.0, 16.0).unwrap(), vec![1.0]);
        let s = geometric_scales(5, 1.0, 16.0).unwrap();
        for (a, b) in s.iter().zip([1.0, 2.0, 4.0, 8.0, 16.0]) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(geometric_scales(0, 1.0, 2.0).is_err());
    }

    #[test]
    fn channel_ablation_is_deterministic_and_allows_many_channels() {
        let c = corpus(1);
        let a = channel_ablation(&c, &[1, 12], (1.0, 16.0), &run()).unwrap();
        let b = channel_ablation(&c, &[1, 12], (1.0, 16.0), &run()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a[1].scales.len(), 12);
        let mut buf = Vec::new();
        channel_ablation_csv(&a, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 1 + 2 * 4);
    }

    #[test]
    fn mask_ablation_flags_saturated_hops() {
        // Odd cycles and barbells are non-bipartite with small diameter, so hop 8 is all-ones.
        let graphs = (0..8)
            .map(|i| {
                let kind = if i % 2 == 0 {
                    SyntheticKind::Cycle { n: 5 + 2 * (i % 3) }
                } else {
                    SyntheticKind::Barbell { clique: 3, bridge: 1 }
                };
                gen_synthetic(kind, i as u64, false).unwrap()
            })
            .collect();
        let c = GraphCorpus::new(graphs).split(0.25, 0).unwrap();
        let res = mask_ablation(&c, &run()).unwrap();
        assert_eq!(res.saturated_hops, vec![8]);
        assert_eq!(res.masked.masked[2], None);
        assert_eq!(res, mask_ablation(&c, &run()).unwrap());
    }

    #[test]
    fn single_corpus_matrix_matches_reconstruction() {
        let c = corpus(3);
        let m = cross_corpus_matrix(&[("a".into(), c.clone())], &run()).unwrap();
        let ckpt = run().fit(&c).unwrap();
        let rep = run().evaluate(&ckpt, &held_out(&c), "a").unwrap();
        assert_eq!(m.values, vec![vec![rep.masked[0].unwrap()]]);
        let mut buf = Vec::new();
        cross_matrix_csv(&m, &mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("train,a\na,"));
    }
}
