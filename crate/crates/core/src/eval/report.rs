use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{masked_accuracy, unmasked_accuracy};
use super::predictor::Predictor;
use crate::error::{Error, Result};
use crate::graph::{hop_adjacency_stack, Graph};
use crate::train::evaluation_mask;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MaskMode {
    Masked,
    Unmasked,
}

/// Per-hop reconstruction accuracy of one predictor on one set of graphs.
#[derive(Debug, Clone, PartialEq)]
pub struct ReconReport {
    pub corpus_id: String,
    pub checkpoint_id: String,
    /// Mode used for [`ReconReport::aggregate`].
    pub mode: MaskMode,
    pub hops: Vec<usize>,
    /// Balanced-mask accuracy; `None` if the hop is saturated on every graph.
    pub masked: Vec<Option<f64>>,
    pub unmasked: Vec<f64>,
    /// Upper-triangle entries scored under the mask, summed over graphs.
    pub kept: Vec<usize>,
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, count) = values.fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
    (count > 0).then(|| sum / count as f64)
}

impl ReconReport {
    pub fn masked_aggregate(&self) -> Option<f64> {
        mean(self.masked.iter().flatten().copied())
    }

    pub fn unmasked_aggregate(&self) -> Option<f64> {
        mean(self.unmasked.iter().copied())
    }

    pub fn aggregate(&self) -> Option<f64> {
        match self.mode {
            MaskMode::Masked => self.masked_aggregate(),
            MaskMode::Unmasked => self.unmasked_aggregate(),
        }
    }

    /// Accuracy per hop in the report's mode.
    pub fn accuracy(&self) -> Vec<Option<f64>> {
        match self.mode {
            MaskMode::Masked => self.masked.clone(),
            MaskMode::Unmasked => self.unmasked.iter().map(|&a| Some(a)).collect(),
        }
    }

    pub fn masked_for(&self, hop: usize) -> Result<Option<f64>> {
        let c = self.hops.iter().position(|&h| h == hop).ok_or(Error::UnknownHop(hop))?;
        Ok(self.masked[c])
    }
}

/// Scores `predictor` on `graphs` at `hops`, thresholding at 0.5.
///
/// Masked scoring uses a fresh balanced mask per graph drawn from `seed`
/// (graph `i` uses substream `i`); unmasked scoring covers all `n x n`
/// entries. Per-hop values are means over graphs.
pub fn reconstruction_accuracy(
    predictor: &dyn Predictor,
    graphs: &[Graph],
    hops: &[usize],
    mode: MaskMode,
    threshold: usize,
    seed: u64,
    corpus_id: &str,
) -> Result<ReconReport> {
    super::predictor::channel_indices(predictor.hops(), hops)?;
    let per_graph: Vec<(Vec<Option<f64>>, Vec<f64>, Vec<usize>)> = graphs
        .par_iter()
        .enumerate()
        .map(|(i, g)| {
            let targets = hop_adjacency_stack(g, hops)?;
            let probs = predictor.predict_hops(g, hops)?;
            let mask = evaluation_mask(&targets, threshold, seed, i)?;
            let kept = mask.per_channel.iter().map(|c| c.edges_kept + c.nonedges_kept).collect();
            Ok((masked_accuracy(&probs, &targets, &mask), unmasked_accuracy(&probs, &targets), kept))
        })
        .collect::<Result<_>>()?;
    let r = hops.len();
    Ok(ReconReport {
        corpus_id: corpus_id.to_string(),
        checkpoint_id: predictor.id(),
        mode,
        hops: hops.to_vec(),
        masked: (0..r).map(|c| mean(per_graph.iter().filter_map(|p| p.0[c]))).collect(),
        unmasked: (0..r).map(|c| mean(per_graph.iter().map(|p| p.1[c])).unwrap_or(f64::NAN)).collect(),
        kept: (0..r).map(|c| per_graph.iter().map(|p| p.2[c]).sum()).collect(),
    })
}

pub(crate) fn fmt6(v: Option<f64>) -> String {
    v.map_or_else(|| "skipped".to_string(), |x| format!("{x:.6}"))
}

pub const REPORT_HEADER: [&str; 6] = ["corpus", "checkpoint", "hop", "masked_accuracy", "unmasked_accuracy", "kept_entries"];

/// One row per hop plus an `aggregate` row. Skipped hops print `skipped`.
pub fn report_csv(report: &ReconReport, writer: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(REPORT_HEADER)?;
    for (c, hop) in report.hops.iter().enumerate() {
        w.write_record([
            report.corpus_id.clone(),
            report.checkpoint_id.clone(),
            hop.to_string(),
            fmt6(report.masked[c]),
            fmt6(Some(report.unmasked[c])),
            report.kept[c].to_string(),
        ])?;
    }
    if !report.hops.is_empty() {
        w.write_record([
            report.corpus_id.clone(),
            report.checkpoint_id.clone(),
            "aggregate".into(),
            fmt6(report.masked_aggregate()),
            fmt6(report.unmasked_aggregate()),
            report.kept.iter().sum::<usize>().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_report(report: &ReconReport, path: impl AsRef<std::path::Path>) -> Result<()> {
    report_csv(report, std::io::BufWriter::new(std::fs::File::create(path)?))
}

/// A parsed row of [`report_csv`] output.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct ReportRow {
    pub corpus: String,
    pub checkpoint: String,
    pub hop: String,
    #[serde(deserialize_with = "skippable")]
    pub masked_accuracy: Option<f64>,
    #[serde(deserialize_with = "skippable")]
    pub unmasked_accuracy: Option<f64>,
    pub kept_entries: usize,
}

fn skippable<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Option<f64>, D::Error> {
    let s = String::deserialize(d)?;
    if s == "skipped" {
        return Ok(None);
    }
    s.parse().map(Some).map_err(serde::de::Error::custom)
}

pub fn parse_report_csv(reader: impl Read) -> Result<Vec<ReportRow>> {
    let mut r = csv::Reader::from_reader(reader);
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::predictor::{Constant, GroundTruth};
    use crate::graph::{gen_synthetic, SyntheticKind};

    fn graphs() -> Vec<Graph> {
        vec![
            gen_synthetic(SyntheticKind::Tree { n: 12 }, 1, false).unwrap(),
            gen_synthetic(SyntheticKind::Grid { rows: 3, cols: 4 }, 0, false).unwrap(),
            gen_synthetic(SyntheticKind::Cycle { n: 7 }, 0, false).unwrap(),
        ]
    }

    #[test]
    fn ground_truth_scores_one_in_both_modes() {
        let hops = [1, 2, 4, 8];
        let gt = GroundTruth { hops: hops.to_vec() };
        for mode in [MaskMode::Masked, MaskMode::Unmasked] {
            let rep = reconstruction_accuracy(&gt, &graphs(), &hops, mode, 100, 3, "mix").unwrap();
            assert_eq!(rep.aggregate(), Some(1.0));
            assert!(rep.unmasked.iter().all(|&a| a == 1.0));
            assert!(rep.masked.iter().flatten().all(|&a| a == 1.0));
        }
    }

    #[test]
    fn constant_half_scores_half_on_balanced_entries() {
        let pred = Constant { hops: vec![1, 2], value: 0.5 };
        let rep = reconstruction_accuracy(&pred, &graphs(), &[1, 2], MaskMode::Masked, 100, 0, "mix").unwrap();
        for a in rep.masked {
            assert_eq!(a, Some(0.5));
        }
    }

    #[test]
    fn unknown_hop_is_rejected() {
        let gt = GroundTruth { hops: vec![1, 2] };
        let err = reconstruction_accuracy(&gt, &graphs(), &[3], MaskMode::Masked, 10, 0, "x").unwrap_err();
        assert!(matches!(err, Error::UnknownHop(3)));
    }

    #[test]
    fn saturated_hops_are_skipped() {
        let k4 = Graph::new(4, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap();
        let gt = GroundTruth { hops: vec![1, 2] };
        let rep = reconstruction_accuracy(&gt, &[k4], &[1, 2], MaskMode::Masked, 100, 0, "k4").unwrap();
        assert_eq!(rep.masked, vec![Some(1.0), None]);
        assert_eq!(rep.kept, vec![8, 0]);
    }

    #[test]
    fn csv_formats_and_round_trips() {
        let rep = ReconReport {
            corpus_id: "c".into(),
            checkpoint_id: "k".into(),
            mode: MaskMode::Masked,
            hops: vec![1, 2],
            masked: vec![Some(1.0), None],
            unmasked: vec![0.123456789, 0.5],
            kept: vec![10, 0],
        };
        let mut buf = Vec::new();
        report_csv(&rep, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.contains("c,k,1,1.000000,0.123457,10"));
        assert!(text.contains("c,k,2,skipped,0.500000,0"));
        let rows = parse_report_csv(buf.as_slice()).unwrap();
        assert_eq!(rows.len(), 3);
        assert!((rows[0].unmasked_accuracy.unwrap() - 0.123456789).abs() <= 1e-6);
        assert_eq!(rows[1].masked_accuracy, None);
        assert_eq!(rows[2].hop, "aggregate");
    }

    #[test]
    fn empty_report_is_header_only() {
        let rep = ReconReport {
            corpus_id: "c".into(),
            checkpoint_id: "k".into(),
            mode: MaskMode::Unmasked,
            hops: vec![],
            masked: vec![],
            unmasked: vec![],
            kept: vec![],
        };
        let mut buf = Vec::new();
        report_csv(&rep, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), REPORT_HEADER.join(",") + "\n");
    }
}
