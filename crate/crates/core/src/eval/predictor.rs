use ndarray::{Array3, Axis};

use crate::error::{Error, Result};
use crate::graph::{hop_adjacency_stack, Graph};
use crate::net::forward_full;
use crate::train::Checkpoint;

/// Anything producing per-hop edge probabilities (`n x n x r`) for a graph.
pub trait Predictor: Sync {
    fn hops(&self) -> &[usize];

    fn predict(&self, g: &Graph) -> Result<Array3<f64>>;

    fn id(&self) -> String;

    /// Predictions restricted (and reordered) to `hops`.
    fn predict_hops(&self, g: &Graph, hops: &[usize]) -> Result<Array3<f64>> {
        let idx = channel_indices(self.hops(), hops)?;
        Ok(self.predict(g)?.select(Axis(2), &idx))
    }
}

pub(crate) fn channel_indices(available: &[usize], requested: &[usize]) -> Result<Vec<usize>> {
    requested
        .iter()
        .map(|h| available.iter().position(|a| a == h).ok_or(Error::UnknownHop(*h)))
        .collect()
}

/// The decoder of a trained checkpoint.
pub struct ModelPredictor<'a> {
    pub checkpoint: &'a Checkpoint,
}

impl<'a> ModelPredictor<'a> {
    pub fn new(checkpoint: &'a Checkpoint) -> Self {
        Self { checkpoint }
    }
}

impl Predictor for ModelPredictor<'_> {
    fn hops(&self) -> &[usize] {
        &self.checkpoint.model.hops
    }

    fn predict(&self, g: &Graph) -> Result<Array3<f64>> {
        let w = self.checkpoint.wavelet.compute(g)?;
        let trace = forward_full(w.data.view(), &self.checkpoint.params, &self.checkpoint.model)?;
        Ok(trace.decoder.probs)
    }

    fn id(&self) -> String {
        self.checkpoint.id()
    }
}

/// Returns the true hop targets.
pub struct GroundTruth {
    pub hops: Vec<usize>,
}

impl Predictor for GroundTruth {
    fn hops(&self) -> &[usize] {
        &self.hops
    }

    fn predict(&self, g: &Graph) -> Result<Array3<f64>> {
        Ok(hop_adjacency_stack(g, &self.hops)?.data.mapv(f64::from))
    }

    fn id(&self) -> String {
        "ground-truth".into()
    }
}

/// Predicts the same probability everywhere.
pub struct Constant {
    pub hops: Vec<usize>,
    pub value: f64,
}

impl Predictor for Constant {
    fn hops(&self) -> &[usize] {
        &self.hops
    }

    fn predict(&self, g: &Graph) -> Result<Array3<f64>> {
        Ok(Array3::from_elem((g.n(), g.n(), self.hops.len()), self.value))
    }

    fn id(&self) -> String {
        format!("constant-{}", self.value)
    }
}
