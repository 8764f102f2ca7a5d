use ndarray::Array3;
use rand::seq::index;

use crate::error::{Error, Result};
use crate::graph::HopAdjacencyStack;
use crate::rng::Rng;

/// Kept-entry counts for one hop channel, counted on the upper triangle
/// including the diagonal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChannelMask {
    pub edges_kept: usize,
    pub nonedges_kept: usize,
    /// The target channel had no edges or no non-edges.
    pub saturated: bool,
}

impl ChannelMask {
    pub fn is_active(&self) -> bool {
        self.edges_kept + self.nonedges_kept > 0
    }
}

/// Symmetric binary mask over `n x n x r`; `1` marks an entry scored by the loss.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskTensor {
    pub data: Array3<u8>,
    pub per_channel: Vec<ChannelMask>,
}

impl MaskTensor {
    /// Keep every entry (masking disabled). Channels are never skipped.
    pub fn full(targets: &HopAdjacencyStack) -> Self {
        let n = targets.n();
        let data = Array3::from_elem(targets.data.dim(), 1u8);
        let per_channel = (0..targets.channels())
            .map(|c| {
                let (edges, nonedges) = upper_counts(targets, c);
                debug_assert_eq!(edges + nonedges, n * (n + 1) / 2);
                ChannelMask { edges_kept: edges, nonedges_kept: nonedges, saturated: edges == 0 || nonedges == 0 }
            })
            .collect();
        Self { data, per_channel }
    }
}

fn upper_counts(targets: &HopAdjacencyStack, c: usize) -> (usize, usize) {
    let n = targets.n();
    let mut edges = 0;
    for u in 0..n {
        for v in u..n {
            edges += usize::from(targets.data[[u, v, c]]);
        }
    }
    (edges, n * (n + 1) / 2 - edges)
}

/// Class-balanced mask: per channel keep `m = min(#edges, #non-edges, threshold)`
/// entries of each class, drawn without replacement from the upper triangle
/// (diagonal included) and mirrored.
pub fn sample_mask(targets: &HopAdjacencyStack, threshold: usize, rng: &mut Rng) -> Result<MaskTensor> {
    if threshold == 0 {
        return Err(Error::InvalidParam("mask threshold must be >= 1".into()));
    }
    let n = targets.n();
    let mut data = Array3::zeros(targets.data.dim());
    let mut per_channel = Vec::with_capacity(targets.channels());
    for c in 0..targets.channels() {
        let mut edges = Vec::new();
        let mut nonedges = Vec::new();
        for u in 0..n {
            for v in u..n {
                if targets.data[[u, v, c]] == 1 {
                    edges.push((u, v));
                } else {
                    nonedges.push((u, v));
                }
            }
        }
        let m = edges.len().min(nonedges.len()).min(threshold);
        for pool in [&edges, &nonedges] {
            for i in index::sample(rng, pool.len(), m) {
                let (u, v) = pool[i];
                data[[u, v, c]] = 1;
                data[[v, u, c]] = 1;
            }
        }
        per_channel.push(ChannelMask {
            edges_kept: m,
            nonedges_kept: m,
            saturated: edges.is_empty() || nonedges.is_empty(),
        });
    }
    Ok(MaskTensor { data, per_channel })
}
