use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::validate_hops;

/// Architecture of the high-order autoencoder.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelConfig {
    /// Number of wavelet scales `k` in the input tensor.
    pub wavelet_channels: usize,
    pub encoder_widths: Vec<usize>,
    /// Hidden width of the per-node MLP that produces the latent.
    pub latent_hidden: usize,
    pub latent_dim: usize,
    pub decoder_widths: Vec<usize>,
    /// Hidden widths of the per-entry prediction head.
    pub head_widths: Vec<usize>,
    pub hops: Vec<usize>,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            wavelet_channels: 4,
            encoder_widths: vec![8, 16, 32],
            latent_hidden: 32,
            latent_dim: 20,
            decoder_widths: vec![32, 16, 8],
            head_widths: vec![32, 32],
            hops: vec![1, 2, 4, 8, 16, 32, 64, 128],
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        let widths = [
            ("wavelet_channels", self.wavelet_channels),
            ("latent_hidden", self.latent_hidden),
            ("latent_dim", self.latent_dim),
        ];
        for (name, w) in widths {
            if w == 0 {
                return Err(Error::InvalidParam(format!("{name} must be positive")));
            }
        }
        for (name, list) in [
            ("encoder_widths", &self.encoder_widths),
            ("decoder_widths", &self.decoder_widths),
            ("head_widths", &self.head_widths),
        ] {
            if list.contains(&0) {
                return Err(Error::InvalidParam(format!("{name} must all be positive, got {list:?}")));
            }
        }
        validate_hops(&self.hops)
    }

    pub fn num_hops(&self) -> usize {
        self.hops.len()
    }

    /// Channels of the lifted decoder input: outer products then diagonal embeddings.
    pub fn lifted_channels(&self) -> usize {
        2 * self.latent_dim
    }

    /// Channels leaving the encoder's second-order stack.
    pub fn encoder_out_channels(&self) -> usize {
        self.encoder_widths.last().copied().unwrap_or(self.wavelet_channels)
    }

    pub fn decoder_out_channels(&self) -> usize {
        self.decoder_widths.last().copied().unwrap_or(self.lifted_channels())
    }
}
