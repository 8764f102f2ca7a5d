//! The high-order permutation-equivariant autoencoder.
//!
//! Encoder: second-order layers on the wavelet tensor, pooled to nodes through
//! the diagonal and the normalized row sum, then a per-node MLP to the latent
//! `Z`. Decoder: `Z` lifted by outer products and diagonal embeddings,
//! second-order layers, then a per-entry MLP head giving one logit per hop.

mod config;
pub mod layers;
mod model;
pub mod ops;
mod params;

pub use config::ModelConfig;
pub use layers::{second_order_layer, SecondOrderWeights};
pub use model::{
    backward, decoder_forward, encoder_forward, extract_pe, forward_full, sigmoid, write_pe_csv, DecoderTrace,
    EncoderTrace, ForwardTrace, LatentMatrix,
};
pub use ops::{eq_diag_embed, eq_diag_extract, eq_outer_product, eq_row_sum};
pub use params::{Block, DenseBlocks, ModelParams, ParamLayout, SecondOrderBlocks};
pub use crate::tensor::permute_graph_action;
