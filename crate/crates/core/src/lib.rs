//! Multi-resolution spectral graph wavelets and a permutation-equivariant
//! autoencoder that learns node structural encodings by reconstructing
//! multi-hop adjacency.
//!
//! Pipeline: [`graph`] builds graphs and exact hop targets, [`spectral`] turns a
//! graph into an `n x n x k` heat-kernel wavelet tensor, [`net`] encodes that
//! tensor into per-node latents and decodes hop predictions, [`train`] fits the
//! model under a class-balanced masked loss, and [`eval`] scores
//! reconstructions and runs the ablations.

pub mod error;
pub mod eval;
pub mod graph;
pub mod net;
pub mod rng;
pub mod selftest;
pub mod spectral;
pub mod tensor;
pub mod train;

pub use error::{Error, Result};
