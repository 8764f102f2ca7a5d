use ndarray::{ArrayView1, ArrayView2};
use rand::Rng as _;

use super::ModelConfig;
use crate::error::{Error, Result};
use crate::rng::{substream, Purpose};

/// A named contiguous slice of the flat parameter vector, read as a
/// row-major `rows x cols` matrix (`rows == 1` for biases).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    pub name: String,
    pub offset: usize,
    pub rows: usize,
    pub cols: usize,
}

impl Block {
    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn range(&self) -> std::ops::Range<usize> {
        self.offset..self.offset + self.len()
    }
}

/// Weights of one second-order layer. `w[i]` is `c_in x c_out` for basis map
/// `i`: identity, transpose, row broadcast, column broadcast, diagonal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SecondOrderBlocks {
    pub w: [Block; 5],
    pub b: Block,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DenseBlocks {
    pub w: Block,
    pub b: Block,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamLayout {
    pub encoder: Vec<SecondOrderBlocks>,
    pub latent: Vec<DenseBlocks>,
    pub decoder: Vec<SecondOrderBlocks>,
    pub head: Vec<DenseBlocks>,
    pub total: usize,
}

struct Builder {
    offset: usize,
}

impl Builder {
    fn block(&mut self, name: String, rows: usize, cols: usize) -> Block {
        let b = Block { name, offset: self.offset, rows, cols };
        self.offset += rows * cols;
        b
    }

    fn second_order(&mut self, prefix: &str, c_in: usize, c_out: usize) -> SecondOrderBlocks {
        const BASIS: [&str; 5] = ["identity", "transpose", "row", "col", "diag"];
        let w = BASIS.map(|basis| self.block(format!("{prefix}.w_{basis}"), c_in, c_out));
        let b = self.block(format!("{prefix}.bias"), 1, c_out);
        SecondOrderBlocks { w, b }
    }

    fn dense(&mut self, prefix: &str, c_in: usize, c_out: usize) -> DenseBlocks {
        let w = self.block(format!("{prefix}.weight"), c_in, c_out);
        let b = self.block(format!("{prefix}.bias"), 1, c_out);
        DenseBlocks { w, b }
    }
}

impl ParamLayout {
    pub fn new(config: &ModelConfig) -> Self {
        let mut bld = Builder { offset: 0 };
        let mut c = config.wavelet_channels;
        let mut encoder = Vec::new();
        for (i, &w) in config.encoder_widths.iter().enumerate() {
            encoder.push(bld.second_order(&format!("encoder.{i}"), c, w));
            c = w;
        }
        let latent = vec![
            bld.dense("latent.0", 2 * c, config.latent_hidden),
            bld.dense("latent.1", config.latent_hidden, config.latent_dim),
        ];
        c = config.lifted_channels();
        let mut decoder = Vec::new();
        for (i, &w) in config.decoder_widths.iter().enumerate() {
            decoder.push(bld.second_order(&format!("decoder.{i}"), c, w));
            c = w;
        }
        let mut head = Vec::new();
        for (i, &w) in config.head_widths.iter().chain(std::iter::once(&config.num_hops())).enumerate() {
            head.push(bld.dense(&format!("head.{i}"), c, w));
            c = w;
        }
        Self { encoder, latent, decoder, head, total: bld.offset }
    }

    /// All blocks in storage order.
    pub fn blocks(&self) -> Vec<&Block> {
        let mut out = Vec::new();
        for l in &self.encoder {
            out.extend(l.w.iter());
            out.push(&l.b);
        }
        for l in &self.latent {
            out.extend([&l.w, &l.b]);
        }
        for l in &self.decoder {
            out.extend(l.w.iter());
            out.push(&l.b);
        }
        for l in &self.head {
            out.extend([&l.w, &l.b]);
        }
        out
    }

    pub fn find(&self, name: &str) -> Option<&Block> {
        self.blocks().into_iter().find(|b| b.name == name)
    }

    /// The block containing flat index `i`.
    pub fn block_of(&self, i: usize) -> Option<&Block> {
        self.blocks().into_iter().find(|b| b.range().contains(&i))
    }
}

/// Flat parameter vector plus its layout.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub values: Vec<f64>,
    pub layout: ParamLayout,
    pub init_seed: u64,
}

impl ModelParams {
    /// Glorot-uniform weights per block, zero biases.
    pub fn init(config: &ModelConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let layout = ParamLayout::new(config);
        let mut values = vec![0.0; layout.total];
        let mut rng = substream(seed, Purpose::Init, 0);
        for block in layout.blocks() {
            if block.rows == 1 && block.name.ends_with("bias") {
                continue;
            }
            let bound = (6.0 / (block.rows + block.cols) as f64).sqrt();
            for v in &mut values[block.range()] {
                *v = rng.random_range(-bound..=bound);
            }
        }
        Ok(Self { values, layout, init_seed: seed })
    }

    pub fn from_values(config: &ModelConfig, values: Vec<f64>, init_seed: u64) -> Result<Self> {
        config.validate()?;
        let layout = ParamLayout::new(config);
        if values.len() != layout.total {
            return Err(Error::Shape(format!(
                "parameter vector has {} values, layout needs {}",
                values.len(),
                layout.total
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            let name = layout.block_of(i).map(|b| b.name.clone()).unwrap_or_default();
            return Err(Error::InvalidParam(format!("non-finite parameter in block `{name}`")));
        }
        Ok(Self { values, layout, init_seed })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn matrix(&self, b: &Block) -> ArrayView2<'_, f64> {
        ArrayView2::from_shape((b.rows, b.cols), &self.values[b.range()]).expect("layout shape")
    }

    pub fn vector(&self, b: &Block) -> ArrayView1<'_, f64> {
        ArrayView1::from(&self.values[b.range()])
    }

    /// FNV-1a over the parameter bit patterns; identifies a parameter state.
    pub fn fingerprint(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for v in &self.values {
            for byte in v.to_bits().to_le_bytes() {
                h ^= u64::from(byte);
                h = h.wrapping_mul(0x0100_0000_01b3);
            }
        }
        h
    }
}
