use ndarray::Array3;

use super::Graph;
use crate::error::{Error, Result};

/// Binary hop targets: channel `i` marks node pairs joined by a walk of length
/// exactly `hops[i]`, i.e. the support of `A^hops[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct HopAdjacencyStack {
    pub hops: Vec<usize>,
    /// `n x n x r`, entries 0 or 1.
    pub data: Array3<u8>,
}

impl HopAdjacencyStack {
    pub fn n(&self) -> usize {
        self.data.shape()[0]
    }

    pub fn channels(&self) -> usize {
        self.hops.len()
    }

    pub fn channel_index(&self, hop: usize) -> Option<usize> {
        self.hops.iter().position(|&h| h == hop)
    }
}

pub(crate) fn validate_hops(hops: &[usize]) -> Result<()> {
    if hops.is_empty() {
        return Err(Error::InvalidParam("hop list is empty".into()));
    }
    if hops.contains(&0) {
        return Err(Error::InvalidParam("hop 0 is not allowed".into()));
    }
    if hops.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParam(format!("hops must be strictly ascending, got {hops:?}")));
    }
    Ok(())
}

/// Dense boolean matrix with bit-packed rows.
#[derive(Clone, PartialEq)]
struct BitMatrix {
    n: usize,
    words: usize,
    bits: Vec<u64>,
}

impl BitMatrix {
    fn zeros(n: usize) -> Self {
        let words = n.div_ceil(64);
        Self { n, words, bits: vec![0; n * words] }
    }

    fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.set(i, i);
        }
        m
    }

    fn set(&mut self, r: usize, c: usize) {
        self.bits[r * self.words + c / 64] |= 1 << (c % 64);
    }

    fn get(&self, r: usize, c: usize) -> bool {
        self.bits[r * self.words + c / 64] >> (c % 64) & 1 == 1
    }

    fn row(&self, r: usize) -> &[u64] {
        &self.bits[r * self.words..(r + 1) * self.words]
    }

    fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zeros(self.n);
        for r in 0..self.n {
            let dst = r * self.words;
            for k in 0..self.n {
                if self.get(r, k) {
                    for (w, &b) in other.row(k).iter().enumerate() {
                        out.bits[dst + w] |= b;
                    }
                }
            }
        }
        out
    }
}

/// Exact hop targets by boolean exponentiation (repeated squaring).
pub fn hop_adjacency_stack(g: &Graph, hops: &[usize]) -> Result<HopAdjacencyStack> {
    validate_hops(hops)?;
    let n = g.n();
    let mut base = BitMatrix::zeros(n);
    for &(u, v) in g.edges() {
        base.set(u, v);
        base.set(v, u);
    }
    let max_hop = *hops.last().expect("validated non-empty");
    // squares[i] = A^(2^i)
    let mut squares = vec![base];
    while (1usize << squares.len()) <= max_hop {
        let last = squares.last().unwrap();
        squares.push(last.mul(last));
    }
    let mut data = Array3::zeros((n, n, hops.len()));
    for (c, &hop) in hops.iter().enumerate() {
        let mut acc = BitMatrix::identity(n);
        for (bit, sq) in squares.iter().enumerate() {
            if hop >> bit & 1 == 1 {
                acc = acc.mul(sq);
            }
        }
        for u in 0..n {
            for v in 0..n {
                if acc.get(u, v) {
                    data[[u, v, c]] = 1;
                }
            }
        }
    }
    Ok(HopAdjacencyStack { hops: hops.to_vec(), data })
}
