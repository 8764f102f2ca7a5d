//! Permutation action on node-indexed tensors.
//!
//! A permutation `perm` sends node `u` to `perm[u]`. Acting on a tensor whose
//! first `order` axes are node axes moves entry `x[u, v, .., c]` to
//! `out[perm[u], perm[v], .., c]`, i.e. `P A Pᵀ` for matrices.

use ndarray::{ArrayD, Dimension, IxDyn};

use crate::error::{Error, Result};

pub fn validate_permutation(perm: &[usize], n: usize) -> Result<()> {
    if perm.len() != n {
        return Err(Error::InvalidPermutation(format!("length {} for n = {n}", perm.len())));
    }
    let mut seen = vec![false; n];
    for &p in perm {
        if p >= n || std::mem::replace(&mut seen[p], true) {
            return Err(Error::InvalidPermutation(format!("{perm:?} is not a bijection on 0..{n}")));
        }
    }
    Ok(())
}

pub fn invert_permutation(perm: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; perm.len()];
    for (u, &p) in perm.iter().enumerate() {
        inv[p] = u;
    }
    inv
}

/// Apply the node permutation to the first `order` axes of `x`.
pub fn permute_graph_action<D: Dimension>(
    x: &ndarray::Array<f64, D>,
    order: usize,
    perm: &[usize],
) -> Result<ndarray::Array<f64, D>> {
    let shape = x.shape();
    if order > shape.len() {
        return Err(Error::Shape(format!("order {order} exceeds tensor rank {}", shape.len())));
    }
    for &len in &shape[..order] {
        validate_permutation(perm, len)?;
    }
    let mut out = ArrayD::zeros(IxDyn(shape));
    let mut target = vec![0usize; shape.len()];
    for (idx, &val) in x.view().into_dyn().indexed_iter() {
        for (axis, t) in target.iter_mut().enumerate() {
            *t = if axis < order { perm[idx[axis]] } else { idx[axis] };
        }
        out[IxDyn(&target)] = val;
    }
    Ok(out.into_dimensionality::<D>().expect("same rank"))
}
