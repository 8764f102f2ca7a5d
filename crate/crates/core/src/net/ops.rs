//! Equivariant maps between first-order (`n x c`) and second-order
//! (`n x n x c`) node tensors.

use ndarray::{Array2, Array3, ArrayView2, ArrayView3, Axis};

use crate::error::{Error, Result};

fn check_square(x: &ArrayView3<f64>) -> Result<usize> {
    let sh = x.shape();
    if sh[0] != sh[1] {
        return Err(Error::Shape(format!("expected n x n x c, got {sh:?}")));
    }
    Ok(sh[0])
}

/// `out[v, c] = x[v, v, c]`.
pub fn eq_diag_extract(x: ArrayView3<f64>) -> Result<Array2<f64>> {
    let n = check_square(&x)?;
    Ok(Array2::from_shape_fn((n, x.shape()[2]), |(v, c)| x[[v, v, c]]))
}

/// `out[u, c] = (1/n) Σ_v x[u, v, c]`.
pub fn eq_row_sum(x: ArrayView3<f64>) -> Result<Array2<f64>> {
    let n = check_square(&x)?;
    Ok(x.sum_axis(Axis(1)) / n as f64)
}

/// `out[u, v, i] = z[u, i] z[v, i]`.
pub fn eq_outer_product(z: ArrayView2<f64>) -> Array3<f64> {
    let (n, d) = z.dim();
    Array3::from_shape_fn((n, n, d), |(u, v, i)| z[[u, i]] * z[[v, i]])
}

/// `out[u, u, i] = z[u, i]`, zero elsewhere.
pub fn eq_diag_embed(z: ArrayView2<f64>) -> Array3<f64> {
    let (n, d) = z.dim();
    let mut out = Array3::zeros((n, n, d));
    for u in 0..n {
        for i in 0..d {
            out[[u, u, i]] = z[[u, i]];
        }
    }
    out
}

/// Outer products followed by diagonal embeddings along the channel axis.
pub fn lift(z: ArrayView2<f64>) -> Array3<f64> {
    let (n, d) = z.dim();
    let mut out = Array3::zeros((n, n, 2 * d));
    for u in 0..n {
        for v in 0..n {
            for i in 0..d {
                out[[u, v, i]] = z[[u, i]] * z[[v, i]];
            }
        }
        for i in 0..d {
            out[[u, u, d + i]] = z[[u, i]];
        }
    }
    out
}

/// `[diag ‖ normalized row sum]`, `n x 2c`.
pub fn pool(x: ArrayView3<f64>) -> Result<Array2<f64>> {
    let d = eq_diag_extract(x)?;
    let r = eq_row_sum(x)?;
    Ok(ndarray::concatenate![Axis(1), d, r])
}
