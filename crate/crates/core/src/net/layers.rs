//! Second-order equivariant linear layers and per-row dense layers, with
//! their reverse-mode gradients.

use ndarray::{Array1, Array2, Array3, ArrayView1, ArrayView2, ArrayView3, Axis};

use crate::error::{Error, Result};

/// Borrowed weights of one second-order layer.
///
/// `w[i]` is `c_in x c_out` for the basis maps, in order: identity, transpose,
/// row broadcast of row sums, column broadcast of row sums, diagonal.
#[derive(Debug, Clone, Copy)]
pub struct SecondOrderWeights<'a> {
    pub w: [ArrayView2<'a, f64>; 5],
    pub b: ArrayView1<'a, f64>,
}

impl SecondOrderWeights<'_> {
    pub fn c_in(&self) -> usize {
        self.w[0].nrows()
    }

    pub fn c_out(&self) -> usize {
        self.w[0].ncols()
    }

    fn check(&self, x: &ArrayView3<f64>) -> Result<()> {
        let (ci, co) = (self.c_in(), self.c_out());
        if self.w.iter().any(|w| w.dim() != (ci, co)) || self.b.len() != co {
            return Err(Error::Shape("second-order weights disagree on (c_in, c_out)".into()));
        }
        let sh = x.shape();
        if sh[0] != sh[1] || sh[2] != ci {
            return Err(Error::Shape(format!("layer expects n x n x {ci}, got {sh:?}")));
        }
        Ok(())
    }
}

/// Gradients of one second-order layer's weights.
pub struct SecondOrderGrads {
    pub w: [Array2<f64>; 5],
    pub b: Array1<f64>,
}

fn flat(x: &Array3<f64>) -> ArrayView2<'_, f64> {
    let (a, b, c) = x.dim();
    x.view().into_shape_with_order((a * b, c)).expect("standard layout")
}

fn transposed(x: ArrayView3<f64>) -> Array3<f64> {
    x.permuted_axes([1, 0, 2]).as_standard_layout().into_owned()
}

/// Pre-activation of a second-order layer:
///
/// `out[u,v] = x[u,v] W1 + x[v,u] W2 + r[u] W3 + r[v] W4 + [u=v] x[u,u] W5 + b`
/// with `r[u] = (1/n) Σ_v x[u,v]`.
pub fn second_order_linear(x: ArrayView3<f64>, wt: &SecondOrderWeights) -> Result<Array3<f64>> {
    wt.check(&x)?;
    let n = x.shape()[0];
    let co = wt.c_out();
    let x = x.as_standard_layout();
    let xs = x.view().into_shape_with_order((n * n, wt.c_in())).expect("standard layout");
    let xt = transposed(x.view());
    let mut out = xs.dot(&wt.w[0]) + flat(&xt).dot(&wt.w[1]);
    out += &wt.b;
    let mut out = out.into_shape_with_order((n, n, co)).expect("reshape");

    let r = x.sum_axis(Axis(1)) / n as f64;
    let row = r.dot(&wt.w[2]);
    let col = r.dot(&wt.w[3]);
    out += &row.view().insert_axis(Axis(1));
    out += &col.view().insert_axis(Axis(0));
    let diag = Array2::from_shape_fn((n, wt.c_in()), |(u, c)| x[[u, u, c]]).dot(&wt.w[4]);
    for u in 0..n {
        let mut cell = out.slice_mut(ndarray::s![u, u, ..]);
        cell += &diag.row(u);
    }
    Ok(out)
}

/// `ReLU(second_order_linear(x))`.
pub fn second_order_layer(x: ArrayView3<f64>, wt: &SecondOrderWeights) -> Result<Array3<f64>> {
    let mut out = second_order_linear(x, wt)?;
    out.mapv_inplace(relu);
    Ok(out)
}

/// Backward through [`second_order_linear`]: given `g = dL/d(pre-activation)`
/// returns the weight gradients and, if requested, `dL/dx`.
pub fn second_order_backward(
    x: ArrayView3<f64>,
    wt: &SecondOrderWeights,
    g: &Array3<f64>,
    need_input_grad: bool,
) -> (SecondOrderGrads, Option<Array3<f64>>) {
    let n = x.shape()[0];
    let ci = wt.c_in();
    let x = x.as_standard_layout();
    let xs = x.view().into_shape_with_order((n * n, ci)).expect("standard layout");
    let xt = transposed(x.view());
    let gf = flat(g);

    let r = x.sum_axis(Axis(1)) / n as f64;
    let dg = Array2::from_shape_fn((n, ci), |(u, c)| x[[u, u, c]]);
    let g_row = g.sum_axis(Axis(1));
    let g_col = g.sum_axis(Axis(0));
    let g_diag = Array2::from_shape_fn((n, g.shape()[2]), |(u, c)| g[[u, u, c]]);

    let grads = SecondOrderGrads {
        w: [
            xs.t().dot(&gf),
            flat(&xt).t().dot(&gf),
            r.t().dot(&g_row),
            r.t().dot(&g_col),
            dg.t().dot(&g_diag),
        ],
        b: g_row.sum_axis(Axis(0)),
    };
    if !need_input_grad {
        return (grads, None);
    }

    let direct = gf.dot(&wt.w[0].t()).into_shape_with_order((n, n, ci)).expect("reshape");
    let swapped = gf.dot(&wt.w[1].t()).into_shape_with_order((n, n, ci)).expect("reshape");
    let mut dx = direct + swapped.view().permuted_axes([1, 0, 2]);
    let dr = (g_row.dot(&wt.w[2].t()) + g_col.dot(&wt.w[3].t())) / n as f64;
    dx += &dr.view().insert_axis(Axis(1));
    let dd = g_diag.dot(&wt.w[4].t());
    for u in 0..n {
        let mut cell = dx.slice_mut(ndarray::s![u, u, ..]);
        cell += &dd.row(u);
    }
    (grads, Some(dx))
}

/// Row-wise affine map `x W + b`.
pub fn dense_linear(x: ArrayView2<f64>, w: ArrayView2<f64>, b: ArrayView1<f64>) -> Result<Array2<f64>> {
    if x.ncols() != w.nrows() || w.ncols() != b.len() {
        return Err(Error::Shape(format!(
            "dense layer {}x{} cannot take {} input columns",
            w.nrows(),
            w.ncols(),
            x.ncols()
        )));
    }
    Ok(x.dot(&w) + b)
}

/// Returns `(dW, db, dx)` for `y = x W + b` given `g = dL/dy`.
pub fn dense_backward(
    x: ArrayView2<f64>,
    w: ArrayView2<f64>,
    g: &Array2<f64>,
    need_input_grad: bool,
) -> (Array2<f64>, Array1<f64>, Option<Array2<f64>>) {
    let dw = x.t().dot(g);
    let db = g.sum_axis(Axis(0));
    let dx = need_input_grad.then(|| g.dot(&w.t()));
    (dw, db, dx)
}

pub fn relu(x: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        0.0
    }
}

/// Zero the gradient wherever the ReLU output was not positive.
pub fn relu_backward_inplace<D: ndarray::Dimension>(
    grad: &mut ndarray::Array<f64, D>,
    output: &ndarray::Array<f64, D>,
) {
    ndarray::Zip::from(grad).and(output).for_each(|g, &o| {
        if o <= 0.0 {
            *g = 0.0;
        }
    });
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::permute_graph_action;
    use ndarray::{array, Array1};

    struct Owned {
        w: [Array2<f64>; 5],
        b: Array1<f64>,
    }

    impl Owned {
        fn single(which: usize) -> Self {
            let mut w: [Array2<f64>; 5] = std::array::from_fn(|_| Array2::zeros((1, 1)));
            w[which][[0, 0]] = 1.0;
            Self { w, b: Array1::zeros(1) }
        }

        fn random(ci: usize, co: usize, seed: u64) -> Self {
            let mut s = seed;
            let mut next = move || {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                ((s >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
            };
            let w = std::array::from_fn(|_| Array2::from_shape_fn((ci, co), |_| next()));
            let b = Array1::from_shape_fn(co, |_| next());
            Self { w, b }
        }

        fn view(&self) -> SecondOrderWeights<'_> {
            SecondOrderWeights { w: std::array::from_fn(|i| self.w[i].view()), b: self.b.view() }
        }
    }

    fn sample_input(n: usize, c: usize) -> Array3<f64> {
        Array3::from_shape_fn((n, n, c), |(u, v, k)| ((u * 7 + v * 3 + k * 5) % 11) as f64 / 8.0 - 0.25)
    }

    #[test]
    fn identity_wiring_passes_nonnegative_input() {
        let x = sample_input(4, 1).mapv(f64::abs);
        let w = Owned::single(0);
        assert_eq!(second_order_layer(x.view(), &w.view()).unwrap(), x);
    }

    #[test]
    fn diag_basis_on_identity() {
        let x = Array2::<f64>::eye(2).insert_axis(Axis(2));
        let w = Owned::single(4);
        assert_eq!(second_order_layer(x.view(), &w.view()).unwrap(), x);
    }

    #[test]
    fn each_basis_map_commutes_with_permutation() {
        let x = sample_input(5, 1);
        let perm = [3, 0, 4, 1, 2];
        let px = permute_graph_action(&x, 2, &perm).unwrap();
        for which in 0..5 {
            let w = Owned::single(which);
            let a = second_order_linear(px.view(), &w.view()).unwrap();
            let b = permute_graph_action(&second_order_linear(x.view(), &w.view()).unwrap(), 2, &perm).unwrap();
            assert_eq!(a, b, "basis map {which}");
        }
    }

    #[test]
    fn transpose_and_broadcast_semantics() {
        let x = array![[1.0, 2.0], [3.0, 4.0]].insert_axis(Axis(2));
        let t = second_order_linear(x.view(), &Owned::single(1).view()).unwrap();
        assert_eq!(t.index_axis(Axis(2), 0), array![[1.0, 3.0], [2.0, 4.0]]);
        let r = second_order_linear(x.view(), &Owned::single(2).view()).unwrap();
        assert_eq!(r.index_axis(Axis(2), 0), array![[1.5, 1.5], [3.5, 3.5]]);
        let c = second_order_linear(x.view(), &Owned::single(3).view()).unwrap();
        assert_eq!(c.index_axis(Axis(2), 0), array![[1.5, 3.5], [1.5, 3.5]]);
    }

    #[test]
    fn rejects_wrong_channels() {
        let w = Owned::random(2, 3, 1);
        assert!(second_order_linear(sample_input(3, 1).view(), &w.view()).is_err());
        assert!(second_order_linear(Array3::zeros((2, 3, 2)).view(), &w.view()).is_err());
    }

    #[test]
    fn backward_matches_finite_differences() {
        let (n, ci, co) = (4, 2, 3);
        let x = sample_input(n, ci);
        let w = Owned::random(ci, co, 9);
        let probe = Array3::from_shape_fn((n, n, co), |(u, v, k)| ((u + 2 * v + 3 * k) % 5) as f64 - 2.0);
        let loss = |x: &Array3<f64>, w: &Owned| (second_order_linear(x.view(), &w.view()).unwrap() * &probe).sum();
        let (grads, dx) = second_order_backward(x.view(), &w.view(), &probe, true);
        let dx = dx.unwrap();
        let h = 1e-6;
        for idx in [(0, 0, 0), (1, 2, 1), (3, 3, 0), (2, 1, 1)] {
            let (mut xp, mut xm) = (x.clone(), x.clone());
            xp[idx] += h;
            xm[idx] -= h;
            let fd = (loss(&xp, &w) - loss(&xm, &w)) / (2.0 * h);
            assert!((fd - dx[idx]).abs() < 1e-7, "dx{idx:?}: {fd} vs {}", dx[idx]);
        }
        for which in 0..5 {
            for idx in [(0, 0), (1, 2)] {
                let mut wp = Owned { w: w.w.clone(), b: w.b.clone() };
                let mut wm = Owned { w: w.w.clone(), b: w.b.clone() };
                wp.w[which][idx] += h;
                wm.w[which][idx] -= h;
                let fd = (loss(&x, &wp) - loss(&x, &wm)) / (2.0 * h);
                assert!((fd - grads.w[which][idx]).abs() < 1e-7, "w{which}{idx:?}");
            }
        }
        let db_fd = {
            let mut wp = Owned { w: w.w.clone(), b: w.b.clone() };
            let mut wm = Owned { w: w.w.clone(), b: w.b.clone() };
            wp.b[1] += h;
            wm.b[1] -= h;
            (loss(&x, &wp) - loss(&x, &wm)) / (2.0 * h)
        };
        assert!((db_fd - grads.b[1]).abs() < 1e-7);
    }
}
