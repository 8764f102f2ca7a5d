//! Small dense least squares by Householder QR with column pivoting.

use ndarray::{Array1, Array2};

pub(crate) struct LeastSquares {
    /// `cols x targets`.
    pub solution: Array2<f64>,
    pub rank: usize,
}

/// Solve `min ‖X B - Y‖` column-wise. Columns whose pivot falls below
/// `rel_tol * |R_00|` are treated as dependent and get zero coefficients.
pub(crate) fn lstsq(x: &Array2<f64>, y: &Array2<f64>, rel_tol: f64) -> LeastSquares {
    let (m, k) = x.dim();
    let t = y.ncols();
    let mut r = x.clone();
    let mut qty = y.clone();
    let mut perm: Vec<usize> = (0..k).collect();
    let steps = m.min(k);
    let mut rank = 0;
    let mut first_pivot = 0.0;

    for j in 0..steps {
        // pivot: largest remaining column norm
        let (best, best_norm) = (j..k)
            .map(|c| (c, (j..m).map(|i| r[[i, c]] * r[[i, c]]).sum::<f64>().sqrt()))
            .fold((j, -1.0), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
        if j == 0 {
            first_pivot = best_norm;
        }
        if best_norm <= rel_tol * first_pivot || best_norm == 0.0 {
            break;
        }
        if best != j {
            for i in 0..m {
                r.swap([i, j], [i, best]);
            }
            perm.swap(j, best);
        }
        let alpha = if r[[j, j]] > 0.0 { -best_norm } else { best_norm };
        let mut v: Array1<f64> = (j..m).map(|i| r[[i, j]]).collect();
        v[0] -= alpha;
        let vnorm2 = v.dot(&v);
        if vnorm2 > 0.0 {
            for c in j..k {
                let proj: f64 = (j..m).map(|i| v[i - j] * r[[i, c]]).sum::<f64>() * 2.0 / vnorm2;
                for i in j..m {
                    r[[i, c]] -= proj * v[i - j];
                }
            }
            for c in 0..t {
                let proj: f64 = (j..m).map(|i| v[i - j] * qty[[i, c]]).sum::<f64>() * 2.0 / vnorm2;
                for i in j..m {
                    qty[[i, c]] -= proj * v[i - j];
                }
            }
        }
        rank += 1;
    }

    // back substitution on the leading rank x rank block
    let mut solution = Array2::zeros((k, t));
    for c in 0..t {
        let mut b = vec![0.0; rank];
        for i in (0..rank).rev() {
            let mut acc = qty[[i, c]];
            for l in i + 1..rank {
                acc -= r[[i, l]] * b[l];
            }
            b[i] = acc / r[[i, i]];
        }
        for (i, &val) in b.iter().enumerate() {
            solution[[perm[i], c]] = val;
        }
    }
    LeastSquares { solution, rank }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn exact_square_system() {
        let x = array![[2.0, 1.0], [1.0, 3.0]];
        let y = array![[5.0], [10.0]];
        let ls = lstsq(&x, &y, 1e-12);
        assert_eq!(ls.rank, 2);
        assert!((ls.solution[[0, 0]] - 1.0).abs() < 1e-12);
        assert!((ls.solution[[1, 0]] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn overdetermined_line_fit() {
        // y = 1 + 2t sampled exactly
        let x = array![[1.0, 0.0], [1.0, 1.0], [1.0, 2.0], [1.0, 3.0]];
        let y = array![[1.0], [3.0], [5.0], [7.0]];
        let ls = lstsq(&x, &y, 1e-12);
        assert!((ls.solution[[0, 0]] - 1.0).abs() < 1e-12);
        assert!((ls.solution[[1, 0]] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn rank_deficient_gets_basic_solution() {
        let x = array![[1.0, 2.0], [2.0, 4.0], [3.0, 6.0]];
        let y = array![[2.0], [4.0], [6.0]];
        let ls = lstsq(&x, &y, 1e-12);
        assert_eq!(ls.rank, 1);
        let fit = x.dot(&ls.solution);
        assert!((&fit - &y).iter().all(|e| e.abs() < 1e-12));
    }
}
