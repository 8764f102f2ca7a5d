use ndarray::{Array1, Array2};

use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 100;
const OFF_TOLERANCE: f64 = 1e-12;
const SYMMETRY_TOLERANCE: f64 = 1e-10;

/// Eigenpairs of a real symmetric matrix, eigenvalues ascending, eigenvectors
/// as orthonormal columns.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub eigenvalues: Array1<f64>,
    pub eigenvectors: Array2<f64>,
}

impl EigenDecomposition {
    /// `U diag(f(λ)) Uᵀ`.
    pub fn spectral_map(&self, f: impl Fn(f64) -> f64) -> Array2<f64> {
        let scaled = &self.eigenvectors * &self.eigenvalues.mapv(f);
        scaled.dot(&self.eigenvectors.t())
    }
}

/// Cyclic Jacobi eigensolver for dense symmetric matrices.
///
/// Each eigenvector's first component with magnitude above `1e-12` is made
/// positive so the output is reproducible for simple eigenvalues.
pub fn eigh_symmetric(m: &Array2<f64>) -> Result<EigenDecomposition> {
    let n = m.nrows();
    if m.ncols() != n {
        return Err(Error::Shape(format!("eigh needs a square matrix, got {:?}", m.shape())));
    }
    let mut asym: f64 = 0.0;
    for i in 0..n {
        for j in 0..i {
            asym = asym.max((m[[i, j]] - m[[j, i]]).abs());
        }
    }
    if asym > SYMMETRY_TOLERANCE {
        return Err(Error::NotSymmetric(asym));
    }

    // row-major working copies
    let mut a: Vec<f64> = m.iter().copied().collect();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let off_norm = |a: &[f64]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a[i * n + j] * a[i * n + j];
                }
            }
        }
        s.sqrt()
    };

    let mut sweeps = 0;
    while off_norm(&a) > OFF_TOLERANCE {
        if sweeps == MAX_SWEEPS {
            return Err(Error::NoConvergence { sweeps, off_norm: off_norm(&a) });
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let tau = (aqq - app) / (2.0 * apq);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].total_cmp(&a[j * n + j]).then(i.cmp(&j)));
    let eigenvalues = order.iter().map(|&i| a[i * n + i]).collect();
    let mut eigenvectors = Array2::zeros((n, n));
    for (col, &src) in order.iter().enumerate() {
        let flip = (0..n)
            .map(|k| v[k * n + src])
            .find(|x| x.abs() > 1e-12)
            .is_some_and(|x| x < 0.0);
        let sign = if flip { -1.0 } else { 1.0 };
        for k in 0..n {
            eigenvectors[[k, col]] = sign * v[k * n + src];
        }
    }
    Ok(EigenDecomposition { eigenvalues, eigenvectors })
}
