use ndarray::{s, Array2, Array3};
use serde::{Deserialize, Serialize};

use super::{chebyshev_fit, eigh_symmetric};
use crate::error::{Error, Result};
use crate::graph::{normalized_operators, Graph, NormalizedOperators};

/// Upper bound of the normalized Laplacian spectrum, used as the Chebyshev interval.
pub const LAMBDA_MAX: f64 = 2.0;

pub const DEFAULT_SCALES: [f64; 4] = [1.0, 2.0, 4.0, 16.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum WaveletMethod {
    Exact,
    Chebyshev { order: usize },
}

impl WaveletMethod {
    pub fn name(&self) -> &'static str {
        match self {
            WaveletMethod::Exact => "exact",
            WaveletMethod::Chebyshev { .. } => "chebyshev",
        }
    }
}

/// Scales and method used to build model inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveletConfig {
    pub scales: Vec<f64>,
    pub method: WaveletMethod,
}

impl Default for WaveletConfig {
    fn default() -> Self {
        Self { scales: DEFAULT_SCALES.to_vec(), method: WaveletMethod::Chebyshev { order: 50 } }
    }
}

impl WaveletConfig {
    pub fn compute(&self, g: &Graph) -> Result<WaveletTensor> {
        wavelet_tensor(g, &self.scales, self.method)
    }
}

/// Stack of heat-kernel wavelets `ψ_s = exp(-s L̃)`, one channel per scale.
#[derive(Debug, Clone)]
pub struct WaveletTensor {
    pub scales: Vec<f64>,
    /// `n x n x k`.
    pub data: Array3<f64>,
    pub method: WaveletMethod,
}

impl WaveletTensor {
    pub fn n(&self) -> usize {
        self.data.shape()[0]
    }

    pub fn channels(&self) -> usize {
        self.scales.len()
    }

    pub fn channel(&self, j: usize) -> ndarray::ArrayView2<'_, f64> {
        self.data.slice(s![.., .., j])
    }
}

fn validate_scales(scales: &[f64]) -> Result<()> {
    if scales.is_empty() {
        return Err(Error::InvalidParam("at least one wavelet scale is required".into()));
    }
    if let Some(bad) = scales.iter().find(|s| !s.is_finite() || **s < 0.0) {
        return Err(Error::InvalidParam(format!("wavelet scale {bad} must be finite and >= 0")));
    }
    Ok(())
}

/// Exact wavelets through a full eigendecomposition of `L̃`.
pub fn wavelet_exact(ops: &NormalizedOperators, scales: &[f64]) -> Result<WaveletTensor> {
    validate_scales(scales)?;
    let eig = eigh_symmetric(&ops.laplacian)?;
    let n = ops.n();
    let mut data = Array3::zeros((n, n, scales.len()));
    for (j, &s) in scales.iter().enumerate() {
        let psi = eig.spectral_map(|lambda| (-s * lambda).exp());
        // exact symmetry; the product above is symmetric only to rounding
        let psi = (&psi + &psi.t()) / 2.0;
        data.slice_mut(s![.., .., j]).assign(&psi);
    }
    Ok(WaveletTensor { scales: scales.to_vec(), data, method: WaveletMethod::Exact })
}

/// Chebyshev-approximated wavelets from edge-list products only.
///
/// With `λ_max = 2` the shifted operator `L̃ - I` is `-D^{-1/2} A D^{-1/2}`,
/// so each recurrence step is one pass over the edges. The Chebyshev terms
/// `T_k(L̃ - I)` are shared across scales; columns accumulate independently.
pub fn wavelet_chebyshev(g: &Graph, scales: &[f64], order: usize) -> Result<WaveletTensor> {
    validate_scales(scales)?;
    if order == 0 {
        return Err(Error::InvalidParam("chebyshev order must be >= 1".into()));
    }
    let n = g.n();
    let fits: Vec<_> = scales.iter().map(|&s| chebyshev_fit(s, LAMBDA_MAX, order)).collect();
    let deg = g.degrees();
    let weighted: Vec<(usize, usize, f64)> = g
        .edges()
        .iter()
        .map(|&(u, v)| (u, v, 1.0 / ((deg[u] * deg[v]) as f64).sqrt()))
        .collect();
    // y = (L̃ - I) x = -N x
    let shifted_apply = |x: &Array2<f64>| -> Array2<f64> {
        let mut y = Array2::zeros((n, n));
        for &(u, v, w) in &weighted {
            y.row_mut(u).scaled_add(-w, &x.row(v));
            y.row_mut(v).scaled_add(-w, &x.row(u));
        }
        y
    };

    let mut acc: Vec<Array2<f64>> = fits.iter().map(|f| Array2::eye(n) * f.coefficients[0]).collect();
    let mut prev = Array2::eye(n);
    let mut cur = shifted_apply(&prev);
    for (a, f) in acc.iter_mut().zip(&fits) {
        a.scaled_add(f.coefficients[1], &cur);
    }
    for k in 2..=order {
        let mut next = shifted_apply(&cur);
        next *= 2.0;
        next -= &prev;
        for (a, f) in acc.iter_mut().zip(&fits) {
            a.scaled_add(f.coefficients[k], &next);
        }
        prev = cur;
        cur = next;
    }

    let mut data = Array3::zeros((n, n, scales.len()));
    for (j, a) in acc.iter().enumerate() {
        let sym = (a + &a.t()) / 2.0;
        data.slice_mut(s![.., .., j]).assign(&sym);
    }
    Ok(WaveletTensor { scales: scales.to_vec(), data, method: WaveletMethod::Chebyshev { order } })
}

/// Dispatch on `method`.
pub fn wavelet_tensor(g: &Graph, scales: &[f64], method: WaveletMethod) -> Result<WaveletTensor> {
    match method {
        WaveletMethod::Exact => wavelet_exact(&normalized_operators(g), scales),
        WaveletMethod::Chebyshev { order } => wavelet_chebyshev(g, scales, order),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_abs_diff(a: ndarray::ArrayView2<f64>, b: ndarray::ArrayView2<f64>) -> f64 {
        a.iter().zip(b.iter()).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
    }

    fn cycle(n: usize) -> Graph {
        Graph::new(n, (0..n).map(|i| (i, (i + 1) % n))).unwrap()
    }

    #[test]
    fn k2_closed_form() {
        let w = wavelet_exact(&normalized_operators(&Graph::new(2, [(0, 1)]).unwrap()), &[1.0]).unwrap();
        let e2 = (-2.0f64).exp();
        assert!((w.data[[0, 0, 0]] - (1.0 + e2) / 2.0).abs() < 1e-12);
        assert!((w.data[[0, 1, 0]] - (1.0 - e2) / 2.0).abs() < 1e-12);
        assert!((w.data[[0, 0, 0]] - 0.567667).abs() < 1e-6);
        assert!((w.data[[0, 1, 0]] - 0.432332).abs() < 1e-6);
    }

    #[test]
    fn zero_scale_is_identity() {
        let g = cycle(7);
        let w = wavelet_exact(&normalized_operators(&g), &[0.0]).unwrap();
        assert!(max_abs_diff(w.channel(0), Array2::eye(7).view()) < 1e-12);
    }

    #[test]
    fn empty_graph_follows_unit_laplacian() {
        // isolated nodes have L̃ = I, so ψ_s = exp(-s) I
        let g = Graph::new(3, []).unwrap();
        for s in [0.5f64, 1.0, 4.0] {
            let expect = Array2::<f64>::eye(3) * (-s).exp();
            let w = wavelet_exact(&normalized_operators(&g), &[s]).unwrap();
            assert!(max_abs_diff(w.channel(0), expect.view()) < 1e-12);
            let c = wavelet_chebyshev(&g, &[s], 30).unwrap();
            assert!(max_abs_diff(c.channel(0), expect.view()) < 1e-12);
        }
    }

    #[test]
    fn chebyshev_matches_exact_on_c20() {
        let g = cycle(20);
        let scales = DEFAULT_SCALES;
        let ex = wavelet_exact(&normalized_operators(&g), &scales).unwrap();
        let ch = wavelet_chebyshev(&g, &scales, 50).unwrap();
        for j in 0..4 {
            assert!(max_abs_diff(ex.channel(j), ch.channel(j)) <= 1e-6);
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let g = cycle(4);
        assert!(wavelet_exact(&normalized_operators(&g), &[-1.0]).is_err());
        assert!(wavelet_exact(&normalized_operators(&g), &[]).is_err());
        assert!(wavelet_chebyshev(&g, &[1.0], 0).is_err());
    }
}
