use ndarray::{s, Array2, Array3};

use super::{eigh_symmetric, WaveletMethod, WaveletTensor};
use crate::error::{Error, Result};
use crate::graph::{HopAdjacencyStack, NormalizedOperators};

/// Estimated `(I - L̃)^j`, `j = 1..=d`, recovered from a wavelet ladder.
#[derive(Debug, Clone)]
pub struct LaplacianPowerEstimate {
    /// `n x n x d`, channel `j - 1` estimates `(I - L̃)^j`.
    pub powers: Array3<f64>,
    /// Max fit error over the eigenvalue samples.
    pub residual: f64,
    pub rank: usize,
    pub rank_deficient: bool,
}

/// Recover Laplacian powers from wavelets at scales `s, 2s, .., ds`.
///
/// Each power is written as an affine combination of the shifted wavelet
/// responses, `(1 - λ)^j ≈ β_j0 + Σ_i β_ji (exp(-i s λ) - 1)`, fitted by least
/// squares over the graph's own eigenvalues. Those are read back from the first
/// channel as `λ = -ln(μ) / s`. The intercept carries the `λ = 0` direction,
/// where every shifted response vanishes.
pub fn recover_laplacian_powers(w: &WaveletTensor) -> Result<LaplacianPowerEstimate> {
    if w.method != WaveletMethod::Exact {
        return Err(Error::InvalidParam("power recovery needs an exact wavelet tensor".into()));
    }
    let d = w.channels();
    let base = w.scales[0];
    if base <= 0.0 {
        return Err(Error::InvalidParam("power recovery needs a positive base scale".into()));
    }
    for (i, &s) in w.scales.iter().enumerate() {
        let want = base * (i + 1) as f64;
        if (s - want).abs() > 1e-9 * want {
            return Err(Error::InvalidParam(format!(
                "scales must form the ladder s, 2s, .., ds; channel {i} has {s}, expected {want}"
            )));
        }
    }
    let n = w.n();
    let first = w.channel(0).to_owned();
    let mu = eigh_symmetric(&first)?.eigenvalues;
    let lambdas: Vec<f64> = mu.iter().map(|&m| -m.max(f64::MIN_POSITIVE).ln() / base).collect();

    let mut design = Array2::zeros((n, d + 1));
    let mut target = Array2::zeros((n, d));
    for (row, &lambda) in lambdas.iter().enumerate() {
        design[[row, 0]] = 1.0;
        for i in 1..=d {
            design[[row, i]] = (-(i as f64) * base * lambda).exp() - 1.0;
            target[[row, i - 1]] = (1.0 - lambda).powi(i as i32);
        }
    }
    let ls = super::lstsq::lstsq(&design, &target, 1e-12);
    let fitted = design.dot(&ls.solution);
    let residual = (&fitted - &target).iter().fold(0.0, |m: f64, e| m.max(e.abs()));

    let eye = Array2::<f64>::eye(n);
    let shifted: Vec<Array2<f64>> = (0..d).map(|i| &w.channel(i) - &eye).collect();
    let mut powers = Array3::zeros((n, n, d));
    for j in 0..d {
        let mut p = &eye * ls.solution[[0, j]];
        for (i, sh) in shifted.iter().enumerate() {
            p.scaled_add(ls.solution[[i + 1, j]], sh);
        }
        powers.slice_mut(s![.., .., j]).assign(&p);
    }
    Ok(LaplacianPowerEstimate { powers, residual, rank: ls.rank, rank_deficient: ls.rank < d + 1 })
}

/// `(D^{-1/2} A D^{-1/2})^j` by dense repeated multiplication.
pub fn normalized_adjacency_power(ops: &NormalizedOperators, j: usize) -> Array2<f64> {
    let mut p = Array2::eye(ops.n());
    for _ in 0..j {
        p = p.dot(&ops.normalized_adjacency);
    }
    p
}

/// Largest surrogate width that still separates walks from non-walks: half the
/// smallest positive entry of the normalized adjacency power.
pub fn separating_epsilon(ops: &NormalizedOperators, j: usize) -> f64 {
    let min_pos = normalized_adjacency_power(ops, j)
        .iter()
        .copied()
        .filter(|&x| x > 0.0)
        .fold(f64::INFINITY, f64::min);
    if min_pos.is_finite() {
        min_pos / 2.0
    } else {
        1.0
    }
}

/// Hop-`j` adjacency through a three-piece linear step surrogate: clamp
/// `x / ε` to `[0, 1]` on the normalized adjacency power, then threshold at 0.5.
pub fn step_hop_recovery(ops: &NormalizedOperators, j: usize, epsilon: f64) -> Result<Array2<u8>> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidParam(format!("surrogate width must be positive, got {epsilon}")));
    }
    let p = normalized_adjacency_power(ops, j);
    Ok(p.mapv(|x| u8::from((x / epsilon).clamp(0.0, 1.0) >= 0.5)))
}

/// Real coefficients `θ_1..θ_d` of a weighted hop sum.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialProbe {
    coefficients: Vec<f64>,
}

impl PolynomialProbe {
    pub fn new(coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(Error::InvalidParam("probe degree must be >= 1".into()));
        }
        Ok(Self { coefficients })
    }

    pub fn degree(&self) -> usize {
        self.coefficients.len()
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }
}

/// `Σ_j θ_j A_{s_j}` over the first `degree` channels of the stack.
pub fn polynomial_probe_apply(probe: &PolynomialProbe, stack: &HopAdjacencyStack) -> Result<Array2<f64>> {
    if probe.degree() > stack.channels() {
        return Err(Error::Shape(format!(
            "probe degree {} exceeds the {} hop channels",
            probe.degree(),
            stack.channels()
        )));
    }
    let n = stack.n();
    let mut out = Array2::zeros((n, n));
    for (j, &theta) in probe.coefficients.iter().enumerate() {
        out.scaled_add(theta, &stack.data.slice(s![.., .., j]).mapv(f64::from));
    }
    Ok(out)
}
