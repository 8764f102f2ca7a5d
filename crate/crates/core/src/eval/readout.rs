use ndarray::{Array2, Array3};

use super::predictor::Predictor;
use crate::error::{Error, Result};
use crate::graph::{hop_adjacency_stack, Graph};
use crate::spectral::{lstsq, polynomial_probe_apply, PolynomialProbe};

/// Affine map from the `r` predicted hop channels to a scalar per entry.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearReadout {
    /// One weight per channel, then the intercept.
    pub weights: Vec<f64>,
}

impl LinearReadout {
    pub fn apply(&self, probs: &Array3<f64>) -> Array2<f64> {
        let (n, _, r) = probs.dim();
        Array2::from_shape_fn((n, n), |(u, v)| {
            (0..r).map(|c| self.weights[c] * probs[[u, v, c]]).sum::<f64>() + self.weights[r]
        })
    }
}

fn probe_target(g: &Graph, hops: &[usize], probe: &PolynomialProbe) -> Result<Array2<f64>> {
    polynomial_probe_apply(probe, &hop_adjacency_stack(g, hops)?)
}

/// Least-squares read-out of `Σ_j θ_j A_{s_j}` from the predictor's outputs,
/// fitted over every entry of `graphs`.
pub fn fit_readout(predictor: &dyn Predictor, graphs: &[Graph], probe: &PolynomialProbe) -> Result<LinearReadout> {
    let hops = predictor.hops();
    if probe.degree() != hops.len() {
        return Err(Error::Shape(format!("probe degree {} for {} hop channels", probe.degree(), hops.len())));
    }
    let r = hops.len();
    let rows: usize = graphs.iter().map(|g| g.n() * g.n()).sum();
    if rows == 0 {
        return Err(Error::EmptyCorpus);
    }
    let mut x = Array2::zeros((rows, r + 1));
    let mut y = Array2::zeros((rows, 1));
    let mut row = 0;
    for g in graphs {
        let probs = predictor.predict(g)?;
        let target = probe_target(g, hops, probe)?;
        for u in 0..g.n() {
            for v in 0..g.n() {
                for c in 0..r {
                    x[[row, c]] = probs[[u, v, c]];
                }
                x[[row, r]] = 1.0;
                y[[row, 0]] = target[[u, v]];
                row += 1;
            }
        }
    }
    let ls = lstsq(&x, &y, 1e-12);
    Ok(LinearReadout { weights: ls.solution.column(0).to_vec() })
}

/// Mean absolute entry error of the read-out against the probe targets.
pub fn readout_error(
    predictor: &dyn Predictor,
    readout: &LinearReadout,
    graphs: &[Graph],
    probe: &PolynomialProbe,
) -> Result<f64> {
    let (mut sum, mut count) = (0.0, 0usize);
    for g in graphs {
        let pred = readout.apply(&predictor.predict(g)?);
        let target = probe_target(g, predictor.hops(), probe)?;
        sum += (&pred - &target).mapv(f64::abs).sum();
        count += g.n() * g.n();
    }
    if count == 0 {
        return Err(Error::EmptyCorpus);
    }
    Ok(sum / count as f64)
}
