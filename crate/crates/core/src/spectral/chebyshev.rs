use std::f64::consts::PI;

/// Truncated Chebyshev series of the heat kernel `x -> exp(-scale * x)` on
/// `[0, lambda_max]`.
///
/// `coefficients[0]` already carries the usual one-half factor, so the series
/// is `Σ c_j T_j(y)` with `y = 2x / lambda_max - 1`.
#[derive(Debug, Clone)]
pub struct ChebyshevExpansion {
    pub order: usize,
    pub coefficients: Vec<f64>,
    pub lambda_max: f64,
    pub scale: f64,
    /// Max absolute error at the `2M + 1` Chebyshev nodes of the interval.
    pub residual: f64,
}

impl ChebyshevExpansion {
    /// Clenshaw evaluation at `x` in `[0, lambda_max]`.
    pub fn eval(&self, x: f64) -> f64 {
        let y = 2.0 * x / self.lambda_max - 1.0;
        let (mut b1, mut b2) = (0.0, 0.0);
        for &c in self.coefficients.iter().skip(1).rev() {
            let b0 = 2.0 * y * b1 - b2 + c;
            b2 = b1;
            b1 = b0;
        }
        y * b1 - b2 + self.coefficients[0]
    }
}

/// Fit by Chebyshev–Gauss quadrature with `4(M + 1)` nodes.
///
/// Panics if `order == 0` or `lambda_max <= 0`; callers validate both.
pub fn chebyshev_fit(scale: f64, lambda_max: f64, order: usize) -> ChebyshevExpansion {
    assert!(order >= 1 && lambda_max > 0.0, "chebyshev_fit needs M >= 1 and lambda_max > 0");
    let nodes = 4 * (order + 1);
    let f = |y: f64| (-scale * (y + 1.0) * lambda_max / 2.0).exp();
    let samples: Vec<(f64, f64)> = (0..nodes)
        .map(|k| {
            let theta = PI * (k as f64 + 0.5) / nodes as f64;
            (theta, f(theta.cos()))
        })
        .collect();
    let mut coefficients: Vec<f64> = (0..=order)
        .map(|j| {
            let sum: f64 = samples.iter().map(|&(theta, fv)| fv * (j as f64 * theta).cos()).sum();
            2.0 * sum / nodes as f64
        })
        .collect();
    coefficients[0] /= 2.0;

    let mut exp = ChebyshevExpansion { order, coefficients, lambda_max, scale, residual: 0.0 };
    let check = 2 * order + 1;
    exp.residual = (0..check)
        .map(|k| {
            let y = (PI * (k as f64 + 0.5) / check as f64).cos();
            let x = (y + 1.0) * lambda_max / 2.0;
            (exp.eval(x) - (-scale * x).exp()).abs()
        })
        .fold(0.0, f64::max);
    exp
}
