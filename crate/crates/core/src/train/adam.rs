use super::TrainConfig;
use crate::error::{Error, Result};
use crate::net::ModelParams;

/// Adam moments over the flat parameter vector.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub step: u64,
}

impl OptimizerState {
    pub fn new(len: usize) -> Self {
        Self { m: vec![0.0; len], v: vec![0.0; len], step: 0 }
    }
}

/// One bias-corrected Adam update after clipping the global gradient norm to
/// `config.clip_norm`.
pub fn adam_step(
    params: &mut ModelParams,
    grads: &[f64],
    state: &mut OptimizerState,
    config: &TrainConfig,
) -> Result<()> {
    if grads.len() != params.len() || state.m.len() != params.len() || state.v.len() != params.len() {
        return Err(Error::Shape(format!(
            "gradient ({}) / moments ({}) do not match {} parameters",
            grads.len(),
            state.m.len(),
            params.len()
        )));
    }
    if let Some(i) = grads.iter().position(|g| !g.is_finite()) {
        let name = params.layout.block_of(i).map(|b| b.name.clone()).unwrap_or_default();
        return Err(Error::NonFiniteGradient(name));
    }
    let norm = grads.iter().map(|g| g * g).sum::<f64>().sqrt();
    let scale = if norm > config.clip_norm { config.clip_norm / norm } else { 1.0 };

    state.step += 1;
    let t = state.step as i32;
    let c1 = 1.0 - config.beta1.powi(t);
    let c2 = 1.0 - config.beta2.powi(t);
    for i in 0..grads.len() {
        let g = grads[i] * scale;
        state.m[i] = config.beta1 * state.m[i] + (1.0 - config.beta1) * g;
        state.v[i] = config.beta2 * state.v[i] + (1.0 - config.beta2) * g * g;
        let m_hat = state.m[i] / c1;
        let v_hat = state.v[i] / c2;
        params.values[i] -= config.learning_rate * m_hat / (v_hat.sqrt() + config.adam_eps);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::ModelConfig;

    fn small() -> (ModelConfig, ModelParams) {
        let cfg = ModelConfig {
            wavelet_channels: 1,
            encoder_widths: vec![1],
            latent_hidden: 1,
            latent_dim: 1,
            decoder_widths: vec![1],
            head_widths: vec![1],
            hops: vec![1],
        };
        let p = ModelParams::init(&cfg, 0).unwrap();
        (cfg, p)
    }

    #[test]
    fn zero_gradient_is_noop_but_counts() {
        let (_, mut p) = small();
        let before = p.values.clone();
        let mut st = OptimizerState::new(p.len());
        adam_step(&mut p, &vec![0.0; before.len()], &mut st, &TrainConfig::default()).unwrap();
        assert_eq!(p.values, before);
        assert_eq!(st.step, 1);
    }

    #[test]
    fn first_step_moves_by_learning_rate() {
        let (_, mut p) = small();
        let before = p.values.clone();
        let mut grads = vec![0.0; before.len()];
        grads[0] = 1.0;
        let cfg = TrainConfig::default();
        let mut st = OptimizerState::new(p.len());
        adam_step(&mut p, &grads, &mut st, &cfg).unwrap();
        let delta = before[0] - p.values[0];
        assert!((delta - cfg.learning_rate / (1.0 + cfg.adam_eps)).abs() < 1e-15);
        assert_eq!(&p.values[1..], &before[1..]);
    }

    #[test]
    fn clipping_halves_large_gradients() {
        // Adam's first step is scale-invariant, so observe the clipped first moment
        let (_, mut p) = small();
        let n = p.len();
        let mut grads = vec![0.0; n];
        grads[0] = 6.0;
        grads[1] = 8.0; // norm 10
        let cfg = TrainConfig::default();
        let mut st = OptimizerState::new(n);
        adam_step(&mut p, &grads, &mut st, &cfg).unwrap();
        assert!((st.m[0] - (1.0 - cfg.beta1) * 3.0).abs() < 1e-15);
        assert!((st.m[1] - (1.0 - cfg.beta1) * 4.0).abs() < 1e-15);
    }

    #[test]
    fn non_finite_gradient_names_block() {
        let (_, mut p) = small();
        let mut grads = vec![0.0; p.len()];
        let last = p.layout.head.last().unwrap().b.offset;
        grads[last] = f64::NAN;
        let mut st = OptimizerState::new(p.len());
        let err = adam_step(&mut p, &grads, &mut st, &TrainConfig::default()).unwrap_err();
        assert!(matches!(&err, Error::NonFiniteGradient(name) if name == "head.1.bias"), "{err}");
    }
}
