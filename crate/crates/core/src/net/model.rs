use ndarray::{Array2, Array3, ArrayView2, ArrayView3, Axis};

use super::layers::{
    dense_backward, dense_linear, relu, relu_backward_inplace, second_order_backward, second_order_linear,
    SecondOrderWeights,
};
use super::ops::{lift, pool};
use super::params::{Block, DenseBlocks, SecondOrderBlocks};
use super::{ModelConfig, ModelParams};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::spectral::{wavelet_tensor, WaveletMethod};

/// Per-node latent encoding `Z`, `n x d_ℓ`.
pub type LatentMatrix = Array2<f64>;

/// Activations cached by the encoder.
#[derive(Debug, Clone)]
pub struct EncoderTrace {
    pub input: Array3<f64>,
    /// Post-ReLU output of each second-order layer.
    pub layers: Vec<Array3<f64>>,
    /// `[diag ‖ row sum / n]`.
    pub pooled: Array2<f64>,
    pub hidden: Array2<f64>,
}

/// Activations cached by the decoder.
#[derive(Debug, Clone)]
pub struct DecoderTrace {
    /// Outer products ‖ diagonal embeddings of the latent, `n x n x 2d_ℓ`.
    pub lifted: Array3<f64>,
    pub layers: Vec<Array3<f64>>,
    /// Post-ReLU head activations, each `n² x width`.
    pub head_hidden: Vec<Array2<f64>>,
    /// Symmetrized logits `(L + Lᵀ)/2`, `n x n x r`.
    pub logits: Array3<f64>,
    /// `sigmoid(logits)`.
    pub probs: Array3<f64>,
}

/// Everything needed to run [`backward`] for one graph.
#[derive(Debug, Clone)]
pub struct ForwardTrace {
    pub fingerprint: u64,
    pub encoder: EncoderTrace,
    pub latent: LatentMatrix,
    pub decoder: DecoderTrace,
}

impl ForwardTrace {
    pub fn probs(&self) -> &Array3<f64> {
        &self.decoder.probs
    }

    pub fn n(&self) -> usize {
        self.latent.nrows()
    }
}

fn so_weights<'a>(p: &'a ModelParams, blocks: &SecondOrderBlocks) -> SecondOrderWeights<'a> {
    SecondOrderWeights { w: std::array::from_fn(|i| p.matrix(&blocks.w[i])), b: p.vector(&blocks.b) }
}

fn check_params(params: &ModelParams, config: &ModelConfig) -> Result<()> {
    if params.layout != super::ParamLayout::new(config) {
        return Err(Error::Shape("parameters were built for a different model config".into()));
    }
    Ok(())
}

pub fn sigmoid(x: f64) -> f64 {
    let p = if x >= 0.0 { 1.0 / (1.0 + (-x).exp()) } else { x.exp() / (1.0 + x.exp()) };
    // keep probabilities strictly inside (0, 1) even when exp saturates
    p.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0)
}

/// Wavelet tensor `n x n x k` to latent `n x d_ℓ`.
pub fn encoder_forward(
    w: ArrayView3<f64>,
    params: &ModelParams,
    config: &ModelConfig,
) -> Result<(LatentMatrix, EncoderTrace)> {
    check_params(params, config)?;
    let sh = w.shape();
    if sh[0] != sh[1] || sh[2] != config.wavelet_channels {
        return Err(Error::Shape(format!(
            "encoder expects n x n x {}, got {sh:?}",
            config.wavelet_channels
        )));
    }
    let input = w.as_standard_layout().into_owned();
    let mut layers: Vec<Array3<f64>> = Vec::with_capacity(params.layout.encoder.len());
    for blocks in &params.layout.encoder {
        let x = layers.last().unwrap_or(&input);
        let mut out = second_order_linear(x.view(), &so_weights(params, blocks))?;
        out.mapv_inplace(relu);
        layers.push(out);
    }
    let pooled = pool(layers.last().unwrap_or(&input).view())?;
    let [l0, l1] = [&params.layout.latent[0], &params.layout.latent[1]];
    let mut hidden = dense_linear(pooled.view(), params.matrix(&l0.w), params.vector(&l0.b))?;
    hidden.mapv_inplace(relu);
    let z = dense_linear(hidden.view(), params.matrix(&l1.w), params.vector(&l1.b))?;
    Ok((z, EncoderTrace { input, layers, pooled, hidden }))
}

/// Latent `n x d_ℓ` to symmetric hop probabilities `n x n x r`.
pub fn decoder_forward(
    z: ArrayView2<f64>,
    params: &ModelParams,
    config: &ModelConfig,
) -> Result<(Array3<f64>, DecoderTrace)> {
    check_params(params, config)?;
    if z.ncols() != config.latent_dim {
        return Err(Error::Shape(format!(
            "decoder expects latent width {}, got {}",
            config.latent_dim,
            z.ncols()
        )));
    }
    let n = z.nrows();
    let lifted = lift(z);
    let mut layers: Vec<Array3<f64>> = Vec::with_capacity(params.layout.decoder.len());
    for blocks in &params.layout.decoder {
        let x = layers.last().unwrap_or(&lifted);
        let mut out = second_order_linear(x.view(), &so_weights(params, blocks))?;
        out.mapv_inplace(relu);
        layers.push(out);
    }
    let last = layers.last().unwrap_or(&lifted);
    let c = last.shape()[2];
    let mut h = last.view().into_shape_with_order((n * n, c)).expect("standard layout").to_owned();
    let mut head_hidden = Vec::new();
    let n_head = params.layout.head.len();
    for (i, blocks) in params.layout.head.iter().enumerate() {
        let mut out = dense_linear(h.view(), params.matrix(&blocks.w), params.vector(&blocks.b))?;
        if i + 1 < n_head {
            out.mapv_inplace(relu);
            head_hidden.push(out.clone());
        }
        h = out;
    }
    let r = config.num_hops();
    let raw = h.into_shape_with_order((n, n, r)).expect("reshape");
    let logits = (&raw + &raw.view().permuted_axes([1, 0, 2])) / 2.0;
    let probs = logits.mapv(sigmoid);
    Ok((probs.clone(), DecoderTrace { lifted, layers, head_hidden, logits, probs }))
}

/// Encoder then decoder, caching every activation.
pub fn forward_full(w: ArrayView3<f64>, params: &ModelParams, config: &ModelConfig) -> Result<ForwardTrace> {
    let (latent, encoder) = encoder_forward(w, params, config)?;
    let (_, decoder) = decoder_forward(latent.view(), params, config)?;
    Ok(ForwardTrace { fingerprint: params.fingerprint(), encoder, latent, decoder })
}

fn add_block(grad: &mut [f64], block: &Block, values: impl IntoIterator<Item = f64>) {
    for (g, v) in grad[block.range()].iter_mut().zip(values) {
        *g += v;
    }
}

fn add_so_grads(grad: &mut [f64], blocks: &SecondOrderBlocks, g: super::layers::SecondOrderGrads) {
    for (blk, gw) in blocks.w.iter().zip(g.w) {
        add_block(grad, blk, gw.iter().copied());
    }
    add_block(grad, &blocks.b, g.b.iter().copied());
}

fn add_dense_grads(grad: &mut [f64], blocks: &DenseBlocks, dw: Array2<f64>, db: ndarray::Array1<f64>) {
    add_block(grad, &blocks.w, dw.iter().copied());
    add_block(grad, &blocks.b, db.iter().copied());
}

/// Reverse-mode gradient of the loss with respect to every parameter.
///
/// `grad_logits` is `dL/d(symmetrized logits)`, shape `n x n x r`, as produced
/// by the masked loss.
pub fn backward(
    trace: &ForwardTrace,
    params: &ModelParams,
    config: &ModelConfig,
    grad_logits: &Array3<f64>,
) -> Result<Vec<f64>> {
    check_params(params, config)?;
    if params.fingerprint() != trace.fingerprint {
        return Err(Error::StaleTrace);
    }
    if grad_logits.shape() != trace.decoder.logits.shape() {
        return Err(Error::Shape(format!(
            "loss gradient {:?} does not match logits {:?}",
            grad_logits.shape(),
            trace.decoder.logits.shape()
        )));
    }
    let layout = &params.layout;
    let mut grad = vec![0.0; layout.total];
    let n = trace.n();
    let r = config.num_hops();
    let dec = &trace.decoder;

    // symmetrization
    let g_raw = (grad_logits + &grad_logits.view().permuted_axes([1, 0, 2])) / 2.0;
    let mut g = g_raw.as_standard_layout().into_owned().into_shape_with_order((n * n, r)).expect("reshape");

    // head
    let dec_last = dec.layers.last().unwrap_or(&dec.lifted);
    let c_last = dec_last.shape()[2];
    let head_in = dec_last.view().into_shape_with_order((n * n, c_last)).expect("standard layout");
    for (i, blocks) in layout.head.iter().enumerate().rev() {
        let x = if i == 0 { head_in } else { dec.head_hidden[i - 1].view() };
        let (dw, db, dx) = dense_backward(x, params.matrix(&blocks.w), &g, true);
        add_dense_grads(&mut grad, blocks, dw, db);
        g = dx.expect("requested");
        if i > 0 {
            relu_backward_inplace(&mut g, &dec.head_hidden[i - 1]);
        }
    }
    let mut g3 = g.into_shape_with_order((n, n, c_last)).expect("reshape");

    // decoder second-order stack
    for (i, blocks) in layout.decoder.iter().enumerate().rev() {
        relu_backward_inplace(&mut g3, &dec.layers[i]);
        let x = if i == 0 { &dec.lifted } else { &dec.layers[i - 1] };
        let (gw, dx) = second_order_backward(x.view(), &so_weights(params, blocks), &g3, true);
        add_so_grads(&mut grad, blocks, gw);
        g3 = dx.expect("requested");
    }

    // lift: F[u,v,i] = z_ui z_vi for i < d, F[u,u,d+i] = z_ui
    let z = &trace.latent;
    let d = config.latent_dim;
    let mut gz = Array2::zeros((n, d));
    for u in 0..n {
        for i in 0..d {
            let mut acc = g3[[u, u, d + i]];
            for v in 0..n {
                acc += (g3[[u, v, i]] + g3[[v, u, i]]) * z[[v, i]];
            }
            gz[[u, i]] = acc;
        }
    }

    // latent MLP
    let enc = &trace.encoder;
    let [l0, l1] = [&layout.latent[0], &layout.latent[1]];
    let (dw, db, dh) = dense_backward(enc.hidden.view(), params.matrix(&l1.w), &gz, true);
    add_dense_grads(&mut grad, l1, dw, db);
    let mut dh = dh.expect("requested");
    relu_backward_inplace(&mut dh, &enc.hidden);
    let (dw, db, dp) = dense_backward(enc.pooled.view(), params.matrix(&l0.w), &dh, !layout.encoder.is_empty());
    add_dense_grads(&mut grad, l0, dw, db);

    // pooling and encoder stack
    if let Some(dp) = dp {
        let c = config.encoder_out_channels();
        let mut g3 = Array3::zeros((n, n, c));
        let rs = dp.slice(ndarray::s![.., c..]).to_owned() / n as f64;
        g3 += &rs.view().insert_axis(Axis(1));
        for u in 0..n {
            for k in 0..c {
                g3[[u, u, k]] += dp[[u, k]];
            }
        }
        for (i, blocks) in layout.encoder.iter().enumerate().rev() {
            relu_backward_inplace(&mut g3, &enc.layers[i]);
            let x = if i == 0 { &enc.input } else { &enc.layers[i - 1] };
            let (gw, dx) = second_order_backward(x.view(), &so_weights(params, blocks), &g3, i > 0);
            add_so_grads(&mut grad, blocks, gw);
            if let Some(dx) = dx {
                g3 = dx;
            }
        }
    }
    Ok(grad)
}

/// Node structural encodings: wavelet tensor of `g`, then the encoder.
pub fn extract_pe(
    g: &Graph,
    params: &ModelParams,
    config: &ModelConfig,
    scales: &[f64],
    method: WaveletMethod,
) -> Result<LatentMatrix> {
    if scales.len() != config.wavelet_channels {
        return Err(Error::Shape(format!(
            "{} scales given, model expects {} wavelet channels",
            scales.len(),
            config.wavelet_channels
        )));
    }
    let w = wavelet_tensor(g, scales, method)?;
    Ok(encoder_forward(w.data.view(), params, config)?.0)
}

/// CSV with header `node,z0,..,z{d-1}`; floats in shortest round-trip form.
pub fn write_pe_csv(table: &LatentMatrix, writer: impl std::io::Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let header: Vec<String> =
        std::iter::once("node".to_string()).chain((0..table.ncols()).map(|i| format!("z{i}"))).collect();
    w.write_record(&header)?;
    for (u, row) in table.axis_iter(Axis(0)).enumerate() {
        let rec: Vec<String> = std::iter::once(u.to_string()).chain(row.iter().map(|x| x.to_string())).collect();
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{normalized_operators, Graph};
    use crate::spectral::wavelet_exact;
    use crate::tensor::permute_graph_action;

    fn tiny_config() -> ModelConfig {
        ModelConfig {
            wavelet_channels: 2,
            encoder_widths: vec![3, 3],
            latent_hidden: 3,
            latent_dim: 4,
            decoder_widths: vec![3, 3],
            head_widths: vec![3],
            hops: vec![1, 2],
        }
    }

    fn k2_wavelet(scales: &[f64]) -> Array3<f64> {
        wavelet_exact(&normalized_operators(&Graph::new(2, [(0, 1)]).unwrap()), scales).unwrap().data
    }

    #[test]
    fn zero_input_zero_bias_gives_zero_latent() {
        let cfg = tiny_config();
        let p = ModelParams::init(&cfg, 1).unwrap();
        let (z, _) = encoder_forward(Array3::zeros((5, 5, 2)).view(), &p, &cfg).unwrap();
        assert!(z.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn zero_params_decode_to_half() {
        let cfg = tiny_config();
        let p = ModelParams::from_values(&cfg, vec![0.0; super::super::ParamLayout::new(&cfg).total], 0).unwrap();
        let (probs, _) = decoder_forward(Array2::zeros((3, 4)).view(), &p, &cfg).unwrap();
        assert_eq!(probs.shape(), &[3, 3, 2]);
        assert!(probs.iter().all(|&x| x == 0.5));
    }

    #[test]
    fn default_config_is_reproducible_on_k2() {
        let cfg = ModelConfig::default();
        let w = k2_wavelet(&crate::spectral::DEFAULT_SCALES);
        let a = encoder_forward(w.view(), &ModelParams::init(&cfg, 42).unwrap(), &cfg).unwrap().0;
        let b = encoder_forward(w.view(), &ModelParams::init(&cfg, 42).unwrap(), &cfg).unwrap().0;
        assert_eq!(a.shape(), &[2, 20]);
        assert!(a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits()));
    }

    #[test]
    fn decoder_output_is_symmetric_probability() {
        let cfg = tiny_config();
        let p = ModelParams::init(&cfg, 3).unwrap();
        let z = Array2::from_shape_fn((4, 4), |(u, i)| (u as f64 - 1.5) * (i as f64 + 0.5));
        let (probs, _) = decoder_forward(z.view(), &p, &cfg).unwrap();
        for u in 0..4 {
            for v in 0..4 {
                for c in 0..2 {
                    assert_eq!(probs[[u, v, c]], probs[[v, u, c]]);
                    assert!(probs[[u, v, c]] > 0.0 && probs[[u, v, c]] < 1.0);
                }
            }
        }
    }

    #[test]
    fn permutation_equivariance_end_to_end() {
        let cfg = tiny_config();
        let p = ModelParams::init(&cfg, 5).unwrap();
        let g = Graph::new(5, [(0, 1), (1, 2), (2, 3), (1, 4)]).unwrap();
        let w = wavelet_exact(&normalized_operators(&g), &[1.0, 4.0]).unwrap().data;
        let perm = [4, 2, 0, 1, 3];
        let a = forward_full(permute_graph_action(&w, 2, &perm).unwrap().view(), &p, &cfg).unwrap();
        let b = forward_full(w.view(), &p, &cfg).unwrap();
        let pz = permute_graph_action(&b.latent, 1, &perm).unwrap();
        let pp = permute_graph_action(b.probs(), 2, &perm).unwrap();
        assert!((&a.latent - &pz).iter().all(|e| e.abs() <= 1e-12));
        assert!((a.probs() - &pp).iter().all(|e| e.abs() <= 1e-12));
    }

    #[test]
    fn backward_detects_stale_trace() {
        let cfg = tiny_config();
        let mut p = ModelParams::init(&cfg, 5).unwrap();
        let w = Array3::from_elem((3, 3, 2), 0.3);
        let t = forward_full(w.view(), &p, &cfg).unwrap();
        p.values[0] += 1.0;
        let g = Array3::zeros((3, 3, 2));
        assert!(matches!(backward(&t, &p, &cfg, &g), Err(Error::StaleTrace)));
    }

    #[test]
    fn zero_loss_gradient_gives_zero_parameter_gradient() {
        let cfg = tiny_config();
        let p = ModelParams::init(&cfg, 5).unwrap();
        let w = Array3::from_shape_fn((4, 4, 2), |(u, v, c)| ((u + v + c) % 3) as f64 * 0.2);
        let t = forward_full(w.view(), &p, &cfg).unwrap();
        let grad = backward(&t, &p, &cfg, &Array3::zeros((4, 4, 2))).unwrap();
        assert!(grad.iter().all(|&g| g == 0.0));
    }

    #[test]
    fn pe_table_shape_and_csv() {
        let cfg = tiny_config();
        let p = ModelParams::init(&cfg, 5).unwrap();
        let g = Graph::new(3, [(0, 1), (1, 2)]).unwrap();
        let z = extract_pe(&g, &p, &cfg, &[1.0, 2.0], WaveletMethod::Exact).unwrap();
        assert_eq!(z.dim(), (3, 4));
        let mut buf = Vec::new();
        write_pe_csv(&z, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("node,z0,z1,z2,z3\n0,"));
        assert_eq!(text.lines().count(), 4);
        assert!(extract_pe(&g, &p, &cfg, &[1.0], WaveletMethod::Exact).is_err());
    }
}
