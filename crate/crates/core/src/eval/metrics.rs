use ndarray::Array3;

use crate::graph::HopAdjacencyStack;
use crate::train::MaskTensor;

/// Decision rule: probability `>= 0.5` predicts an edge.
pub fn predict_edge(p: f64) -> u8 {
    u8::from(p >= 0.5)
}

/// Fraction of kept upper-triangle entries classified correctly, per hop.
/// `None` for channels the mask skips.
pub fn masked_accuracy(probs: &Array3<f64>, targets: &HopAdjacencyStack, mask: &MaskTensor) -> Vec<Option<f64>> {
    let n = targets.n();
    (0..targets.channels())
        .map(|c| {
            let (mut hit, mut total) = (0usize, 0usize);
            for u in 0..n {
                for v in u..n {
                    if mask.data[[u, v, c]] == 1 {
                        total += 1;
                        hit += usize::from(predict_edge(probs[[u, v, c]]) == targets.data[[u, v, c]]);
                    }
                }
            }
            (total > 0).then(|| hit as f64 / total as f64)
        })
        .collect()
}

/// Fraction of all `n x n` entries classified correctly, per hop.
pub fn unmasked_accuracy(probs: &Array3<f64>, targets: &HopAdjacencyStack) -> Vec<f64> {
    let n = targets.n();
    (0..targets.channels())
        .map(|c| {
            let mut hit = 0usize;
            for u in 0..n {
                for v in 0..n {
                    hit += usize::from(predict_edge(probs[[u, v, c]]) == targets.data[[u, v, c]]);
                }
            }
            hit as f64 / (n * n) as f64
        })
        .collect()
}
