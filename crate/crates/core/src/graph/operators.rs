use ndarray::{Array1, Array2};

use super::Graph;

/// Symmetric normalized Laplacian `I - D^{-1/2} A D^{-1/2}` and its parts.
///
/// Zero-degree nodes use `0` for `D^{-1/2}`, so their Laplacian row is the unit
/// vector and their normalized-adjacency row is zero.
#[derive(Debug, Clone)]
pub struct NormalizedOperators {
    pub laplacian: Array2<f64>,
    pub normalized_adjacency: Array2<f64>,
    pub degrees: Array1<f64>,
}

impl NormalizedOperators {
    pub fn n(&self) -> usize {
        self.degrees.len()
    }

    /// `D^{1/2} 1`, the kernel direction of the Laplacian on connected graphs.
    pub fn sqrt_degree_vector(&self) -> Array1<f64> {
        self.degrees.mapv(f64::sqrt)
    }
}

pub fn normalized_operators(g: &Graph) -> NormalizedOperators {
    let n = g.n();
    let degrees: Array1<f64> = g.degrees().into_iter().map(|d| d as f64).collect();
    let inv_sqrt = degrees.mapv(|d| if d > 0.0 { 1.0 / d.sqrt() } else { 0.0 });
    let mut normalized_adjacency = Array2::zeros((n, n));
    for &(u, v) in g.edges() {
        let w = inv_sqrt[u] * inv_sqrt[v];
        normalized_adjacency[[u, v]] = w;
        normalized_adjacency[[v, u]] = w;
    }
    let laplacian = Array2::eye(n) - &normalized_adjacency;
    NormalizedOperators { laplacian, normalized_adjacency, degrees }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k2_laplacian() {
        let ops = normalized_operators(&Graph::new(2, [(0, 1)]).unwrap());
        assert_eq!(ops.laplacian, ndarray::array![[1.0, -1.0], [-1.0, 1.0]]);
    }

    #[test]
    fn empty_graph_is_identity() {
        let ops = normalized_operators(&Graph::new(3, []).unwrap());
        assert_eq!(ops.laplacian, Array2::<f64>::eye(3));
        assert_eq!(ops.normalized_adjacency, Array2::<f64>::zeros((3, 3)));
    }

    #[test]
    fn path3_entries() {
        let ops = normalized_operators(&Graph::new(3, [(0, 1), (1, 2)]).unwrap());
        assert!((ops.laplacian[[0, 1]] + 1.0 / 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(ops.laplacian[[0, 2]], 0.0);
        assert_eq!(ops.laplacian[[1, 1]], 1.0);
    }

    #[test]
    fn isolated_node_convention() {
        let ops = normalized_operators(&Graph::new(3, [(0, 1)]).unwrap());
        assert_eq!(ops.laplacian[[2, 2]], 1.0);
        assert_eq!(ops.normalized_adjacency.row(2).sum(), 0.0);
        for u in 0..3 {
            for v in 0..3 {
                let expect = if u == v { 1.0 } else { 0.0 } - ops.normalized_adjacency[[u, v]];
                assert!((ops.laplacian[[u, v]] - expect).abs() <= 1e-12);
                assert_eq!(ops.laplacian[[u, v]], ops.laplacian[[v, u]]);
            }
        }
    }
}
