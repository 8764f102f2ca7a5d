use rand::Rng as _;

use super::Graph;
use crate::error::{Error, Result};
use crate::rng::{substream, Purpose};

const CONNECT_ATTEMPTS: u64 = 100;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SyntheticKind {
    ErdosRenyi { n: usize, p: f64 },
    Cycle { n: usize },
    Path { n: usize },
    Grid { rows: usize, cols: usize },
    /// Uniform random recursive tree: node `i` attaches to a uniform earlier node.
    Tree { n: usize },
    /// Two `clique`-cliques joined through a path of `bridge` extra nodes.
    Barbell { clique: usize, bridge: usize },
}

impl SyntheticKind {
    pub fn name(&self) -> &'static str {
        match self {
            SyntheticKind::ErdosRenyi { .. } => "erdos_renyi",
            SyntheticKind::Cycle { .. } => "cycle",
            SyntheticKind::Path { .. } => "path",
            SyntheticKind::Grid { .. } => "grid",
            SyntheticKind::Tree { .. } => "tree",
            SyntheticKind::Barbell { .. } => "barbell",
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParam(msg));
        match *self {
            SyntheticKind::ErdosRenyi { n, p } => {
                if n == 0 {
                    return bad("erdos_renyi needs n >= 1".into());
                }
                if !(0.0..=1.0).contains(&p) {
                    return bad(format!("erdos_renyi probability {p} outside [0, 1]"));
                }
            }
            SyntheticKind::Cycle { n } if n < 3 => return bad(format!("cycle needs n >= 3, got {n}")),
            SyntheticKind::Path { n } | SyntheticKind::Tree { n } if n == 0 => {
                return bad("graph needs n >= 1".into())
            }
            SyntheticKind::Grid { rows, cols } if rows == 0 || cols == 0 => {
                return bad(format!("grid dimensions must be positive, got {rows}x{cols}"))
            }
            SyntheticKind::Barbell { clique, .. } if clique < 2 => {
                return bad(format!("barbell cliques need >= 2 nodes, got {clique}"))
            }
            _ => {}
        }
        Ok(())
    }
}

/// Generate a graph deterministically from `seed`.
///
/// With `connected` set, Erdős–Rényi draws are repeated on fresh substreams up
/// to 100 times until a connected sample appears. The other families are
/// connected by construction.
pub fn gen_synthetic(kind: SyntheticKind, seed: u64, connected: bool) -> Result<Graph> {
    kind.validate()?;
    let g = match kind {
        SyntheticKind::ErdosRenyi { n, p } => {
            let mut attempt = 0;
            loop {
                let g = erdos_renyi(n, p, seed, attempt)?;
                if !connected || g.is_connected() {
                    break g;
                }
                attempt += 1;
                if attempt == CONNECT_ATTEMPTS {
                    return Err(Error::InvalidParam(format!(
                        "no connected erdos_renyi(n={n}, p={p}) sample in {CONNECT_ATTEMPTS} attempts"
                    )));
                }
            }
        }
        SyntheticKind::Cycle { n } => Graph::new(n, (0..n).map(|i| (i, (i + 1) % n)))?,
        SyntheticKind::Path { n } => Graph::new(n, (1..n).map(|i| (i - 1, i)))?,
        SyntheticKind::Grid { rows, cols } => {
            let id = |r: usize, c: usize| r * cols + c;
            let mut edges = Vec::new();
            for r in 0..rows {
                for c in 0..cols {
                    if c + 1 < cols {
                        edges.push((id(r, c), id(r, c + 1)));
                    }
                    if r + 1 < rows {
                        edges.push((id(r, c), id(r + 1, c)));
                    }
                }
            }
            Graph::new(rows * cols, edges)?
        }
        SyntheticKind::Tree { n } => {
            let mut rng = substream(seed, Purpose::Generator, 0);
            Graph::new(n, (1..n).map(|i| (rng.random_range(0..i), i)))?
        }
        SyntheticKind::Barbell { clique, bridge } => {
            let n = 2 * clique + bridge;
            let mut edges = Vec::new();
            let second = clique + bridge;
            for a in 0..clique {
                for b in a + 1..clique {
                    edges.push((a, b));
                    edges.push((second + a, second + b));
                }
            }
            // chain: clique-1 -> bridge nodes -> second clique's first node
            let mut prev = clique - 1;
            for k in clique..second {
                edges.push((prev, k));
                prev = k;
            }
            edges.push((prev, second));
            Graph::new(n, edges)?
        }
    };
    Ok(g)
}

fn erdos_renyi(n: usize, p: f64, seed: u64, attempt: u64) -> Result<Graph> {
    let mut rng = substream(seed, Purpose::Generator, attempt);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.random::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    Graph::new(n, edges)
}
