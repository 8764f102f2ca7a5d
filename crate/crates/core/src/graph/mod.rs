//! Undirected simple graphs, their normalized operators and exact hop targets.

mod corpus;
mod hops;
mod operators;
mod synth;

pub use corpus::{read_corpus, write_corpus, Family, GraphCorpus};
pub use hops::{hop_adjacency_stack, HopAdjacencyStack};
pub(crate) use hops::validate_hops;
pub use operators::{normalized_operators, NormalizedOperators};
pub use synth::{gen_synthetic, SyntheticKind};

use std::io::BufRead;

use ndarray::Array2;

use crate::error::{Error, Result};

/// Undirected simple graph on nodes `0..n`.
///
/// Edges are kept canonical: each pair stored once as `(min, max)`, sorted
/// lexicographically, no duplicates and no self-loops.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    pub id: Option<String>,
}

impl Graph {
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParam("graph must have at least one node".into()));
        }
        let mut canon = Vec::new();
        for (u, v) in edges {
            for index in [u, v] {
                if index >= n {
                    return Err(Error::NodeOutOfRange { index, n });
                }
            }
            if u == v {
                return Err(Error::SelfLoop(u));
            }
            canon.push((u.min(v), u.max(v)));
        }
        canon.sort_unstable();
        canon.dedup();
        Ok(Self { n, edges: canon, id: None })
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = Some(id.into());
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn adjacency(&self) -> Array2<f64> {
        let mut a = Array2::zeros((self.n, self.n));
        for &(u, v) in &self.edges {
            a[[u, v]] = 1.0;
            a[[v, u]] = 1.0;
        }
        a
    }

    pub fn neighbors(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for &(u, v) in &self.edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        adj
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n];
        for &(u, v) in &self.edges {
            deg[u] += 1;
            deg[v] += 1;
        }
        deg
    }

    pub fn is_connected(&self) -> bool {
        let adj = self.neighbors();
        let mut seen = vec![false; self.n];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    stack.push(v);
                }
            }
        }
        count == self.n
    }

    /// Relabel nodes so that node `u` becomes `perm[u]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        crate::tensor::validate_permutation(perm, self.n)?;
        let mut g = Graph::new(self.n, self.edges.iter().map(|&(u, v)| (perm[u], perm[v])))?;
        g.id = self.id.clone();
        Ok(g)
    }
}

/// Parse the plain edge-list format: a header line `n m` followed by `m` lines
/// `u v`. Blank lines and lines starting with `#` are skipped.
pub fn parse_edge_list(reader: impl BufRead) -> Result<Graph> {
    let mut header: Option<(usize, usize)> = None;
    let mut pairs = Vec::new();
    let mut last_line = 0;
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        last_line = line_no;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let (a, b) = parse_pair(trimmed, line_no)?;
        match header {
            None => header = Some((a, b)),
            Some((n, m)) => {
                if pairs.len() == m {
                    return Err(Error::Parse {
                        line: line_no,
                        msg: format!("more than the {m} declared edges"),
                    });
                }
                for index in [a, b] {
                    if index >= n {
                        return Err(Error::Parse {
                            line: line_no,
                            msg: format!("node index {index} out of range for n = {n}"),
                        });
                    }
                }
                if a == b {
                    return Err(Error::Parse { line: line_no, msg: format!("self-loop at node {a}") });
                }
                pairs.push((a, b));
            }
        }
    }
    let Some((n, m)) = header else {
        return Err(Error::Parse { line: last_line.max(1), msg: "missing `n m` header".into() });
    };
    if pairs.len() != m {
        return Err(Error::Parse {
            line: last_line,
            msg: format!("header declares {m} edges but {} were listed", pairs.len()),
        });
    }
    Graph::new(n, pairs).map_err(|e| Error::Parse { line: 1, msg: e.to_string() })
}

fn parse_pair(line: &str, line_no: usize) -> Result<(usize, usize)> {
    let mut parts = line.split_whitespace();
    let mut next = || -> Result<usize> {
        let tok = parts.next().ok_or_else(|| Error::Parse {
            line: line_no,
            msg: "expected two integers".into(),
        })?;
        tok.parse().map_err(|_| Error::Parse {
            line: line_no,
            msg: format!("`{tok}` is not a non-negative integer"),
        })
    };
    let a = next()?;
    let b = next()?;
    if parts.next().is_some() {
        return Err(Error::Parse { line: line_no, msg: "expected exactly two integers".into() });
    }
    Ok((a, b))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<Graph> {
        parse_edge_list(text.as_bytes())
    }

    #[test]
    fn parses_path() {
        let g = parse("3 2\n0 1\n1 2").unwrap();
        assert_eq!(g.n(), 3);
        assert_eq!(g.edges(), &[(0, 1), (1, 2)]);
    }

    #[test]
    fn rejects_self_loop() {
        let err = parse("2 1\n0 0").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        assert!(err.to_string().contains("self-loop"));
    }

    #[test]
    fn dedups_repeated_edges() {
        let g = parse("4 3\n0 1\n0 1\n2 3").unwrap();
        assert_eq!(g.edges(), &[(0, 1), (2, 3)]);
    }

    #[test]
    fn comments_and_reversed_pairs() {
        let g = parse("# header next\n3 2\n# edge\n2 1\n1 0\n").unwrap();
        assert_eq!(g.edges(), &[(0, 1), (1, 2)]);
    }

    #[test]
    fn reports_line_numbers() {
        assert!(matches!(parse("3 2\n0 1\n1 x"), Err(Error::Parse { line: 3, .. })));
        assert!(matches!(parse("3 2\n0 1\n1 3"), Err(Error::Parse { line: 3, .. })));
        assert!(matches!(parse("3 1\n0 1\n1 2"), Err(Error::Parse { line: 3, .. })));
        assert!(matches!(parse("3 3\n0 1\n1 2"), Err(Error::Parse { .. })));
        assert!(matches!(parse(""), Err(Error::Parse { .. })));
    }

    #[test]
    fn adjacency_symmetric_zero_diagonal() {
        let g = Graph::new(4, [(0, 1), (1, 2), (3, 2)]).unwrap();
        let a = g.adjacency();
        for u in 0..4 {
            assert_eq!(a[[u, u]], 0.0);
            for v in 0..4 {
                assert_eq!(a[[u, v]], a[[v, u]]);
            }
        }
        assert_eq!(a.sum(), 6.0);
    }

    #[test]
    fn permuted_relabels() {
        let g = Graph::new(3, [(0, 1)]).unwrap();
        let h = g.permuted(&[2, 0, 1]).unwrap();
        assert_eq!(h.edges(), &[(0, 2)]);
        assert!(g.permuted(&[0, 0, 1]).is_err());
    }
}
