use std::io::{BufRead, Write};

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::{gen_synthetic, Graph, SyntheticKind};
use crate::error::{Error, Result};
use crate::rng::{substream, Purpose};

/// An ordered list of graphs with a train/validation split over their indices.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GraphCorpus {
    pub graphs: Vec<Graph>,
    pub train: Vec<usize>,
    pub valid: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct GraphRecord {
    id: String,
    n: usize,
    edges: Vec<[usize; 2]>,
}

impl GraphCorpus {
    /// All graphs in the training split.
    pub fn new(graphs: Vec<Graph>) -> Self {
        let train = (0..graphs.len()).collect();
        Self { graphs, train, valid: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.graphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graphs.is_empty()
    }

    /// Seeded shuffle, then the first `round(len * valid_fraction)` indices go
    /// to validation. At least one graph always stays in training.
    pub fn split(mut self, valid_fraction: f64, seed: u64) -> Result<Self> {
        if !(0.0..1.0).contains(&valid_fraction) {
            return Err(Error::InvalidParam(format!(
                "validation fraction {valid_fraction} outside [0, 1)"
            )));
        }
        let mut idx: Vec<usize> = (0..self.graphs.len()).collect();
        idx.shuffle(&mut substream(seed, Purpose::Split, 0));
        let n_valid = ((self.graphs.len() as f64 * valid_fraction).round() as usize)
            .min(self.graphs.len().saturating_sub(1));
        let mut valid = idx[..n_valid].to_vec();
        let mut train = idx[n_valid..].to_vec();
        valid.sort_unstable();
        train.sort_unstable();
        self.train = train;
        self.valid = valid;
        Ok(self)
    }

    pub fn train_graphs(&self) -> impl Iterator<Item = &Graph> {
        self.train.iter().map(|&i| &self.graphs[i])
    }

    pub fn valid_graphs(&self) -> impl Iterator<Item = &Graph> {
        self.valid.iter().map(|&i| &self.graphs[i])
    }

    /// Mixed synthetic corpus. Graph `i` uses `families[i % families.len()]`
    /// with a node count drawn uniformly from `n_range`.
    pub fn synthetic_mix(
        families: &[Family],
        count: usize,
        n_range: (usize, usize),
        seed: u64,
    ) -> Result<Self> {
        let (lo, hi) = n_range;
        if families.is_empty() || lo == 0 || lo > hi {
            return Err(Error::InvalidParam(format!(
                "need at least one family and a valid node range, got {n_range:?}"
            )));
        }
        let mut graphs = Vec::with_capacity(count);
        for i in 0..count {
            let mut rng = substream(seed, Purpose::Generator, (1 << 40) | i as u64);
            let family = families[i % families.len()];
            let n = rng.random_range(lo..=hi);
            let kind = family.kind_for(n, (lo, hi), &mut rng);
            let g = gen_synthetic(kind, rng.random(), family == Family::ErdosRenyi)?;
            graphs.push(g.with_id(format!("{}-{i}", family.name())));
        }
        Ok(Self::new(graphs))
    }
}

/// Graph families available to [`GraphCorpus::synthetic_mix`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    ErdosRenyi,
    Cycle,
    Path,
    Grid,
    Tree,
    Barbell,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::ErdosRenyi => "erdos_renyi",
            Family::Cycle => "cycle",
            Family::Path => "path",
            Family::Grid => "grid",
            Family::Tree => "tree",
            Family::Barbell => "barbell",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "erdos_renyi" | "er" => Family::ErdosRenyi,
            "cycle" => Family::Cycle,
            "path" => Family::Path,
            "grid" => Family::Grid,
            "tree" => Family::Tree,
            "barbell" => Family::Barbell,
            other => return Err(Error::InvalidParam(format!("unknown graph family `{other}`"))),
        })
    }

    fn kind_for(self, n: usize, (lo, hi): (usize, usize), rng: &mut crate::rng::Rng) -> SyntheticKind {
        match self {
            // mean degree about 3.5, sparse but usually connectable
            Family::ErdosRenyi => SyntheticKind::ErdosRenyi {
                n,
                p: if n > 1 { (3.5 / (n - 1) as f64).min(1.0) } else { 0.0 },
            },
            Family::Cycle => SyntheticKind::Cycle { n: n.max(3) },
            Family::Path => SyntheticKind::Path { n },
            Family::Tree => SyntheticKind::Tree { n },
            Family::Grid => {
                let max_rows = ((n as f64).sqrt() as usize).max(1);
                let rows = rng.random_range(1..=max_rows).max(2.min(max_rows));
                let cols = (n / rows).max(1);
                // keep rows * cols inside the requested range where possible
                let cols = if rows * cols < lo { lo.div_ceil(rows) } else { cols };
                let cols = if rows * cols > hi { (hi / rows).max(1) } else { cols };
                SyntheticKind::Grid { rows, cols }
            }
            Family::Barbell => {
                let clique = (n / 3).max(2);
                SyntheticKind::Barbell { clique, bridge: n.saturating_sub(2 * clique) }
            }
        }
    }
}

/// Read a JSONL corpus: one `{"id": str, "n": int, "edges": [[u, v], ...]}`
/// object per line. Blank lines are skipped.
pub fn read_corpus(reader: impl BufRead) -> Result<GraphCorpus> {
    let mut graphs = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let perr = |msg: String| Error::Parse { line: idx + 1, msg };
        let rec: GraphRecord = serde_json::from_str(&line).map_err(|e| perr(e.to_string()))?;
        let g = Graph::new(rec.n, rec.edges.iter().map(|e| (e[0], e[1])))
            .map_err(|e| perr(e.to_string()))?;
        graphs.push(g.with_id(rec.id));
    }
    Ok(GraphCorpus::new(graphs))
}

/// Write graphs in canonical edge order. Graphs without an id get `g{index}`.
pub fn write_corpus(mut writer: impl Write, corpus: &GraphCorpus) -> Result<()> {
    for (i, g) in corpus.graphs.iter().enumerate() {
        let rec = GraphRecord {
            id: g.id.clone().unwrap_or_else(|| format!("g{i}")),
            n: g.n(),
            edges: g.edges().iter().map(|&(u, v)| [u, v]).collect(),
        };
        serde_json::to_writer(&mut writer, &rec).map_err(std::io::Error::from)?;
        writer.write_all(b"\n")?;
    }
    writer.flush()?;
    Ok(())
}
