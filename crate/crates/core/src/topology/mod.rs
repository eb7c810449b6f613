//! Doubly stochastic communication matrices over time-varying graphs.

mod consensus;
mod generate;
mod spectral;

pub use consensus::{consensus_average, consensus_average_with, consensus_rounds};
pub use generate::{generate_topology, TopologyKind};
pub use spectral::{matrix_power, mixing_deviation, second_singular_value};

use std::collections::VecDeque;

use crate::{Error, Matrix, Result};

/// Row and column sums must equal one within this tolerance.
pub const STOCHASTIC_TOL: f64 = 1e-12;

/// Undirected simple graph stored as a dense adjacency matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    adjacency: Vec<bool>,
}

impl Graph {
    pub fn empty(n: usize) -> Self {
        Self {
            n,
            adjacency: vec![false; n * n],
        }
    }

    /// Validates a symmetric, zero-diagonal adjacency matrix.
    pub fn from_adjacency(rows: &[Vec<bool>]) -> Result<Self> {
        let n = rows.len();
        let mut graph = Self::empty(n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: row.len(),
                });
            }
            if row[i] {
                return Err(Error::Topology(format!("self loop at node {i}")));
            }
            for (j, &edge) in row.iter().enumerate() {
                if edge != rows[j][i] {
                    return Err(Error::Topology(format!("adjacency not symmetric at ({i}, {j})")));
                }
                graph.adjacency[i * n + j] = edge;
            }
        }
        Ok(graph)
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut graph = Self::empty(n);
        for &(i, j) in edges {
            graph.add_edge(i, j)?;
        }
        Ok(graph)
    }

    pub fn add_edge(&mut self, i: usize, j: usize) -> Result<()> {
        if i >= self.n || j >= self.n {
            return Err(Error::Topology(format!("edge ({i}, {j}) out of range for {} nodes", self.n)));
        }
        if i == j {
            return Err(Error::Topology(format!("self loop at node {i}")));
        }
        self.adjacency[i * self.n + j] = true;
        self.adjacency[j * self.n + i] = true;
        Ok(())
    }

    pub fn nodes(&self) -> usize {
        self.n
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adjacency[i * self.n + j]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.neighbors(i).count()
    }

    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(move |&j| self.has_edge(i, j))
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().filter(|&&e| e).count() / 2
    }

    pub fn is_connected(&self) -> bool {
        if self.n == 0 {
            return false;
        }
        let mut seen = vec![false; self.n];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        let mut count = 1;
        while let Some(i) = queue.pop_front() {
            for j in self.neighbors(i) {
                if !seen[j] {
                    seen[j] = true;
                    count += 1;
                    queue.push_back(j);
                }
            }
        }
        count == self.n
    }
}

/// Rule used to turn a graph into a doubly stochastic matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightScheme {
    /// `w_ij = 1 / (1 + max(deg_i, deg_j))` on edges, remainder on the diagonal.
    Metropolis,
    /// Max-degree weights `(1 - alpha) / max_deg` on edges; every diagonal
    /// entry is at least `alpha`.
    LazyUniform { alpha: f64 },
}

/// Nonnegative doubly stochastic matrix with its cached second singular value.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix {
    entries: Matrix,
    sigma2: f64,
}

impl WeightMatrix {
    /// Validates `entries` and caches σ₂.
    ///
    /// Rejects matrices with σ₂ = 1: the consensus schedule is undefined when
    /// the averaging never contracts.
    pub fn new(entries: Matrix) -> Result<Self> {
        let n = entries.nrows();
        if n == 0 || entries.ncols() != n {
            return Err(Error::InvalidMatrix(format!(
                "expected a non-empty square matrix, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("weight matrix"));
        }
        if let Some(v) = entries.iter().find(|&&v| v < 0.0) {
            return Err(Error::InvalidMatrix(format!("negative entry {v}")));
        }
        for i in 0..n {
            let row: f64 = entries.row(i).iter().sum();
            let col: f64 = entries.column(i).iter().sum();
            if (row - 1.0).abs() > STOCHASTIC_TOL {
                return Err(Error::InvalidMatrix(format!("row {i} sums to {row}")));
            }
            if (col - 1.0).abs() > STOCHASTIC_TOL {
                return Err(Error::InvalidMatrix(format!("column {i} sums to {col}")));
            }
        }
        let sigma2 = second_singular_value(&entries)?;
        if sigma2 >= 1.0 - STOCHASTIC_TOL {
            return Err(Error::DoesNotMix(sigma2));
        }
        Ok(Self { entries, sigma2 })
    }

    pub fn entries(&self) -> &Matrix {
        &self.entries
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn nodes(&self) -> usize {
        self.entries.nrows()
    }

    /// Support graph (off-diagonal positive entries).
    pub fn support(&self) -> Graph {
        let n = self.nodes();
        let mut graph = Graph::empty(n);
        for i in 0..n {
            for j in 0..n {
                if i != j && (self.entries[(i, j)] > 0.0 || self.entries[(j, i)] > 0.0) {
                    graph.adjacency[i * n + j] = true;
                }
            }
        }
        graph
    }
}

/// Builds a symmetric doubly stochastic matrix supported on `graph` plus the
/// diagonal.
pub fn build_weight_matrix(graph: &Graph, scheme: WeightScheme) -> Result<WeightMatrix> {
    let n = graph.nodes();
    if n == 0 {
        return Err(Error::Topology("graph has no nodes".into()));
    }
    if !graph.is_connected() {
        return Err(Error::Disconnected);
    }
    let degrees: Vec<usize> = (0..n).map(|i| graph.degree(i)).collect();
    let mut w = Matrix::zeros(n, n);
    match scheme {
        WeightScheme::Metropolis => {
            for i in 0..n {
                for j in graph.neighbors(i) {
                    w[(i, j)] = 1.0 / (1 + degrees[i].max(degrees[j])) as f64;
                }
            }
        }
        WeightScheme::LazyUniform { alpha } => {
            if !(alpha > 0.0 && alpha < 1.0) {
                return Err(Error::InvalidArgument(format!(
                    "lazy alpha must lie in (0, 1), got {alpha}"
                )));
            }
            let max_degree = degrees.iter().copied().max().unwrap_or(0).max(1);
            let weight = (1.0 - alpha) / max_degree as f64;
            for i in 0..n {
                for j in graph.neighbors(i) {
                    w[(i, j)] = weight;
                }
            }
        }
    }
    for i in 0..n {
        let off: f64 = (0..n).filter(|&j| j != i).map(|j| w[(i, j)]).sum();
        w[(i, i)] = 1.0 - off;
    }
    WeightMatrix::new(w)
}

/// Pool of weight matrices visited in round-robin order: round `t` uses
/// `pool[(t - 1) mod P]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TopologySchedule {
    pool: Vec<WeightMatrix>,
}

impl TopologySchedule {
    pub fn new(pool: Vec<WeightMatrix>) -> Result<Self> {
        let first = pool
            .first()
            .ok_or_else(|| Error::Topology("empty matrix pool".into()))?;
        let n = first.nodes();
        if let Some(w) = pool.iter().find(|w| w.nodes() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: w.nodes(),
            });
        }
        if pool.iter().any(|w| !w.support().is_connected()) {
            return Err(Error::Disconnected);
        }
        Ok(Self { pool })
    }

    pub fn single(w: WeightMatrix) -> Self {
        Self { pool: vec![w] }
    }

    /// Matrix for round `t` (1-based; `t = 0` is treated as round 1).
    pub fn at(&self, t: usize) -> &WeightMatrix {
        &self.pool[t.saturating_sub(1) % self.pool.len()]
    }

    pub fn pool(&self) -> &[WeightMatrix] {
        &self.pool
    }

    pub fn nodes(&self) -> usize {
        self.pool[0].nodes()
    }

    /// Largest σ₂ in the pool.
    pub fn worst_sigma2(&self) -> f64 {
        self.pool.iter().map(|w| w.sigma2()).fold(0.0, f64::max)
    }
}
