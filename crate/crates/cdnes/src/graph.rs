//! Communication topologies and doubly stochastic mixing matrices.
//!
//! The consensus step contracts disagreement by the spectral radius of
//! `W - (1/n)*1*1^T`; everything downstream (step-size certificates, gossip
//! rates) is driven by that number, so it is computed eagerly and stored on
//! the matrix.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::rng::{self, LABEL_GRAPH};
use rand::Rng;

/// Tolerance for row/column sums of a doubly stochastic matrix.
pub const STOCHASTIC_TOL: f64 = 1e-12;

/// Resample cap for random connected graph generation.
const MAX_GRAPH_ATTEMPTS: usize = 1000;

/// Undirected graph on nodes `0..n`; edges stored as normalized `(lo, hi)`
/// pairs in a BTreeSet for deterministic iteration order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Topology {
    n: usize,
    edges: BTreeSet<(usize, usize)>,
}

impl Topology {
    /// Build from an explicit edge list. Rejects self-loops and out-of-range
    /// endpoints; duplicate and swapped pairs collapse to one edge.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidArgument(format!("need at least 2 nodes, got {n}")));
        }
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            if a == b {
                return Err(Error::InvalidArgument(format!("self-loop at node {a}")));
            }
            if a >= n || b >= n {
                return Err(Error::InvalidArgument(format!(
                    "edge ({a}, {b}) out of range for {n} nodes"
                )));
            }
            set.insert((a.min(b), a.max(b)));
        }
        Ok(Self { n, edges: set })
    }

    /// Path 0-1-2-...-(n-1).
    pub fn path(n: usize) -> Result<Self> {
        Self::new(n, (0..n.saturating_sub(1)).map(|i| (i, i + 1)))
    }

    /// Complete graph.
    pub fn complete(n: usize) -> Result<Self> {
        Self::new(n, (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))))
    }

    /// Ring 0-1-...-(n-1)-0.
    pub fn ring(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidArgument(format!("ring needs at least 3 nodes, got {n}")));
        }
        Self::new(n, (0..n).map(|i| (i, (i + 1) % n)))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edges.contains(&(a.min(b), a.max(b)))
    }

    pub fn degree(&self, i: usize) -> usize {
        self.edges.iter().filter(|&&(a, b)| a == i || b == i).count()
    }

    pub fn max_degree(&self) -> usize {
        (0..self.n).map(|i| self.degree(i)).max().unwrap_or(0)
    }

    pub fn neighbors(&self, i: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .edges
            .iter()
            .filter_map(|&(a, b)| {
                if a == i {
                    Some(b)
                } else if b == i {
                    Some(a)
                } else {
                    None
                }
            })
            .collect();
        out.sort_unstable();
        out
    }

    /// Breadth-first reachability from node 0.
    pub fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.n];
        let mut queue = std::collections::VecDeque::from([0usize]);
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = queue.pop_front() {
            for v in self.neighbors(u) {
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    queue.push_back(v);
                }
            }
        }
        count == self.n
    }

    /// Connectivity is required by every consumer of a mixing matrix.
    pub fn validate(&self) -> Result<()> {
        if self.is_connected() {
            Ok(())
        } else {
            Err(Error::NotConnected)
        }
    }

    /// One `i j` pair per line, 1-indexed, sorted.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        for &(a, b) in &self.edges {
            let _ = writeln!(out, "{} {}", a + 1, b + 1);
        }
        out
    }

    /// Parse the `to_edge_list` format. `n` is the declared node count
    /// (isolated trailing nodes cannot be inferred from edges alone).
    pub fn from_edge_list(n: usize, text: &str) -> Result<Self> {
        let mut edges = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut it = line.split_whitespace();
            let parse = |tok: Option<&str>| -> Result<usize> {
                tok.ok_or_else(|| Error::Parse(format!("line {}: expected two indices", lineno + 1)))?
                    .parse::<usize>()
                    .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))
            };
            let a = parse(it.next())?;
            let b = parse(it.next())?;
            if a == 0 || b == 0 {
                return Err(Error::Parse(format!("line {}: indices are 1-based", lineno + 1)));
            }
            edges.push((a - 1, b - 1));
        }
        Self::new(n, edges)
    }
}

/// Erdős–Rényi sampling, resampled until connected (bounded attempts).
/// Deterministic for a fixed seed: pairs are visited in lexicographic order
/// and all attempts draw from one substream.
pub fn random_connected_graph(n: usize, edge_prob: f64, seed: u64) -> Result<Topology> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 nodes, got {n}")));
    }
    if !(edge_prob > 0.0 && edge_prob <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "edge_prob must be in (0, 1], got {edge_prob}"
        )));
    }
    let mut rng = rng::substream(seed, LABEL_GRAPH, n as u64, 0);
    for _ in 0..MAX_GRAPH_ATTEMPTS {
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if rng.gen::<f64>() < edge_prob {
                    edges.push((i, j));
                }
            }
        }
        let topo = Topology::new(n, edges)?;
        if topo.is_connected() {
            return Ok(topo);
        }
    }
    Err(Error::GraphGeneration { n, edge_prob, attempts: MAX_GRAPH_ATTEMPTS })
}

/// Symmetric doubly stochastic weights with their spectral quantities.
#[derive(Debug, Clone)]
pub struct MixingMatrix {
    w: DMatrix<f64>,
    /// Spectral radius of `W - (1/n)*1*1^T`.
    rho_w: f64,
    /// `1 - rho_w`.
    s: f64,
}

impl MixingMatrix {
    /// Wrap an explicit matrix, checking symmetry and stochasticity and
    /// computing the spectral quantities. Zero gap is allowed here so the
    /// degenerate case stays observable; [`MixingMatrix::validate`] flags it.
    pub fn from_matrix(w: DMatrix<f64>) -> Result<Self> {
        let (rho_w, s) = spectral_gap(&w)?;
        Ok(Self { w, rho_w, s })
    }

    /// Uniform-weight rule: every edge gets `1/max_degree`, diagonals absorb
    /// the remainder `1 - deg(i)/max_degree`.
    pub fn max_degree(topo: &Topology) -> Result<Self> {
        topo.validate()?;
        let n = topo.n();
        let wij = 1.0 / topo.max_degree() as f64;
        let mut w = DMatrix::zeros(n, n);
        for (a, b) in topo.edges() {
            w[(a, b)] = wij;
            w[(b, a)] = wij;
        }
        for i in 0..n {
            w[(i, i)] = 1.0 - topo.degree(i) as f64 * wij;
        }
        Self::from_matrix(w)
    }

    /// Degree-pair rule `w_ij = 1/(1 + max(deg(i), deg(j)))`. Not used by the
    /// reference experiments; provided because the uniform rule degenerates on
    /// some small graphs (complete graph on two nodes has zero gap under
    /// `max_degree`, but not here).
    pub fn metropolis(topo: &Topology) -> Result<Self> {
        topo.validate()?;
        let n = topo.n();
        let mut w = DMatrix::zeros(n, n);
        for (a, b) in topo.edges() {
            let wij = 1.0 / (1.0 + topo.degree(a).max(topo.degree(b)) as f64);
            w[(a, b)] = wij;
            w[(b, a)] = wij;
        }
        for i in 0..n {
            let off: f64 = (0..n).filter(|&j| j != i).map(|j| w[(i, j)]).sum();
            w[(i, i)] = 1.0 - off;
        }
        Self::from_matrix(w)
    }

    pub fn n(&self) -> usize {
        self.w.nrows()
    }

    pub fn w(&self) -> &DMatrix<f64> {
        &self.w
    }

    pub fn rho_w(&self) -> f64 {
        self.rho_w
    }

    /// Spectral gap `1 - rho_w`.
    pub fn s(&self) -> f64 {
        self.s
    }

    /// `||I - W||_F^2`, a constant of the rate certificate.
    pub fn i_minus_w_frob_sq(&self) -> f64 {
        let n = self.n();
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                let e = if i == j { 1.0 - self.w[(i, j)] } else { -self.w[(i, j)] };
                acc += e * e;
            }
        }
        acc
    }

    /// `||I - W||_2^2` (largest eigenvalue squared; I - W is symmetric PSD).
    pub fn i_minus_w_spectral_sq(&self) -> f64 {
        let n = self.n();
        let mut m = -self.w.clone();
        for i in 0..n {
            m[(i, i)] += 1.0;
        }
        let lmax = SymmetricEigen::new(m).eigenvalues.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
        lmax * lmax
    }

    /// Full invariant check: entry signs, support, stochasticity, symmetry,
    /// and a usable (positive) spectral gap.
    pub fn validate(&self, topo: Option<&Topology>) -> Result<()> {
        let n = self.n();
        let mut max_dev = 0.0f64;
        for i in 0..n {
            let row: f64 = (0..n).map(|j| self.w[(i, j)]).sum();
            let col: f64 = (0..n).map(|j| self.w[(j, i)]).sum();
            max_dev = max_dev.max((row - 1.0).abs()).max((col - 1.0).abs());
            for j in 0..n {
                let wij = self.w[(i, j)];
                if wij < 0.0 {
                    return Err(Error::InvalidArgument(format!("negative weight at ({i}, {j})")));
                }
                if let Some(t) = topo {
                    if wij > 0.0 && i != j && !t.has_edge(i, j) {
                        return Err(Error::InvalidArgument(format!(
                            "weight on non-edge ({i}, {j})"
                        )));
                    }
                }
            }
        }
        if max_dev > STOCHASTIC_TOL {
            return Err(Error::NotDoublyStochastic { max_dev });
        }
        if self.s <= 0.0 {
            return Err(Error::DegenerateGap);
        }
        Ok(())
    }

    /// Dense CSV (one row per line) for external inspection.
    pub fn to_csv(&self) -> String {
        let n = self.n();
        let mut out = String::new();
        for i in 0..n {
            for j in 0..n {
                if j > 0 {
                    out.push(',');
                }
                let _ = write!(out, "{}", self.w[(i, j)]);
            }
            out.push('\n');
        }
        out
    }
}

/// Spectral radius of the deflated matrix `W - (1/n)*1*1^T` and the gap
/// `1 - rho`. Rejects non-symmetric input; symmetry is what makes the
/// eigendecomposition exact.
pub fn spectral_gap(w: &DMatrix<f64>) -> Result<(f64, f64)> {
    let n = w.nrows();
    if w.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, got: w.ncols() });
    }
    let mut max_dev = 0.0f64;
    for i in 0..n {
        for j in i + 1..n {
            max_dev = max_dev.max((w[(i, j)] - w[(j, i)]).abs());
        }
    }
    if max_dev > 1e-12 {
        return Err(Error::NotSymmetric { max_dev });
    }
    let avg = 1.0 / n as f64;
    let mut deflated = w.clone();
    for i in 0..n {
        for j in 0..n {
            deflated[(i, j)] -= avg;
        }
    }
    let rho = SymmetricEigen::new(deflated)
        .eigenvalues
        .iter()
        .fold(0.0f64, |acc, &l| acc.max(l.abs()));
    Ok((rho, 1.0 - rho))
}
