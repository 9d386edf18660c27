//! Undirected simple graphs, random instance generators and the structural
//! reductions (complement, line graph, positive-weight induced subgraph).
//!
//! Vertices are `0..n` in memory. Instance files use 1-based labels.

use std::collections::BTreeSet;
use std::path::Path;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
    weights: Option<Vec<f64>>,
}

impl Graph {
    /// Builds a graph from an edge list. Pairs may be given in either order;
    /// self-loops, duplicates and out-of-range endpoints are rejected.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            if a == b {
                return Err(Error::InvalidGraph(format!("self-loop on vertex {a}")));
            }
            if a >= n || b >= n {
                return Err(Error::InvalidGraph(format!(
                    "edge ({a}, {b}) out of range for n = {n}"
                )));
            }
            let e = (a.min(b), a.max(b));
            if !set.insert(e) {
                return Err(Error::InvalidGraph(format!(
                    "duplicate edge ({}, {})",
                    e.0, e.1
                )));
            }
        }
        Ok(Self::from_sorted_edges(n, set.into_iter().collect()))
    }

    fn from_sorted_edges(n: usize, edges: Vec<(usize, usize)>) -> Self {
        let mut adjacency = vec![Vec::new(); n];
        for &(u, v) in &edges {
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Graph {
            n,
            edges,
            adjacency,
            weights: None,
        }
    }

    pub fn empty(n: usize) -> Self {
        Self::from_sorted_edges(n, Vec::new())
    }

    pub fn complete(n: usize) -> Self {
        let edges = (0..n)
            .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
            .collect();
        Self::from_sorted_edges(n, edges)
    }

    pub fn cycle(n: usize) -> Self {
        assert!(n >= 3, "a cycle needs at least 3 vertices");
        Self::new(n, (0..n).map(|u| (u, (u + 1) % n))).expect("cycle edges are valid")
    }

    pub fn with_weights(mut self, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != self.n {
            return Err(Error::InvalidGraph(format!(
                "weights has length {}, expected {}",
                weights.len(),
                self.n
            )));
        }
        self.weights = Some(weights);
        Ok(self)
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

    pub fn weights(&self) -> Option<&[f64]> {
        self.weights.as_deref()
    }

    pub fn neighbors(&self, u: usize) -> &[usize] {
        &self.adjacency[u]
    }

    pub fn degree(&self, u: usize) -> usize {
        self.adjacency[u].len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n && v < self.n && self.adjacency[u].binary_search(&v).is_ok()
    }

    /// Number of unordered vertex pairs, C(n, 2).
    pub fn num_pairs(&self) -> usize {
        self.n * self.n.saturating_sub(1) / 2
    }

    pub fn density(&self) -> f64 {
        match self.num_pairs() {
            0 => 0.0,
            pairs => self.edges.len() as f64 / pairs as f64,
        }
    }

    /// Neighborhoods as bitmasks. Only available for n <= 64.
    pub fn neighbor_masks(&self) -> Result<Vec<u64>> {
        if self.n > 64 {
            return Err(Error::TooLarge {
                what: "bitmask adjacency",
                n: self.n,
                limit: 64,
            });
        }
        Ok(self
            .adjacency
            .iter()
            .map(|list| list.iter().fold(0u64, |m, &v| m | (1u64 << v)))
            .collect())
    }

    /// True iff no two members of `set` are adjacent. Out-of-range members
    /// make the set invalid.
    pub fn is_independent_set(&self, set: &[usize]) -> bool {
        if set.iter().any(|&u| u >= self.n) {
            return false;
        }
        set.iter()
            .enumerate()
            .all(|(i, &u)| set[i + 1..].iter().all(|&v| u != v && !self.has_edge(u, v)))
    }

    /// Same vertices, edge set replaced by its complement. Weights are kept.
    pub fn complement(&self) -> Graph {
        let mut edges = Vec::with_capacity(self.num_pairs() - self.edges.len());
        for u in 0..self.n {
            for v in u + 1..self.n {
                if !self.has_edge(u, v) {
                    edges.push((u, v));
                }
            }
        }
        let mut g = Self::from_sorted_edges(self.n, edges);
        g.weights = self.weights.clone();
        g
    }

    /// One vertex per edge, adjacent when the edges share an endpoint.
    /// The returned map gives, for each line-graph vertex, its original edge.
    pub fn line_graph(&self) -> (Graph, Vec<(usize, usize)>) {
        let m = self.edges.len();
        let mut edges = Vec::new();
        for i in 0..m {
            let (a, b) = self.edges[i];
            for j in i + 1..m {
                let (c, d) = self.edges[j];
                if a == c || a == d || b == c || b == d {
                    edges.push((i, j));
                }
            }
        }
        (Self::from_sorted_edges(m, edges), self.edges.clone())
    }

    /// Subgraph induced by `keep` (any order, duplicates ignored). Local
    /// vertex `i` of the result is the `i`-th smallest kept vertex.
    pub fn induced_subgraph(&self, keep: &[usize]) -> Subgraph {
        let original: Vec<usize> = keep
            .iter()
            .copied()
            .filter(|&u| u < self.n)
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let mut local = vec![None; self.n];
        for (i, &u) in original.iter().enumerate() {
            local[u] = Some(i);
        }
        let edges = self
            .edges
            .iter()
            .filter_map(|&(u, v)| Some((local[u]?, local[v]?)))
            .collect();
        let mut graph = Self::from_sorted_edges(original.len(), edges);
        if let Some(w) = &self.weights {
            graph.weights = Some(original.iter().map(|&u| w[u]).collect());
        }
        Subgraph {
            graph,
            original,
            local,
        }
    }

    /// Keeps the vertices whose dual value is strictly positive; the kept
    /// duals become the vertex weights of the subgraph.
    pub fn induced_positive_subgraph(&self, duals: &[f64]) -> Result<Subgraph> {
        if duals.len() != self.n {
            return Err(Error::InvalidArgument(format!(
                "dual vector has length {}, expected {}",
                duals.len(),
                self.n
            )));
        }
        let keep: Vec<usize> = (0..self.n).filter(|&u| duals[u] > 0.0).collect();
        let mut sub = self.induced_subgraph(&keep);
        sub.graph.weights = Some(keep.iter().map(|&u| duals[u]).collect());
        Ok(sub)
    }

    pub fn to_file_format(&self) -> GraphFile {
        GraphFile {
            n: self.n,
            edges: self.edges.iter().map(|&(u, v)| [u + 1, v + 1]).collect(),
            weights: self.weights.clone(),
        }
    }

    pub fn from_file_format(file: &GraphFile) -> Result<Self> {
        let mut edges = Vec::with_capacity(file.edges.len());
        for &[u, v] in &file.edges {
            if u == 0 || v == 0 {
                return Err(Error::InvalidGraph(
                    "vertex labels in files are 1-based".into(),
                ));
            }
            edges.push((u - 1, v - 1));
        }
        let g = Graph::new(file.n, edges)?;
        match &file.weights {
            Some(w) => g.with_weights(w.clone()),
            None => Ok(g),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file_format()).expect("graph serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: GraphFile = serde_json::from_str(text)?;
        Self::from_file_format(&file)
    }

    pub fn read_file(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn write_file(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut text = self.to_json();
        text.push('\n');
        std::fs::write(path, text)?;
        Ok(())
    }
}

/// On-disk graph representation, 1-based vertex labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphFile {
    pub n: usize,
    pub edges: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
}

/// An induced subgraph together with its vertex correspondence.
#[derive(Debug, Clone)]
pub struct Subgraph {
    pub graph: Graph,
    /// `original[i]` is the parent vertex of local vertex `i`.
    pub original: Vec<usize>,
    local: Vec<Option<usize>>,
}

impl Subgraph {
    /// Parent vertex -> local vertex, if kept.
    pub fn local_index(&self, parent: usize) -> Option<usize> {
        self.local.get(parent).copied().flatten()
    }

    pub fn old_to_new(&self) -> &[Option<usize>] {
        &self.local
    }

    pub fn to_original(&self, local_set: &[usize]) -> Vec<usize> {
        let mut out: Vec<usize> = local_set.iter().map(|&i| self.original[i]).collect();
        out.sort_unstable();
        out
    }
}

/// G(n, p) by geometric skipping over the C(n, 2) candidate pairs, so the
/// cost is proportional to the number of generated edges.
pub fn gen_gnp(n: usize, p: f64, seed: u64) -> Result<Graph> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!(
            "edge probability {p} not in [0, 1]"
        )));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    if p == 0.0 {
        return Ok(Graph::empty(n));
    }
    if p == 1.0 {
        return Ok(Graph::complete(n));
    }
    let mut rng = rng_from_seed(seed);
    let log_q = (1.0 - p).ln();
    let mut edges = Vec::new();
    let mut v: usize = 1;
    let mut w: i64 = -1;
    while v < n {
        let r: f64 = rng.gen();
        w += 1 + ((1.0 - r).ln() / log_q).floor() as i64;
        while w >= v as i64 && v < n {
            w -= v as i64;
            v += 1;
        }
        if v < n {
            edges.push((w as usize, v));
        }
    }
    edges.sort_unstable();
    Ok(Graph::from_sorted_edges(n, edges))
}

/// A unit-disk graph and the points that realize it.
#[derive(Debug, Clone)]
pub struct UnitDiskGraph {
    pub graph: Graph,
    pub positions: Vec<[f64; 2]>,
    /// Connection threshold in unit-square coordinates.
    pub radius: f64,
}

/// Unit-disk graph with an exact target density: `n` uniform points in the
/// unit square, threshold set to the ceil(p C(n,2))-th smallest pairwise
/// distance, edge iff distance <= threshold.
pub fn gen_unit_disk(n: usize, p: f64, seed: u64) -> Result<UnitDiskGraph> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "target density {p} not in (0, 1]"
        )));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    let mut rng = rng_from_seed(seed);
    let positions: Vec<[f64; 2]> = (0..n)
        .map(|_| [rng.gen::<f64>(), rng.gen::<f64>()])
        .collect();
    let pairs = n * (n - 1) / 2;
    if pairs == 0 {
        return Ok(UnitDiskGraph {
            graph: Graph::empty(n),
            positions,
            radius: 0.0,
        });
    }
    let target = ((p * pairs as f64) - 1e-9).ceil().max(1.0) as usize;
    let mut dists: Vec<f64> = Vec::with_capacity(pairs);
    for u in 0..n {
        for v in u + 1..n {
            dists.push(dist(positions[u], positions[v]));
        }
    }
    let mut sorted = dists.clone();
    sorted.sort_by(f64::total_cmp);
    let radius = sorted[target.min(pairs) - 1];
    let mut edges = Vec::new();
    let mut k = 0;
    for u in 0..n {
        for v in u + 1..n {
            if dists[k] <= radius {
                edges.push((u, v));
            }
            k += 1;
        }
    }
    Ok(UnitDiskGraph {
        graph: Graph::from_sorted_edges(n, edges),
        positions,
        radius,
    })
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

/// Small named instances used throughout tests, docs and benches.
pub mod fixtures {
    use super::Graph;

    /// Five vertices, edges {1,3}, {1,5}, {3,4} (1-based); vertex 2 is
    /// isolated. Its ten non-singleton independent sets are
    /// [1,2] [1,4] [2,3] [2,4] [2,5] [3,5] [4,5] [1,2,4] [2,3,5] [2,4,5].
    pub fn worked_example() -> Graph {
        Graph::new(5, [(0, 2), (0, 4), (2, 3)]).unwrap()
    }

    /// Five vertices, six edges, chromatic number 3: a 5-cycle plus one chord.
    pub fn five_six_chi3() -> Graph {
        Graph::new(5, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 0), (0, 2)]).unwrap()
    }

    /// Star K_{1,k} with the hub at vertex 0.
    pub fn star(k: usize) -> Graph {
        Graph::new(k + 1, (1..=k).map(|v| (0, v))).unwrap()
    }

    pub fn path(n: usize) -> Graph {
        Graph::new(n, (1..n).map(|v| (v - 1, v))).unwrap()
    }
}
