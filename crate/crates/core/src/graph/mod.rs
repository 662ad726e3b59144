//! Weighted digraphs, their CSR view, generators, and the genome-graph model.

mod generate;
mod genome;
pub mod io;

pub use generate::{gen_clustered, gen_er, gen_nws, ClusteredParams, DEFAULT_W_MAX};
pub use genome::{
    gen_genome, gen_reads, topo_sort, Base, GenomeGraph, LengthClass, Read, ReadBatch,
    DEFAULT_SHORT_THRESHOLD,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::weight::Weight;
#[cfg(test)]
use crate::weight::MAX_EDGE_WEIGHT;

/// One weighted arc.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Edge<W = u32> {
    pub src: u32,
    pub dst: u32,
    pub w: W,
}

impl Edge<u32> {
    pub const fn new(src: u32, dst: u32, w: u32) -> Self {
        Edge { src, dst, w }
    }
}

impl<W: Weight> Edge<W> {
    pub fn weighted(src: u32, dst: u32, w: W) -> Self {
        Edge { src, dst, w }
    }
}

/// Directed graph with non-negative weights (32-bit unsigned by default).
///
/// Arcs are always stored explicitly. `directed == false` records that the
/// arc set is symmetric (each undirected edge was expanded to two arcs).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightedGraph<W = u32> {
    n: usize,
    edges: Vec<Edge<W>>,
    directed: bool,
}

impl WeightedGraph<u32> {
    pub fn new(n: usize, edges: Vec<Edge>, directed: bool) -> Result<Self> {
        Self::with_edges(n, edges, directed)
    }

    /// Builds a symmetric graph from undirected edges, emitting both arcs.
    pub fn from_undirected(n: usize, edges: impl IntoIterator<Item = Edge>) -> Result<Self> {
        let mut arcs = Vec::new();
        for e in edges {
            arcs.push(e);
            if e.src != e.dst {
                arcs.push(Edge::new(e.dst, e.src, e.w));
            }
        }
        Self::new(n, arcs, false)
    }

    pub fn empty(n: usize) -> Self {
        WeightedGraph { n, edges: Vec::new(), directed: true }
    }
}

impl<W: Weight> WeightedGraph<W> {
    /// Validating constructor: ids in range, weights in `[0, W::MAX_EDGE]`,
    /// self-loops only with weight 0.
    pub fn with_edges(n: usize, edges: Vec<Edge<W>>, directed: bool) -> Result<Self> {
        if n > u32::MAX as usize {
            return Err(Error::InvalidGraph(format!("{n} vertices exceed the 32-bit id space")));
        }
        for e in &edges {
            if e.src as usize >= n || e.dst as usize >= n {
                return Err(Error::InvalidGraph(format!(
                    "edge ({}, {}) references a vertex >= n = {n}",
                    e.src, e.dst
                )));
            }
            #[allow(clippy::neg_cmp_op_on_partial_ord)]
            if !(e.w >= W::zero()) || e.w > W::MAX_EDGE {
                return Err(Error::InvalidGraph(format!(
                    "edge ({}, {}) weight {:?} outside [0, {:?}]",
                    e.src, e.dst, e.w, W::MAX_EDGE
                )));
            }
            if e.src == e.dst && e.w > W::zero() {
                return Err(Error::InvalidGraph(format!(
                    "self-loop on {} with positive weight {:?}",
                    e.src, e.w
                )));
            }
        }
        Ok(WeightedGraph { n, edges, directed })
    }

    /// Derived graphs (boundary graphs) carry path lengths that may exceed
    /// `MAX_EDGE`; callers guarantee ids are in range and weights below `INF`.
    pub(crate) fn from_parts(n: usize, edges: Vec<Edge<W>>, directed: bool) -> Self {
        debug_assert!(edges.iter().all(|e| (e.src as usize) < n && (e.dst as usize) < n && !e.w.is_inf()));
        WeightedGraph { n, edges, directed }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge<W>] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn cast<V: Weight>(&self) -> WeightedGraph<V> {
        WeightedGraph {
            n: self.n,
            edges: self.edges.iter().map(|e| Edge { src: e.src, dst: e.dst, w: e.w.cast() }).collect(),
            directed: self.directed,
        }
    }

    /// Row-major dense adjacency; diagonal 0, missing arcs `INF`.
    /// Parallel arcs keep the minimum weight.
    pub fn dense_adjacency(&self) -> Vec<W> {
        let n = self.n;
        let mut d = vec![W::INF; n * n];
        for i in 0..n {
            d[i * n + i] = W::zero();
        }
        for e in &self.edges {
            let slot = &mut d[e.src as usize * n + e.dst as usize];
            if e.w < *slot {
                *slot = e.w;
            }
        }
        d
    }

    /// Undirected neighbour lists (union of in- and out-arcs, no self-loops, deduplicated).
    pub fn undirected_neighbors(&self) -> Vec<Vec<u32>> {
        let mut adj = vec![Vec::new(); self.n];
        for e in &self.edges {
            if e.src != e.dst {
                adj[e.src as usize].push(e.dst);
                adj[e.dst as usize].push(e.src);
            }
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        adj
    }

    /// Subgraph induced by `vertices`; vertex `i` of the result is `vertices[i]`.
    pub fn induced(&self, vertices: &[u32]) -> WeightedGraph<W> {
        let mut local = vec![u32::MAX; self.n];
        for (i, &v) in vertices.iter().enumerate() {
            local[v as usize] = i as u32;
        }
        let edges = self
            .edges
            .iter()
            .filter_map(|e| {
                let (a, b) = (local[e.src as usize], local[e.dst as usize]);
                (a != u32::MAX && b != u32::MAX).then_some(Edge { src: a, dst: b, w: e.w })
            })
            .collect();
        WeightedGraph { n: vertices.len(), edges, directed: self.directed }
    }
}

/// Compressed sparse row view of a [`WeightedGraph`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CsrGraph<W = u32> {
    pub rowptr: Vec<usize>,
    pub col: Vec<u32>,
    pub val: Vec<W>,
}

impl<W: Weight> CsrGraph<W> {
    pub fn n(&self) -> usize {
        self.rowptr.len() - 1
    }

    pub fn row(&self, v: usize) -> impl Iterator<Item = (u32, W)> + '_ {
        let (a, b) = (self.rowptr[v], self.rowptr[v + 1]);
        self.col[a..b].iter().copied().zip(self.val[a..b].iter().copied())
    }

    /// Dense expansion; missing arcs read as `INF`, diagonal 0 unless stored.
    pub fn to_dense(&self) -> Vec<W> {
        let n = self.n();
        let mut d = vec![W::INF; n * n];
        for i in 0..n {
            d[i * n + i] = W::zero();
        }
        for i in 0..n {
            for (j, w) in self.row(i) {
                d[i * n + j as usize] = w;
            }
        }
        d
    }
}

/// Canonical CSR (columns strictly increasing per row). Rejects duplicate arcs.
pub fn build_csr<W: Weight>(g: &WeightedGraph<W>) -> Result<CsrGraph<W>> {
    let n = g.n();
    let mut rowptr = vec![0usize; n + 1];
    for e in g.edges() {
        rowptr[e.src as usize + 1] += 1;
    }
    for i in 0..n {
        rowptr[i + 1] += rowptr[i];
    }
    let mut rows: Vec<Vec<(u32, W)>> = (0..n).map(|i| Vec::with_capacity(rowptr[i + 1] - rowptr[i])).collect();
    for e in g.edges() {
        rows[e.src as usize].push((e.dst, e.w));
    }
    let mut col = Vec::with_capacity(g.edge_count());
    let mut val = Vec::with_capacity(g.edge_count());
    for (i, mut row) in rows.into_iter().enumerate() {
        row.sort_unstable_by_key(|&(c, _)| c);
        for pair in row.windows(2) {
            if pair[0].0 == pair[1].0 {
                return Err(Error::DuplicateEdge { src: i as u32, dst: pair[0].0 });
            }
        }
        for (c, w) in row {
            col.push(c);
            val.push(w);
        }
    }
    Ok(CsrGraph { rowptr, col, val })
}
