use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::weight::Weight;

/// Dense square min-plus matrix. Row/column `i` stands for vertex `ids[i]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistanceBlock<W = u32> {
    dim: usize,
    data: Vec<W>,
    ids: Vec<u32>,
}

impl<W: Weight> DistanceBlock<W> {
    /// Wraps row-major `data`; only the shape is checked here.
    pub fn new(ids: Vec<u32>, data: Vec<W>) -> Result<Self> {
        let dim = ids.len();
        if data.len() != dim * dim {
            return Err(Error::Index(format!(
                "block data has {} entries, expected {dim}x{dim}",
                data.len()
            )));
        }
        Ok(DistanceBlock { dim, data, ids })
    }

    /// Zero diagonal, everything else unreachable.
    pub fn unreachable(ids: Vec<u32>) -> Self {
        let dim = ids.len();
        let mut data = vec![W::INF; dim * dim];
        for i in 0..dim {
            data[i * dim + i] = W::zero();
        }
        DistanceBlock { dim, data, ids }
    }

    /// Adjacency block of the whole graph, ids `0..n`.
    pub fn from_graph(g: &WeightedGraph<W>) -> Self {
        DistanceBlock { dim: g.n(), data: g.dense_adjacency(), ids: (0..g.n() as u32).collect() }
    }

    /// Adjacency block of the subgraph induced by `vertices` (ids in `g`'s space).
    pub fn induced(g: &WeightedGraph<W>, vertices: &[u32]) -> Self {
        let sub = g.induced(vertices);
        DistanceBlock { dim: vertices.len(), data: sub.dense_adjacency(), ids: vertices.to_vec() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ids(&self) -> &[u32] {
        &self.ids
    }

    pub fn data(&self) -> &[W] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [W] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<W> {
        self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> W {
        self.data[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, w: W) {
        self.data[i * self.dim + j] = w;
    }

    pub fn row(&self, i: usize) -> &[W] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    /// Global id to row index.
    pub fn index_map(&self) -> HashMap<u32, usize> {
        self.ids.iter().enumerate().map(|(i, &v)| (v, i)).collect()
    }

    /// Checks the value invariants: zero diagonal, entries in `[0, INF]`.
    pub fn validate(&self) -> Result<()> {
        for i in 0..self.dim {
            for j in 0..self.dim {
                let w = self.get(i, j);
                #[allow(clippy::neg_cmp_op_on_partial_ord)]
                if !(w >= W::zero()) || w > W::INF {
                    return Err(Error::Domain(format!("entry ({i}, {j}) = {w:?} is negative or not a number")));
                }
                if i == j && w != W::zero() {
                    return Err(Error::Domain(format!("diagonal entry {i} is {w:?}, expected 0")));
                }
            }
        }
        Ok(())
    }

    /// Triangle inequality under saturating add, `O(dim^3)`.
    pub fn is_closed(&self) -> bool {
        let n = self.dim;
        for k in 0..n {
            for i in 0..n {
                let ik = self.get(i, k);
                for j in 0..n {
                    if ik.sat_add(self.get(k, j)) < self.get(i, j) {
                        return false;
                    }
                }
            }
        }
        true
    }
}
