use serde::{Deserialize, Serialize};

use super::{BoundarySet, Partition};
use crate::apsp::DistanceBlock;
use crate::error::{Error, Result};
use crate::graph::{Edge, WeightedGraph};
use crate::weight::Weight;

/// Reduced graph over the boundary vertices. Vertex `i` stands for
/// `vertices[i]` of the parent graph; `vertices` is sorted.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryGraph<W = u32> {
    pub graph: WeightedGraph<W>,
    pub vertices: Vec<u32>,
}

impl<W: Weight> BoundaryGraph<W> {
    /// Parent id to boundary-graph id, `None` for interior vertices.
    pub fn local_of(&self, v: u32) -> Option<u32> {
        self.vertices.binary_search(&v).ok().map(|i| i as u32)
    }
}

/// Keeps the lightest arc per ordered pair and drops self-loops.
pub(crate) fn dedup_min<W: Weight>(mut arcs: Vec<Edge<W>>) -> Vec<Edge<W>> {
    arcs.retain(|e| e.src != e.dst);
    arcs.sort_unstable_by(|a, b| {
        (a.src, a.dst).cmp(&(b.src, b.dst)).then(a.w.partial_cmp(&b.w).unwrap_or(std::cmp::Ordering::Equal))
    });
    arcs.dedup_by(|later, kept| later.src == kept.src && later.dst == kept.dst);
    arcs
}

/// Cross-component arcs of `g` plus one virtual arc per ordered pair of
/// same-component boundary vertices, weighted by the closed intra block.
/// `intra[c]` must cover component `c` (ids in `g`'s space).
pub fn build_boundary_graph<W: Weight>(
    g: &WeightedGraph<W>,
    p: &Partition,
    boundaries: &BoundarySet,
    intra: &[DistanceBlock<W>],
) -> Result<BoundaryGraph<W>> {
    if intra.len() < p.k() {
        return Err(Error::Consistency(format!("{} intra blocks for {} components", intra.len(), p.k())));
    }
    let vertices = boundaries.union();
    let mut local = vec![u32::MAX; g.n()];
    for (i, &v) in vertices.iter().enumerate() {
        local[v as usize] = i as u32;
    }
    let mut arcs = Vec::new();
    for e in g.edges() {
        if p.component_of(e.src) != p.component_of(e.dst) {
            arcs.push(Edge { src: local[e.src as usize], dst: local[e.dst as usize], w: e.w });
        }
    }
    for (c, bset) in boundaries.sets().iter().enumerate() {
        if bset.is_empty() {
            continue;
        }
        let block = &intra[c];
        let map = block.index_map();
        let idx: Vec<usize> = bset
            .iter()
            .map(|v| {
                map.get(v)
                    .copied()
                    .ok_or_else(|| Error::Consistency(format!("intra block {c} lacks boundary vertex {v}")))
            })
            .collect::<Result<_>>()?;
        for (a, &ia) in idx.iter().enumerate() {
            for (b, &ib) in idx.iter().enumerate() {
                let w = block.get(ia, ib);
                if a != b && !w.is_inf() {
                    arcs.push(Edge { src: local[bset[a] as usize], dst: local[bset[b] as usize], w });
                }
            }
        }
    }
    let graph = WeightedGraph::from_parts(vertices.len(), dedup_min(arcs), g.is_directed());
    Ok(BoundaryGraph { graph, vertices })
}
