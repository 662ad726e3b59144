use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::boundary::{build_boundary_graph, dedup_min};
use super::{find_boundary, BoundarySet, GreedyPartitioner, Partition, Partitioner};
use crate::apsp::{floyd_warshall_in_place, ClosureTrace, DistanceBlock};
use crate::error::{Error, Result};
use crate::graph::{Edge, WeightedGraph};
use crate::weight::Weight;

/// How many components to ask for at a level of `n` vertices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BranchingRule {
    /// `factor * ceil(n / max_tile)`.
    TilesTimes(usize),
    /// A fixed count, raised to `ceil(n / max_tile)` when too small.
    Fixed(usize),
}

impl Default for BranchingRule {
    fn default() -> Self {
        BranchingRule::TilesTimes(2)
    }
}

impl BranchingRule {
    pub fn k(&self, n: usize, max_tile: usize) -> usize {
        let min_k = n.div_ceil(max_tile);
        let k = match *self {
            BranchingRule::TilesTimes(f) => f.max(1) * min_k,
            BranchingRule::Fixed(k) => k,
        };
        k.max(min_k).min(n).max(1)
    }
}

/// Whether virtual arcs carry exact intra distances or only reachability.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum HierarchyMode {
    /// Close every component with FW; virtual arcs carry distances.
    #[default]
    Exact,
    /// Reachability only (unit weights); used for sizing studies on large graphs.
    Structure,
}

/// What to do when a level cannot be cut into a smaller boundary graph.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum OversizePolicy {
    /// Fail with a recursion error.
    #[default]
    Error,
    /// Stop and mark the level as an oversize top, closed by tiled FW.
    BlockedTop,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HierarchyOptions {
    pub max_tile: usize,
    pub branching: BranchingRule,
    pub seed: u64,
    pub mode: HierarchyMode,
    pub oversize: OversizePolicy,
    /// A level is accepted only if `|boundary| <= min_shrink * |V|` (and strictly smaller).
    pub min_shrink: f64,
    pub max_levels: usize,
}

impl HierarchyOptions {
    pub fn new(max_tile: usize) -> Self {
        HierarchyOptions {
            max_tile,
            branching: BranchingRule::default(),
            seed: 0,
            mode: HierarchyMode::Exact,
            oversize: OversizePolicy::Error,
            min_shrink: 1.0,
            max_levels: 64,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LevelKind {
    /// Cut into components; the boundary graph is the next level.
    Partitioned,
    /// Fits one tile; a single component, no boundary.
    Top,
    /// Too large for one tile but could not be cut; a single component.
    Oversize,
}

/// One level. Ids are level-local (`0..graph.n()`); `to_base` maps them to
/// the input graph.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HierarchyLevel<W = u32> {
    pub kind: LevelKind,
    pub graph: WeightedGraph<W>,
    pub to_base: Vec<u32>,
    pub partition: Partition,
    /// Sorted member lists.
    pub components: Vec<Vec<u32>>,
    pub boundaries: BoundarySet,
    /// Position of each vertex inside its component list.
    pub slot: Vec<u32>,
    /// Next-level id of each boundary vertex, `u32::MAX` for interior ones.
    pub up: Vec<u32>,
    /// Next-level id to this level's id (the sorted boundary union).
    pub down: Vec<u32>,
}

impl<W: Weight> HierarchyLevel<W> {
    fn new(kind: LevelKind, graph: WeightedGraph<W>, to_base: Vec<u32>, partition: Partition, boundaries: BoundarySet) -> Self {
        let n = graph.n();
        let components = partition.components();
        let mut slot = vec![0u32; n];
        for comp in &components {
            for (i, &v) in comp.iter().enumerate() {
                slot[v as usize] = i as u32;
            }
        }
        let down = boundaries.union();
        let mut up = vec![u32::MAX; n];
        for (i, &v) in down.iter().enumerate() {
            up[v as usize] = i as u32;
        }
        HierarchyLevel { kind, graph, to_base, partition, components, boundaries, slot, up, down }
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    pub fn component_of(&self, v: u32) -> usize {
        self.partition.component_of(v) as usize
    }

    pub fn max_component(&self) -> usize {
        self.components.iter().map(Vec::len).max().unwrap_or(0)
    }
}

/// Levels ordered base (0) to top.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionHierarchy<W = u32> {
    pub max_tile: usize,
    pub levels: Vec<HierarchyLevel<W>>,
}

impl<W: Weight> PartitionHierarchy<W> {
    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn top(&self) -> &HierarchyLevel<W> {
        self.levels.last().expect("hierarchy has at least one level")
    }

    /// Boundary graph of level `l` (the graph of level `l + 1`), if `l` is partitioned.
    pub fn boundary_graph(&self, l: usize) -> Option<&WeightedGraph<W>> {
        (self.levels[l].kind == LevelKind::Partitioned).then(|| &self.levels[l + 1].graph)
    }

    pub fn is_oversize(&self) -> bool {
        self.top().kind == LevelKind::Oversize
    }
}

/// Arcs of `g` with both ends in the same component, bucketed per component
/// and renumbered to component-local ids.
fn intra_arcs<W: Weight>(g: &WeightedGraph<W>, p: &Partition, slot: &[u32]) -> Vec<Vec<Edge<W>>> {
    let mut out = vec![Vec::new(); p.k()];
    for e in g.edges() {
        let c = p.component_of(e.src);
        if c == p.component_of(e.dst) {
            out[c as usize].push(Edge { src: slot[e.src as usize], dst: slot[e.dst as usize], w: e.w });
        }
    }
    out
}

fn close_components<W: Weight>(
    level: &HierarchyLevel<W>,
) -> Result<(Vec<DistanceBlock<W>>, Vec<ClosureTrace>)> {
    let arcs = intra_arcs(&level.graph, &level.partition, &level.slot);
    let results: Vec<Result<(DistanceBlock<W>, ClosureTrace)>> = level
        .components
        .par_iter()
        .zip(arcs.par_iter())
        .map(|(comp, arcs)| {
            let mut block = DistanceBlock::unreachable(comp.clone());
            for e in arcs {
                let (i, j) = (e.src as usize, e.dst as usize);
                if e.w < block.get(i, j) {
                    block.set(i, j, e.w);
                }
            }
            let t = floyd_warshall_in_place(&mut block)?;
            Ok((block, t))
        })
        .collect();
    let mut blocks = Vec::with_capacity(results.len());
    let mut traces = Vec::with_capacity(results.len());
    for r in results {
        let (b, t) = r?;
        blocks.push(b);
        traces.push(t);
    }
    Ok((blocks, traces))
}

/// Unit-weight boundary graph where a virtual arc means "reachable inside the component".
fn structural_boundary_graph<W: Weight>(level: &HierarchyLevel<W>) -> WeightedGraph<W> {
    let g = &level.graph;
    let one = W::from_edge(1);
    let mut arcs: Vec<Edge<W>> = Vec::new();
    for e in g.edges() {
        if level.component_of(e.src) != level.component_of(e.dst) {
            arcs.push(Edge { src: level.up[e.src as usize], dst: level.up[e.dst as usize], w: one });
        }
    }
    let intra = intra_arcs(g, &level.partition, &level.slot);
    for (c, comp) in level.components.iter().enumerate() {
        let bset = level.boundaries.of(c);
        if bset.is_empty() {
            continue;
        }
        let m = comp.len();
        let mut out_adj = vec![Vec::new(); m];
        for e in &intra[c] {
            out_adj[e.src as usize].push(e.dst);
        }
        let mut seen = vec![u32::MAX; m];
        let mut stack = Vec::new();
        for (a, &src) in bset.iter().enumerate() {
            let start = level.slot[src as usize];
            seen[start as usize] = a as u32;
            stack.push(start);
            while let Some(x) = stack.pop() {
                for &y in &out_adj[x as usize] {
                    if seen[y as usize] != a as u32 {
                        seen[y as usize] = a as u32;
                        stack.push(y);
                    }
                }
            }
            for &dst in bset {
                if dst != src && seen[level.slot[dst as usize] as usize] == a as u32 {
                    arcs.push(Edge { src: level.up[src as usize], dst: level.up[dst as usize], w: one });
                }
            }
        }
    }
    WeightedGraph::from_parts(level.down.len(), dedup_min(arcs), g.is_directed())
}

pub(crate) struct BuiltHierarchy<W> {
    pub hierarchy: PartitionHierarchy<W>,
    /// Intra-closed component blocks of every partitioned level (empty in structure mode).
    pub blocks: Vec<Vec<DistanceBlock<W>>>,
    pub closures: Vec<Vec<ClosureTrace>>,
}

pub(crate) fn build_hierarchy_with_blocks<W: Weight>(
    g: &WeightedGraph<W>,
    opts: &HierarchyOptions,
    partitioner: &dyn Partitioner,
) -> Result<BuiltHierarchy<W>> {
    if opts.max_tile < 2 {
        return Err(Error::Argument(format!("max_tile = {} must be at least 2", opts.max_tile)));
    }
    let mut levels = Vec::new();
    let mut blocks = Vec::new();
    let mut closures = Vec::new();
    let mut graph = g.clone();
    let mut to_base: Vec<u32> = (0..g.n() as u32).collect();
    loop {
        let n = graph.n();
        if n <= opts.max_tile {
            let b = BoundarySet::from_sets(vec![Vec::new()]);
            levels.push(HierarchyLevel::new(LevelKind::Top, graph, to_base, Partition::single(n), b));
            break;
        }
        let depth = levels.len();
        let adj = graph.undirected_neighbors();
        let k0 = opts.branching.k(n, opts.max_tile);
        let mut candidates = vec![k0];
        let halved = (k0 / 2).max(n.div_ceil(opts.max_tile));
        if halved < k0 {
            candidates.push(halved);
        }
        let mut accepted = None;
        if depth + 1 < opts.max_levels {
            let level_seed = opts.seed ^ (depth as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15);
            for &k in &candidates {
                let p = partitioner.partition(&adj, k, opts.max_tile, level_seed)?;
                let b = find_boundary(&graph, &p)?;
                let total = b.total();
                if total < n && (total as f64) <= opts.min_shrink * n as f64 {
                    accepted = Some((p, b));
                    break;
                }
            }
        }
        let Some((p, b)) = accepted else {
            match opts.oversize {
                OversizePolicy::Error => {
                    return Err(Error::Recursion(format!(
                        "level {depth} with {n} vertices does not shrink under max_tile {} (tried k = {candidates:?})",
                        opts.max_tile
                    )))
                }
                OversizePolicy::BlockedTop => {
                    let bs = BoundarySet::from_sets(vec![Vec::new()]);
                    levels.push(HierarchyLevel::new(LevelKind::Oversize, graph, to_base, Partition::single(n), bs));
                    break;
                }
            }
        };
        let level = HierarchyLevel::new(LevelKind::Partitioned, graph, to_base, p, b);
        let next = match opts.mode {
            HierarchyMode::Exact => {
                let (bl, tr) = close_components(&level)?;
                let bg = build_boundary_graph(&level.graph, &level.partition, &level.boundaries, &bl)?;
                blocks.push(bl);
                closures.push(tr);
                bg.graph
            }
            HierarchyMode::Structure => structural_boundary_graph(&level),
        };
        to_base = level.down.iter().map(|&v| level.to_base[v as usize]).collect();
        graph = next;
        levels.push(level);
    }
    Ok(BuiltHierarchy { hierarchy: PartitionHierarchy { max_tile: opts.max_tile, levels }, blocks, closures })
}

/// Builds the hierarchy with an explicit strategy.
pub fn build_hierarchy_with<W: Weight>(
    g: &WeightedGraph<W>,
    opts: &HierarchyOptions,
    partitioner: &dyn Partitioner,
) -> Result<PartitionHierarchy<W>> {
    Ok(build_hierarchy_with_blocks(g, opts, partitioner)?.hierarchy)
}

/// Builds the exact hierarchy with the default strategy; a level that cannot
/// shrink (even after halving k) is a recursion error.
pub fn build_hierarchy<W: Weight>(
    g: &WeightedGraph<W>,
    max_tile: usize,
    k_fn: BranchingRule,
    seed: u64,
) -> Result<PartitionHierarchy<W>> {
    let opts = HierarchyOptions { branching: k_fn, seed, ..HierarchyOptions::new(max_tile) };
    build_hierarchy_with(g, &opts, &GreedyPartitioner::default())
}
