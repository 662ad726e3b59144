use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::block::DistanceBlock;
use super::fw::{blocked_floyd_warshall, floyd_warshall_in_place, BlockedTrace, ClosureTrace};
use super::ops::{inject_in_place, min_plus_merge, MergeShape};
use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::partition::{
    build_hierarchy_with_blocks, GreedyPartitioner, HierarchyLevel, HierarchyOptions, LevelKind, OversizePolicy,
    PartitionHierarchy, Partitioner,
};
use crate::weight::Weight;

pub const DEFAULT_DENSE_LIMIT: usize = 4096;

/// Levels whose boundary keeps more than this fraction of the vertices are
/// closed directly instead of recursing further.
pub const DEFAULT_MIN_SHRINK: f64 = 0.9;

/// Largest oversize top level the driver will materialise.
pub const MAX_OVERSIZE_DIM: usize = 16_384;

/// Whether the base level is materialised as one dense matrix.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum OutputMode {
    /// Dense when `n <= dense_limit`.
    #[default]
    Auto,
    Dense,
    Lazy,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApspOptions {
    pub hierarchy: HierarchyOptions,
    pub dense_limit: usize,
    pub output: OutputMode,
}

impl ApspOptions {
    /// Defaults: oversize levels fall back to a tiled closure instead of failing.
    pub fn new(max_tile: usize) -> Self {
        let mut hierarchy = HierarchyOptions::new(max_tile);
        hierarchy.oversize = OversizePolicy::BlockedTop;
        hierarchy.min_shrink = DEFAULT_MIN_SHRINK;
        ApspOptions { hierarchy, dense_limit: DEFAULT_DENSE_LIMIT, output: OutputMode::Auto }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.hierarchy.seed = seed;
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TopTrace {
    Dense(ClosureTrace),
    Blocked(BlockedTrace),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InjectTrace {
    pub component: usize,
    pub boundary: usize,
    pub improved: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MergeTrace {
    pub from: usize,
    pub to: usize,
    pub shape: MergeShape,
}

/// Work done at one level, in execution order: initial closures (upward),
/// then top closure, or injections, re-closures and merges (downward).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelTrace {
    pub level: usize,
    pub n: usize,
    pub kind: LevelKind,
    pub closures: Vec<ClosureTrace>,
    pub top: Option<TopTrace>,
    pub injects: Vec<InjectTrace>,
    /// `None` where the injection improved nothing and the re-closure was skipped.
    pub recloses: Vec<Option<ClosureTrace>>,
    pub merges: Vec<MergeTrace>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExecutionTrace {
    pub max_tile: usize,
    pub dense_output: bool,
    pub levels: Vec<LevelTrace>,
}

impl ExecutionTrace {
    /// Total FW closures of any kind (initial, top, re-close).
    pub fn closure_count(&self) -> usize {
        self.levels
            .iter()
            .map(|l| l.closures.len() + l.top.is_some() as usize + l.recloses.iter().flatten().count())
            .sum()
    }

    pub fn merge_count(&self) -> usize {
        self.levels.iter().map(|l| l.merges.len()).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum ApspMode<W = u32> {
    FullDense(DistanceBlock<W>),
    Lazy,
}

/// Output of [`recursive_apsp`]. Block and matrix ids are level-local.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApspResult<W = u32> {
    pub hierarchy: PartitionHierarchy<W>,
    /// Per partitioned level, per component: globally exact distances between members.
    pub blocks: Vec<Vec<DistanceBlock<W>>>,
    /// Per level: exact matrix over all level vertices, when small enough.
    /// Entry 0 is always `None` (the base level lives in `mode`); the top is always present.
    pub level_dense: Vec<Option<DistanceBlock<W>>>,
    pub mode: ApspMode<W>,
    pub trace: ExecutionTrace,
}

impl<W: Weight> ApspResult<W> {
    pub fn n(&self) -> usize {
        self.hierarchy.levels[0].n()
    }

    pub fn dense(&self) -> Option<&DistanceBlock<W>> {
        match &self.mode {
            ApspMode::FullDense(d) => Some(d),
            ApspMode::Lazy => None,
        }
    }

    /// Dense lookup when available, otherwise [`query_distance`].
    pub fn distance(&self, u: u32, v: u32) -> Result<W> {
        match &self.mode {
            ApspMode::FullDense(d) => {
                check_vertex(self.n(), u)?;
                check_vertex(self.n(), v)?;
                Ok(d.get(u as usize, v as usize))
            }
            ApspMode::Lazy => query_distance(self, u, v),
        }
    }
}

fn check_vertex(n: usize, v: u32) -> Result<()> {
    if (v as usize) < n {
        Ok(())
    } else {
        Err(Error::Index(format!("vertex {v} out of range for n = {n}")))
    }
}

/// Distance from `u` to `v` computed from the per-level blocks: same-component
/// pairs are a block lookup, cross pairs minimise over boundary gateways.
pub fn query_distance<W: Weight>(r: &ApspResult<W>, u: u32, v: u32) -> Result<W> {
    check_vertex(r.n(), u)?;
    check_vertex(r.n(), v)?;
    if r.hierarchy.depth() == 1 {
        let d = r.dense().ok_or_else(|| Error::State("single-level result without a matrix".into()))?;
        return Ok(d.get(u as usize, v as usize));
    }
    Ok(query_upper(&r.hierarchy, &r.blocks, &r.level_dense, 0, u, v))
}

fn close_top<W: Weight>(level: &HierarchyLevel<W>, max_tile: usize) -> Result<(DistanceBlock<W>, TopTrace)> {
    let n = level.n();
    if level.kind == LevelKind::Oversize && n > MAX_OVERSIZE_DIM {
        return Err(Error::Capacity(format!("oversize level with {n} vertices exceeds {MAX_OVERSIZE_DIM}")));
    }
    let mut m = DistanceBlock::from_graph(&level.graph);
    let t = if level.kind == LevelKind::Oversize {
        TopTrace::Blocked(blocked_floyd_warshall(&mut m, max_tile)?)
    } else {
        TopTrace::Dense(floyd_warshall_in_place(&mut m)?)
    };
    Ok((m, t))
}

/// Full matrix of a partitioned level from its exact component blocks and the
/// level above; cross pairs go through the two-stage merge.
fn assemble_level<W: Weight>(
    level: &HierarchyLevel<W>,
    blocks: &[DistanceBlock<W>],
    upper: &DistanceBlock<W>,
) -> Result<(DistanceBlock<W>, Vec<MergeTrace>)> {
    let n = level.n();
    let mut out = DistanceBlock::new((0..n as u32).collect(), vec![W::INF; n * n])?;
    for (c, comp) in level.components.iter().enumerate() {
        for (a, &u) in comp.iter().enumerate() {
            for (b, &v) in comp.iter().enumerate() {
                out.set(u as usize, v as usize, blocks[c].get(a, b));
            }
        }
    }
    let k = level.components.len();
    let pairs: Vec<(usize, usize)> = (0..k)
        .flat_map(|a| (0..k).map(move |b| (a, b)))
        .filter(|&(a, b)| a != b && !level.boundaries.of(a).is_empty() && !level.boundaries.of(b).is_empty())
        .collect();
    let up_ids = |c: usize| -> Vec<u32> { level.boundaries.of(c).iter().map(|&v| level.up[v as usize]).collect() };
    let merged: Vec<Result<(usize, usize, Vec<W>, MergeShape)>> = pairs
        .par_iter()
        .map(|&(a, b)| {
            // Merge in next-level id space: relabel component blocks' boundary columns.
            let (ua, ub) = (up_ids(a), up_ids(b));
            let d1 = relabel(&blocks[a], level);
            let d2 = relabel(&blocks[b], level);
            let (x, shape) = min_plus_merge(&d1, upper, &d2, &ua, &ub)?;
            Ok((a, b, x.data, shape))
        })
        .collect();
    let mut traces = Vec::with_capacity(pairs.len());
    for r in merged {
        let (a, b, data, shape) = r?;
        let (ca, cb) = (&level.components[a], &level.components[b]);
        for (i, &u) in ca.iter().enumerate() {
            for (j, &v) in cb.iter().enumerate() {
                out.set(u as usize, v as usize, data[i * cb.len() + j]);
            }
        }
        traces.push(MergeTrace { from: a, to: b, shape });
    }
    Ok((out, traces))
}

/// Copy of a component block whose ids are next-level ids for boundary
/// members and unique placeholders (above every next-level id) for the rest.
fn relabel<W: Weight>(block: &DistanceBlock<W>, level: &HierarchyLevel<W>) -> DistanceBlock<W> {
    let base = level.down.len() as u32;
    let ids = block
        .ids()
        .iter()
        .map(|&v| if level.up[v as usize] != u32::MAX { level.up[v as usize] } else { base + v })
        .collect();
    DistanceBlock::new(ids, block.data().to_vec()).expect("same shape")
}

/// Exact all-pairs shortest paths by recursive partitioning with the default strategy.
pub fn recursive_apsp<W: Weight>(g: &WeightedGraph<W>, max_tile: usize, opts: &ApspOptions) -> Result<ApspResult<W>> {
    let mut opts = opts.clone();
    opts.hierarchy.max_tile = max_tile;
    recursive_apsp_with(g, &opts, &GreedyPartitioner::default())
}

/// [`recursive_apsp`] with an explicit partitioning strategy.
pub fn recursive_apsp_with<W: Weight>(
    g: &WeightedGraph<W>,
    opts: &ApspOptions,
    partitioner: &dyn Partitioner,
) -> Result<ApspResult<W>> {
    let built = build_hierarchy_with_blocks(g, &opts.hierarchy, partitioner)?;
    let hierarchy = built.hierarchy;
    let mut blocks = built.blocks;
    let depth = hierarchy.depth();
    let max_tile = hierarchy.max_tile;
    let dense_output = match opts.output {
        OutputMode::Auto => g.n() <= opts.dense_limit,
        OutputMode::Dense => true,
        OutputMode::Lazy => false,
    };
    let mut levels: Vec<LevelTrace> = hierarchy
        .levels
        .iter()
        .enumerate()
        .map(|(l, lv)| LevelTrace {
            level: l,
            n: lv.n(),
            kind: lv.kind,
            closures: built.closures.get(l).cloned().unwrap_or_default(),
            top: None,
            injects: Vec::new(),
            recloses: Vec::new(),
            merges: Vec::new(),
        })
        .collect();

    let (top_matrix, top_trace) = close_top(hierarchy.top(), max_tile)?;
    levels[depth - 1].top = Some(top_trace);
    let mut level_dense: Vec<Option<DistanceBlock<W>>> = vec![None; depth];
    let mut base_dense = None;
    if depth == 1 {
        base_dense = Some(top_matrix);
    } else {
        level_dense[depth - 1] = Some(top_matrix);
    }

    for l in (0..depth - 1).rev() {
        let level = &hierarchy.levels[l];
        let upper_dense = level_dense[l + 1].as_ref();
        let comp_blocks = std::mem::take(&mut blocks[l]);
        let results: Vec<Result<(DistanceBlock<W>, InjectTrace, Option<ClosureTrace>)>> = comp_blocks
            .into_par_iter()
            .enumerate()
            .map(|(c, mut block)| {
                let bset = level.boundaries.of(c);
                let upper_ids: Vec<u32> = bset.iter().map(|&v| level.up[v as usize]).collect();
                let db = match upper_dense {
                    Some(m) => super::ops::restrict(m, &upper_ids)?,
                    None => {
                        let mut data = Vec::with_capacity(upper_ids.len() * upper_ids.len());
                        for &a in &upper_ids {
                            for &b in &upper_ids {
                                data.push(query_upper(&hierarchy, &blocks, &level_dense, l + 1, a, b));
                            }
                        }
                        DistanceBlock::new(upper_ids.clone(), data)?
                    }
                };
                let local = DistanceBlock::new(bset.to_vec(), db.into_data())?;
                let improved = inject_in_place(&local, bset, &mut block)?;
                let reclose = if improved > 0 { Some(floyd_warshall_in_place(&mut block)?) } else { None };
                Ok((block, InjectTrace { component: c, boundary: bset.len(), improved }, reclose))
            })
            .collect();
        let mut exact = Vec::with_capacity(results.len());
        for r in results {
            let (b, inj, rc) = r?;
            exact.push(b);
            levels[l].injects.push(inj);
            levels[l].recloses.push(rc);
        }
        blocks[l] = exact;

        let want_dense = if l == 0 { dense_output } else { level.n() <= opts.dense_limit };
        if want_dense {
            let upper = match &level_dense[l + 1] {
                Some(m) => m.clone(),
                None => materialise(&hierarchy, &blocks, &level_dense, l + 1)?,
            };
            let (m, merges) = assemble_level(level, &blocks[l], &upper)?;
            levels[l].merges = merges;
            if l == 0 {
                base_dense = Some(m);
            } else {
                level_dense[l] = Some(m);
            }
        }
    }

    let mode = match base_dense {
        Some(m) => ApspMode::FullDense(m),
        None => ApspMode::Lazy,
    };
    Ok(ApspResult { hierarchy, blocks, level_dense, mode, trace: ExecutionTrace { max_tile, dense_output, levels } })
}

/// Level-`l` distance using exact blocks of levels `>= l` (already computed).
fn query_upper<W: Weight>(
    h: &PartitionHierarchy<W>,
    blocks: &[Vec<DistanceBlock<W>>],
    level_dense: &[Option<DistanceBlock<W>>],
    l: usize,
    u: u32,
    v: u32,
) -> W {
    if u == v {
        return W::zero();
    }
    if let Some(m) = &level_dense[l] {
        return m.get(u as usize, v as usize);
    }
    let level = &h.levels[l];
    let (c1, c2) = (level.component_of(u), level.component_of(v));
    let (s1, s2) = (level.slot[u as usize] as usize, level.slot[v as usize] as usize);
    if c1 == c2 {
        return blocks[l][c1].get(s1, s2);
    }
    let mut best = W::INF;
    for &i in level.boundaries.of(c1) {
        let left = blocks[l][c1].get(s1, level.slot[i as usize] as usize);
        if left.is_inf() {
            continue;
        }
        for &j in level.boundaries.of(c2) {
            let right = blocks[l][c2].get(level.slot[j as usize] as usize, s2);
            if right.is_inf() {
                continue;
            }
            let mid = query_upper(h, blocks, level_dense, l + 1, level.up[i as usize], level.up[j as usize]);
            best = best.min_w(left.sat_add(mid).sat_add(right));
        }
    }
    best
}

/// Full matrix of level `l` by point queries (only when it was not stored).
fn materialise<W: Weight>(
    h: &PartitionHierarchy<W>,
    blocks: &[Vec<DistanceBlock<W>>],
    level_dense: &[Option<DistanceBlock<W>>],
    l: usize,
) -> Result<DistanceBlock<W>> {
    let n = h.levels[l].n();
    let data: Vec<W> = (0..n * n)
        .into_par_iter()
        .map(|x| query_upper(h, blocks, level_dense, l, (x / n) as u32, (x % n) as u32))
        .collect();
    DistanceBlock::new((0..n as u32).collect(), data)
}
