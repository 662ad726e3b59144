//! k-way partitioning, boundary extraction, boundary graphs and the level hierarchy.

mod boundary;
mod greedy;
mod hierarchy;

pub use boundary::{build_boundary_graph, BoundaryGraph};
pub use greedy::{kway_partition, GreedyPartitioner, Partitioner, DEFAULT_IMBALANCE, DEFAULT_REFINE_PASSES};
pub use hierarchy::{
    build_hierarchy, build_hierarchy_with, BranchingRule, HierarchyLevel, HierarchyMode, HierarchyOptions,
    LevelKind, OversizePolicy, PartitionHierarchy,
};
pub(crate) use hierarchy::build_hierarchy_with_blocks;

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::weight::Weight;

/// Component id per vertex.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    assignment: Vec<u32>,
    k: usize,
}

impl Partition {
    pub fn new(assignment: Vec<u32>, k: usize) -> Result<Self> {
        if let Some(&bad) = assignment.iter().find(|&&c| c as usize >= k) {
            return Err(Error::Argument(format!("component id {bad} is not below k = {k}")));
        }
        Ok(Partition { assignment, k })
    }

    /// Everything in component 0.
    pub fn single(n: usize) -> Self {
        Partition { assignment: vec![0; n], k: 1 }
    }

    pub fn assignment(&self) -> &[u32] {
        &self.assignment
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.assignment.len()
    }

    pub fn component_of(&self, v: u32) -> u32 {
        self.assignment[v as usize]
    }

    /// Member lists, each sorted by vertex id.
    pub fn components(&self) -> Vec<Vec<u32>> {
        let mut out = vec![Vec::new(); self.k];
        for (v, &c) in self.assignment.iter().enumerate() {
            out[c as usize].push(v as u32);
        }
        out
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut out = vec![0; self.k];
        for &c in &self.assignment {
            out[c as usize] += 1;
        }
        out
    }

    /// Arcs whose endpoints lie in different components.
    pub fn cut_size<W: Weight>(&self, g: &WeightedGraph<W>) -> usize {
        g.edges().iter().filter(|e| self.component_of(e.src) != self.component_of(e.dst)).count()
    }

    /// `vertex<TAB>component` lines after a `# k=..` header.
    pub fn write_tsv<Wr: Write>(&self, mut out: Wr) -> Result<()> {
        writeln!(out, "# k={}", self.k)?;
        for (v, c) in self.assignment.iter().enumerate() {
            writeln!(out, "{v}\t{c}")?;
        }
        Ok(())
    }

    /// Inverse of [`Partition::write_tsv`]. Without a header, `k = max id + 1`.
    pub fn read_tsv<R: BufRead>(input: R) -> Result<Self> {
        let mut k = None;
        let mut pairs = Vec::new();
        for (lineno, line) in input.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if let Some(rest) = line.strip_prefix('#') {
                if let Some(v) = rest.trim().strip_prefix("k=") {
                    k = Some(v.trim().parse::<usize>().map_err(|e| Error::Parse { line: lineno + 1, msg: e.to_string() })?);
                }
                continue;
            }
            if line.is_empty() {
                continue;
            }
            let mut it = line.split('\t');
            let parse = |s: Option<&str>| -> Result<u32> {
                s.ok_or_else(|| Error::Parse { line: lineno + 1, msg: "expected vertex<TAB>component".into() })?
                    .trim()
                    .parse::<u32>()
                    .map_err(|e| Error::Parse { line: lineno + 1, msg: e.to_string() })
            };
            pairs.push((parse(it.next())?, parse(it.next())?));
        }
        let n = pairs.len();
        let mut assignment = vec![u32::MAX; n];
        for (v, c) in pairs {
            let slot = assignment
                .get_mut(v as usize)
                .ok_or_else(|| Error::Parse { line: 0, msg: format!("vertex {v} out of range for {n} rows") })?;
            if *slot != u32::MAX {
                return Err(Error::Parse { line: 0, msg: format!("vertex {v} listed twice") });
            }
            *slot = c;
        }
        let k = k.unwrap_or_else(|| assignment.iter().map(|&c| c as usize + 1).max().unwrap_or(0));
        Partition::new(assignment, k)
    }
}

/// Per-component sorted boundary vertex lists.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundarySet {
    sets: Vec<Vec<u32>>,
}

impl BoundarySet {
    pub fn from_sets(sets: Vec<Vec<u32>>) -> Self {
        BoundarySet { sets }
    }

    pub fn of(&self, c: usize) -> &[u32] {
        &self.sets[c]
    }

    pub fn sets(&self) -> &[Vec<u32>] {
        &self.sets
    }

    pub fn total(&self) -> usize {
        self.sets.iter().map(Vec::len).sum()
    }

    /// Sorted union over all components.
    pub fn union(&self) -> Vec<u32> {
        let mut all: Vec<u32> = self.sets.iter().flatten().copied().collect();
        all.sort_unstable();
        all
    }
}

/// Vertices with at least one arc (either direction) to another component.
pub fn find_boundary<W: Weight>(g: &WeightedGraph<W>, p: &Partition) -> Result<BoundarySet> {
    if p.n() != g.n() {
        return Err(Error::Consistency(format!("partition covers {} vertices, graph has {}", p.n(), g.n())));
    }
    let mut flag = vec![false; g.n()];
    for e in g.edges() {
        if p.component_of(e.src) != p.component_of(e.dst) {
            flag[e.src as usize] = true;
            flag[e.dst as usize] = true;
        }
    }
    let mut sets = vec![Vec::new(); p.k()];
    for (v, &f) in flag.iter().enumerate() {
        if f {
            sets[p.component_of(v as u32) as usize].push(v as u32);
        }
    }
    Ok(BoundarySet { sets })
}
