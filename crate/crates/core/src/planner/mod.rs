//! Lowers a workload descriptor into an ordered stage plan and runs it on the
//! engines, optionally attaching a cost report.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::apsp::{recursive_apsp, ApspOptions, ApspResult};
use crate::cost::{model_recursive_apsp, model_traversal, CostReport, HbmParams, PcmParams};
use crate::error::{Error, Result};
use crate::graph::io::{load_edge_list, load_genome_graph, load_reads};
use crate::graph::{GenomeGraph, ReadBatch, WeightedGraph};
use crate::partition::{LevelKind, PartitionHierarchy};
use crate::s2g::{batch_align, select_mapping, BatchConfig, MappingMode, ReadResult};

/// Optional parameter overrides; absent fields keep their defaults.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DeviceOverrides {
    #[serde(default)]
    pub pcm: Option<PcmParams>,
    #[serde(default)]
    pub hbm: Option<HbmParams>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WorkloadKind {
    Apsp,
    S2g,
}

/// The descriptor file: `kind`, `graph`, `reads`, `max_tile`, `device`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorkloadDescriptor {
    pub kind: WorkloadKind,
    pub graph: PathBuf,
    #[serde(default)]
    pub reads: Option<PathBuf>,
    #[serde(default)]
    pub max_tile: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub width: Option<usize>,
    #[serde(default)]
    pub threshold: Option<usize>,
    #[serde(default)]
    pub device: DeviceOverrides,
}

impl WorkloadDescriptor {
    /// Parses a descriptor; relative paths resolve against `base_dir`.
    pub fn from_json(text: &str, base_dir: &Path) -> Result<Self> {
        let raw: serde_json::Value = serde_json::from_str(text)?;
        let kind = raw.get("kind").and_then(|k| k.as_str()).unwrap_or("<missing>");
        if !matches!(kind, "apsp" | "s2g") {
            return Err(Error::Descriptor(format!("unknown workload kind `{kind}`")));
        }
        let mut d: WorkloadDescriptor =
            serde_json::from_value(raw).map_err(|e| Error::Descriptor(e.to_string()))?;
        let resolve = |p: &Path| if p.is_relative() { base_dir.join(p) } else { p.to_path_buf() };
        d.graph = resolve(&d.graph);
        d.reads = d.reads.as_deref().map(resolve);
        Ok(d)
    }

    pub fn load_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text, path.parent().unwrap_or(Path::new(".")))
    }

    /// Reads and validates the referenced inputs.
    pub fn load(&self) -> Result<LoadedWorkload> {
        let pcm = self.device.pcm.unwrap_or_default();
        let hbm = self.device.hbm.unwrap_or_default();
        pcm.validate()?;
        hbm.validate()?;
        match self.kind {
            WorkloadKind::Apsp => {
                let max_tile = self.max_tile.ok_or_else(|| Error::Descriptor("apsp workload needs max_tile".into()))?;
                if max_tile == 0 {
                    return Err(Error::Descriptor("max_tile must be positive".into()));
                }
                Ok(LoadedWorkload::Apsp { graph: load_edge_list(&self.graph)?, max_tile, seed: self.seed, pcm })
            }
            WorkloadKind::S2g => {
                let reads = self.reads.as_ref().ok_or_else(|| Error::Descriptor("s2g workload needs reads".into()))?;
                let d = BatchConfig::default();
                let config = BatchConfig {
                    width: self.width.unwrap_or(d.width),
                    threshold: self.threshold.unwrap_or(d.threshold),
                    pe_per_pu: hbm.pe_per_pu,
                    group_size: hbm.group_size,
                    ..d
                };
                config.validate()?;
                Ok(LoadedWorkload::S2g { graph: load_genome_graph(&self.graph)?, reads: load_reads(reads)?, config, hbm })
            }
        }
    }
}

#[derive(Clone, Debug)]
pub enum LoadedWorkload {
    Apsp { graph: WeightedGraph, max_tile: usize, seed: u64, pcm: PcmParams },
    S2g { graph: GenomeGraph, reads: ReadBatch, config: BatchConfig, hbm: HbmParams },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StageKind {
    PartitionBuild,
    FwClose,
    BoundaryFw,
    Inject,
    Merge,
    MaskBuild,
    AlignBatch,
}

impl StageKind {
    /// The only tile allowed to run this kind.
    pub fn tile(self) -> Tile {
        match self {
            StageKind::PartitionBuild => Tile::Host,
            StageKind::FwClose | StageKind::BoundaryFw | StageKind::Inject | StageKind::Merge => Tile::Matrix,
            StageKind::MaskBuild | StageKind::AlignBatch => Tile::Traversal,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Tile {
    Host,
    Matrix,
    Traversal,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stage {
    pub id: usize,
    pub kind: StageKind,
    pub tile: Tile,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub mapping: Option<MappingMode>,
    pub level: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExecutionPlan {
    pub kind: WorkloadKind,
    pub stages: Vec<Stage>,
}

impl ExecutionPlan {
    pub fn count(&self, kind: StageKind) -> usize {
        self.stages.iter().filter(|s| s.kind == kind).count()
    }

    /// Checks dataflow order and tile specialization.
    pub fn validate(&self) -> Result<()> {
        let mut avail: HashSet<&str> = ["graph", "reads"].into_iter().collect();
        for (i, s) in self.stages.iter().enumerate() {
            if s.id != i {
                return Err(Error::Validation(format!("stage at position {i} has id {}", s.id)));
            }
            if s.tile != s.kind.tile() {
                return Err(Error::Validation(format!("stage {i}: {:?} cannot run on the {:?} tile", s.kind, s.tile)));
            }
            if let Some(missing) = s.inputs.iter().find(|x| !avail.contains(x.as_str())) {
                return Err(Error::Validation(format!("stage {i} reads `{missing}` before it is produced")));
            }
            avail.extend(s.outputs.iter().map(String::as_str));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

struct Builder {
    stages: Vec<Stage>,
}

impl Builder {
    fn push(&mut self, kind: StageKind, level: Option<usize>, inputs: Vec<String>, outputs: Vec<String>, mapping: Option<MappingMode>) {
        let id = self.stages.len();
        self.stages.push(Stage { id, kind, tile: kind.tile(), inputs, outputs, mapping, level });
    }
}

fn closed(l: usize, c: usize) -> String {
    format!("D{l}.{c}")
}

/// Ordered component pairs at level `l` whose boundaries are both non-empty.
fn merge_pairs<W: crate::weight::Weight>(h: &PartitionHierarchy<W>, l: usize) -> Vec<(usize, usize)> {
    let sets = h.levels[l].boundaries.sets();
    let live: Vec<usize> = (0..sets.len()).filter(|&c| !sets[c].is_empty()).collect();
    live.iter().flat_map(|&a| live.iter().filter(move |&&b| b != a).map(move |&b| (a, b))).collect()
}

/// Stages for the recursive APSP: initial closures bottom-up, the top
/// closure, then per level (top-down) boundary distances, injection,
/// re-closure and, where the level is assembled densely, pair merges.
pub fn lower_apsp<W: crate::weight::Weight>(h: &PartitionHierarchy<W>, opts: &ApspOptions) -> ExecutionPlan {
    let mut b = Builder { stages: Vec::new() };
    b.push(StageKind::PartitionBuild, None, vec!["graph".into()], vec!["hierarchy".into()], None);
    let depth = h.depth();
    let n0 = h.levels[0].n();
    let dense_output = match opts.output {
        crate::apsp::OutputMode::Auto => n0 <= opts.dense_limit,
        crate::apsp::OutputMode::Dense => true,
        crate::apsp::OutputMode::Lazy => false,
    };
    let below = |l: usize| -> Vec<String> {
        let mut v = vec!["hierarchy".to_string()];
        if l > 0 {
            v.extend((0..h.levels[l - 1].components.len()).map(|c| closed(l - 1, c)));
        }
        v
    };
    for l in 0..depth - 1 {
        for c in 0..h.levels[l].components.len() {
            b.push(StageKind::FwClose, Some(l), below(l), vec![closed(l, c)], None);
        }
    }
    let top = depth - 1;
    b.push(StageKind::FwClose, Some(top), below(top), vec![format!("R{top}")], None);
    for l in (0..top).rev() {
        let level = &h.levels[l];
        let mut upper = vec![format!("R{}", l + 1)];
        upper.extend(b.stages.iter().filter(|s| s.kind == StageKind::Merge && s.level == Some(l + 1)).flat_map(|s| s.outputs.clone()));
        b.push(StageKind::BoundaryFw, Some(l), upper, vec![format!("DB{l}")], None);
        let mut inj = vec![format!("DB{l}")];
        inj.extend((0..level.components.len()).map(|c| closed(l, c)));
        b.push(StageKind::Inject, Some(l), inj, vec![format!("I{l}")], None);
        b.push(StageKind::FwClose, Some(l), vec![format!("I{l}")], vec![format!("R{l}")], None);
        let dense = if l == 0 { dense_output } else { level.n() <= opts.dense_limit };
        if dense && level.kind == LevelKind::Partitioned {
            for (a, c) in merge_pairs(h, l) {
                b.push(StageKind::Merge, Some(l), vec![format!("R{l}"), format!("DB{l}")], vec![format!("M{l}.{a}.{c}")], None);
            }
        }
    }
    ExecutionPlan { kind: WorkloadKind::Apsp, stages: b.stages }
}

/// `MaskBuild`, then one `AlignBatch` per non-empty length class.
pub fn lower_s2g(reads: &ReadBatch, threshold: usize) -> ExecutionPlan {
    let mut b = Builder { stages: Vec::new() };
    b.push(StageKind::MaskBuild, None, vec!["reads".into()], vec!["masks".into()], None);
    let (short, long) = reads.split_by_class(threshold);
    for (batch, name) in [(short, "short"), (long, "long")] {
        if let Some(batch) = batch {
            let longest = batch.reads.iter().map(|r| r.len()).max().unwrap_or(1);
            b.push(
                StageKind::AlignBatch,
                None,
                vec!["graph".into(), "masks".into()],
                vec![format!("scores.{name}")],
                Some(select_mapping(longest, threshold)),
            );
        }
    }
    ExecutionPlan { kind: WorkloadKind::S2g, stages: b.stages }
}

fn apsp_options(max_tile: usize, seed: u64) -> ApspOptions {
    ApspOptions::new(max_tile).with_seed(seed)
}

/// Lowers an already-loaded workload (the APSP case builds the hierarchy).
pub fn lower_loaded(w: &LoadedWorkload) -> Result<ExecutionPlan> {
    let plan = match w {
        LoadedWorkload::Apsp { graph, max_tile, seed, .. } => {
            let opts = apsp_options(*max_tile, *seed);
            let h = crate::partition::build_hierarchy_with(graph, &opts.hierarchy, &crate::partition::GreedyPartitioner::default())?;
            lower_apsp(&h, &opts)
        }
        LoadedWorkload::S2g { reads, config, .. } => lower_s2g(reads, config.threshold),
    };
    plan.validate()?;
    Ok(plan)
}

pub fn lower(w: &WorkloadDescriptor) -> Result<ExecutionPlan> {
    lower_loaded(&w.load()?)
}

#[derive(Clone, Debug)]
pub enum Outputs {
    Apsp(Box<ApspResult>),
    /// Sorted by read id.
    S2g(Vec<ReadResult>),
}

#[derive(Clone, Debug)]
pub struct Execution {
    pub outputs: Outputs,
    pub report: Option<CostReport>,
}

fn at_stage<T>(stage: usize, r: Result<T>) -> Result<T> {
    r.map_err(|e| Error::Stage { stage, source: Box::new(e) })
}

/// Runs `plan` against `w`. APSP runs the recursive engine once and checks
/// that its trace matches the plan's shape; alignment runs one batch per
/// `AlignBatch` stage.
pub fn execute(plan: &ExecutionPlan, w: &LoadedWorkload, cost_model_on: bool) -> Result<Execution> {
    plan.validate()?;
    match w {
        LoadedWorkload::Apsp { graph, max_tile, seed, pcm } => {
            if plan.kind != WorkloadKind::Apsp {
                return Err(Error::Validation("plan kind does not match the workload".into()));
            }
            let r = at_stage(0, recursive_apsp(graph, *max_tile, &apsp_options(*max_tile, *seed)))?;
            let merge_stage = plan.stages.iter().find(|s| s.kind == StageKind::Merge).map_or(0, |s| s.id);
            if r.trace.merge_count() != plan.count(StageKind::Merge) {
                return Err(Error::Stage {
                    stage: merge_stage,
                    source: Box::new(Error::Consistency(format!(
                        "engine performed {} merges, plan has {}",
                        r.trace.merge_count(),
                        plan.count(StageKind::Merge)
                    ))),
                });
            }
            let report = if cost_model_on { Some(model_recursive_apsp(&r.trace, pcm)?) } else { None };
            Ok(Execution { outputs: Outputs::Apsp(Box::new(r)), report })
        }
        LoadedWorkload::S2g { graph, reads, config, hbm } => {
            if plan.kind != WorkloadKind::S2g {
                return Err(Error::Validation("plan kind does not match the workload".into()));
            }
            let (short, long) = reads.split_by_class(config.threshold);
            let mut parts = [short, long].into_iter().flatten();
            let mut results = Vec::new();
            let mut report: Option<CostReport> = None;
            for s in plan.stages.iter().filter(|s| s.kind == StageKind::AlignBatch) {
                let batch = parts
                    .next()
                    .ok_or_else(|| Error::Stage { stage: s.id, source: Box::new(Error::Consistency("no reads left for this batch".into())) })?;
                let mode = s.mapping.unwrap_or(MappingMode::ShortParallel);
                let out = at_stage(s.id, batch_align(graph, &batch, mode, config))?;
                if cost_model_on {
                    let r = at_stage(s.id, model_traversal(&out.trace, hbm, mode))?;
                    report = Some(match report {
                        Some(prev) => prev.then(r),
                        None => r,
                    });
                }
                results.extend(out.results);
            }
            results.sort_by(|a, b| a.id.cmp(&b.id));
            Ok(Execution { outputs: Outputs::S2g(results), report })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Read;

    #[test]
    fn mapping_from_read_lengths() {
        let short = ReadBatch::new((0..4).map(|i| Read::new(format!("s{i}"), vec![b'A'; 100])).collect(), 300);
        let plan = lower_s2g(&short, 300);
        assert_eq!(plan.stages.len(), 2);
        assert_eq!(plan.stages[1].mapping, Some(MappingMode::ShortParallel));
        let mut mixed = short.reads.clone();
        mixed.push(Read::new("l", vec![b'A'; 10_000]));
        let plan = lower_s2g(&ReadBatch::new(mixed, 300), 300);
        assert_eq!(plan.count(StageKind::AlignBatch), 2);
        assert_eq!(plan.stages[2].mapping, Some(MappingMode::LongPipeline));
        plan.validate().unwrap();
    }

    #[test]
    fn unknown_kind_is_a_descriptor_error() {
        let e = WorkloadDescriptor::from_json(r#"{"kind":"poa","graph":"g"}"#, Path::new("."));
        assert!(matches!(e, Err(Error::Descriptor(_))));
        let d = WorkloadDescriptor::from_json(
            r#"{"kind":"apsp","graph":"g.tsv","max_tile":64,"device":{"pcm":{"clock_mhz":250}}}"#,
            Path::new("/data"),
        )
        .unwrap();
        assert_eq!(d.graph, PathBuf::from("/data/g.tsv"));
        assert_eq!(d.device.pcm.unwrap().clock_mhz, 250.0);
        assert_eq!(d.device.pcm.unwrap().unit_dim, 1024);
    }

    #[test]
    fn misplaced_stage_fails_validation() {
        let mut plan = lower_s2g(&ReadBatch::new(vec![Read::new("a", "AC")], 300), 300);
        plan.stages[1].tile = Tile::Matrix;
        assert!(matches!(plan.validate(), Err(Error::Validation(_))));
        let mut plan = lower_s2g(&ReadBatch::new(vec![Read::new("a", "AC")], 300), 300);
        plan.stages.swap(0, 1);
        plan.stages[0].id = 0;
        plan.stages[1].id = 1;
        assert!(plan.validate().is_err());
    }
}
