use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::align::{align_windowed_with, reconstruct_path, AlignOptions, AlignResult, CarryMode, DEFAULT_TBM_BYTES, DEFAULT_WIDTH};
use crate::error::{Error, Result};
use crate::graph::{GenomeGraph, ReadBatch, DEFAULT_SHORT_THRESHOLD};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MappingMode {
    /// Independent small PE groups, one read per group at a time.
    ShortParallel,
    /// All PEs of a unit chained into one pipeline over a single read.
    LongPipeline,
}

/// `ShortParallel` iff `read_len <= threshold`.
pub fn select_mapping(read_len: usize, threshold: usize) -> MappingMode {
    if read_len <= threshold {
        MappingMode::ShortParallel
    } else {
        MappingMode::LongPipeline
    }
}

/// Operand source of one node update.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum UpdateKind {
    /// The only predecessor is the node visited just before: local feedback.
    Feedback,
    /// Any other predecessor set, fetched from shared SRAM.
    Hop,
}

/// Per-node update kinds in topological order, with the predecessor lists
/// of `Hop` nodes (needed for bank-conflict modeling).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphProfile {
    pub nodes: usize,
    pub kinds: Vec<UpdateKind>,
    /// Empty for `Feedback` nodes.
    pub hop_preds: Vec<Vec<u32>>,
}

impl GraphProfile {
    pub fn of(g: &GenomeGraph) -> Self {
        let order = g.topo_order();
        let mut kinds = Vec::with_capacity(order.len());
        let mut hop_preds = Vec::with_capacity(order.len());
        for (i, &v) in order.iter().enumerate() {
            let preds = g.preds(v as usize);
            if i > 0 && preds.len() == 1 && preds[0] == order[i - 1] {
                kinds.push(UpdateKind::Feedback);
                hop_preds.push(Vec::new());
            } else {
                kinds.push(UpdateKind::Hop);
                hop_preds.push(preds.to_vec());
            }
        }
        GraphProfile { nodes: order.len(), kinds, hop_preds }
    }

    pub fn feedback_count(&self) -> usize {
        self.kinds.iter().filter(|&&k| k == UpdateKind::Feedback).count()
    }

    pub fn hop_count(&self) -> usize {
        self.nodes - self.feedback_count()
    }

    pub fn hop_pred_total(&self) -> usize {
        self.hop_preds.iter().map(Vec::len).sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BatchConfig {
    pub width: usize,
    pub carry: CarryMode,
    pub pe_per_pu: usize,
    /// PEs per independent group in short mode.
    pub group_size: usize,
    pub threshold: usize,
    pub record_trace: bool,
    pub tbm_bytes: usize,
}

impl Default for BatchConfig {
    fn default() -> Self {
        BatchConfig {
            width: DEFAULT_WIDTH,
            carry: CarryMode::PredCarry,
            pe_per_pu: 64,
            group_size: 4,
            threshold: DEFAULT_SHORT_THRESHOLD,
            record_trace: false,
            tbm_bytes: DEFAULT_TBM_BYTES,
        }
    }
}

impl BatchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.pe_per_pu == 0 || self.group_size == 0 {
            return Err(Error::Argument("width, pe_per_pu and group_size must be positive".into()));
        }
        if !self.pe_per_pu.is_multiple_of(self.group_size) {
            return Err(Error::Argument(format!(
                "pe_per_pu = {} is not divisible by group_size = {}",
                self.pe_per_pu, self.group_size
            )));
        }
        Ok(())
    }

    pub fn group_count(&self, mode: MappingMode) -> usize {
        match mode {
            MappingMode::ShortParallel => self.pe_per_pu / self.group_size,
            MappingMode::LongPipeline => 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReadTrace {
    pub len: usize,
    pub windows_total: usize,
    pub windows_processed: usize,
    pub group: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BatchTrace {
    pub mode: MappingMode,
    pub width: usize,
    pub pe_per_pu: usize,
    pub group_size: usize,
    pub groups: usize,
    pub profile: GraphProfile,
    /// In result order.
    pub reads: Vec<ReadTrace>,
}

impl BatchTrace {
    /// Read indices per group.
    pub fn group_members(&self) -> Vec<Vec<usize>> {
        let mut m = vec![Vec::new(); self.groups];
        for (i, r) in self.reads.iter().enumerate() {
            m[r.group].push(i);
        }
        m
    }

    /// The same reads reassigned (round-robin) for a different PE budget.
    pub fn regrouped(&self, pe_per_pu: usize, group_size: usize) -> Result<BatchTrace> {
        let cfg = BatchConfig { pe_per_pu, group_size, ..Default::default() };
        cfg.validate()?;
        let groups = cfg.group_count(self.mode);
        let mut out = self.clone();
        out.pe_per_pu = pe_per_pu;
        out.group_size = group_size;
        out.groups = groups;
        for (i, r) in out.reads.iter_mut().enumerate() {
            r.group = i % groups;
        }
        Ok(out)
    }

    /// Concatenates two traces taken over the same graph and configuration.
    pub fn merged(&self, other: &BatchTrace) -> Result<BatchTrace> {
        if (self.mode, self.width, self.pe_per_pu, self.group_size, self.groups)
            != (other.mode, other.width, other.pe_per_pu, other.group_size, other.groups)
            || self.profile != other.profile
        {
            return Err(Error::Validation("traces differ in mode, configuration or graph".into()));
        }
        let mut out = self.clone();
        out.reads.extend_from_slice(&other.reads);
        Ok(out)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReadResult {
    pub id: String,
    /// The replay log is dropped once the path is extracted.
    pub result: AlignResult,
    pub path: Option<Vec<u32>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BatchOutput {
    /// Sorted by read id.
    pub results: Vec<ReadResult>,
    pub trace: BatchTrace,
}

/// Aligns every read (in parallel) and records the per-read work for the
/// cost model. Scores do not depend on `mode`.
pub fn batch_align(g: &GenomeGraph, batch: &ReadBatch, mode: MappingMode, config: &BatchConfig) -> Result<BatchOutput> {
    config.validate()?;
    let mut order: Vec<usize> = (0..batch.reads.len()).collect();
    order.sort_by(|&a, &b| batch.reads[a].id.cmp(&batch.reads[b].id).then(a.cmp(&b)));
    let opts = AlignOptions {
        width: config.width,
        carry: config.carry,
        record_trace: config.record_trace,
        tbm_bytes: config.tbm_bytes,
    };
    let results = order
        .par_iter()
        .map(|&i| {
            let read = &batch.reads[i];
            let mut result = align_windowed_with(g, &read.seq, &opts)?;
            let path = if config.record_trace && result.score_max > 0 {
                reconstruct_path(g, &read.seq, &result).ok()
            } else {
                None
            };
            result.trace = None;
            Ok(ReadResult { id: read.id.clone(), result, path })
        })
        .collect::<Result<Vec<_>>>()?;
    let groups = config.group_count(mode);
    let reads = results
        .iter()
        .enumerate()
        .map(|(i, r)| ReadTrace {
            len: batch.reads[order[i]].len(),
            windows_total: r.result.stats.windows_total,
            windows_processed: r.result.stats.windows_processed,
            group: i % groups,
        })
        .collect();
    let trace = BatchTrace {
        mode,
        width: config.width,
        pe_per_pu: config.pe_per_pu,
        group_size: config.group_size,
        groups,
        profile: GraphProfile::of(g),
        reads,
    };
    Ok(BatchOutput { results, trace })
}

fn join(ids: &[u32]) -> String {
    if ids.is_empty() {
        return "-".into();
    }
    ids.iter().map(u32::to_string).collect::<Vec<_>>().join(",")
}

/// `read_id  score_max  end_node[,end_node..]`, plus a `path` column when any
/// result carries one.
pub fn write_results_tsv<Wr: Write>(mut w: Wr, results: &[ReadResult]) -> Result<()> {
    let with_path = results.iter().any(|r| r.path.is_some());
    if with_path {
        writeln!(w, "read_id\tscore_max\tend_node\tpath")?;
    } else {
        writeln!(w, "read_id\tscore_max\tend_node")?;
    }
    for r in results {
        write!(w, "{}\t{}\t{}", r.id, r.result.score_max, join(&r.result.end_nodes))?;
        if with_path {
            write!(w, "\t{}", r.path.as_deref().map(join).unwrap_or_else(|| "-".into()))?;
        }
        writeln!(w)?;
    }
    Ok(())
}
