use serde::{Deserialize, Serialize};

use super::{derate, CostReport, PcmParams, PhaseCost};
use crate::apsp::{ClosureTrace, ExecutionTrace, MergeShape, PanelTrace, TopTrace};
use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::partition::{
    build_hierarchy_with, GreedyPartitioner, HierarchyMode, HierarchyOptions, LevelKind, OversizePolicy,
    PartitionHierarchy,
};
use crate::weight::Weight;

/// Array dimension at which the clock is nominal.
pub const REFERENCE_DIM: usize = 1024;

/// Comparator-tree reduction of one row: 1 streaming cycle plus two 6-cycle stages.
pub const MP_CYCLES_PER_ROW: u64 = 13;

const BURST_ROWS: usize = 32;
const PERM_READ_CYCLES: u64 = 1;
const PERM_WRITE_CYCLES: u64 = 10;

/// Share of the N = 1024 latency spent in partition/merge overhead. The only
/// calibrated constant of the tile-size model; the rest comes from measured
/// hierarchies and the frequency derate.
pub const DEFAULT_OVERHEAD_SHARE: f64 = 0.0933;

fn permutation_cycles(rows: usize, p: &PcmParams) -> u64 {
    let per = PERM_READ_CYCLES + PERM_WRITE_CYCLES;
    if p.overlap {
        rows.div_ceil(BURST_ROWS) as u64 * per
    } else {
        rows as u64 * per
    }
}

/// Bit-serial add, bit-serial subtract-compare, and the row permutation.
pub fn pivot_cycles(dim: usize, p: &PcmParams) -> u64 {
    ((p.add_cycles_per_bit + p.sub_cycles_per_bit) * p.bits) as u64 + permutation_cycles(dim, p)
}

fn fw_phase(name: String, dim: usize, pivots: usize, work: PanelTrace, p: &PcmParams) -> PhaseCost {
    let cycles = pivots as u64 * pivot_cycles(dim, p);
    // Relaxed rows plus the broadcast pivot row are read in full.
    let read_bits = (work.rows_touched + pivots as u64) as f64 * (dim * p.bits) as f64;
    let write_bits = work.improvements as f64 * p.bits as f64;
    PhaseCost {
        phase: name,
        cycles,
        ns: cycles as f64 / p.clock_ghz(dim),
        pj: read_bits * p.read_energy_per_bit_pj + write_bits * p.write_energy_per_bit_pj,
        writes: work.improvements,
        ..Default::default()
    }
}

/// Cost of `pivots` FW steps on one `dim`-wide array.
pub fn model_fw_block(dim: usize, pivots: usize, trace: PanelTrace, p: &PcmParams) -> Result<CostReport> {
    p.validate()?;
    if dim > p.unit_dim {
        return Err(Error::Capacity(format!("block of dim {dim} exceeds the {}-wide array", p.unit_dim)));
    }
    Ok(CostReport::sequential(vec![fw_phase("fw_close".into(), dim, pivots, trace, p)]))
}

fn mp_phases(rows: usize, width: usize, p: &PcmParams) -> (PhaseCost, PhaseCost) {
    let ghz = p.clock_ghz(p.unit_dim);
    let add = if rows == 0 { 0 } else { (2 * p.add_cycles_per_bit * p.bits * rows.div_ceil(p.unit_dim)) as u64 };
    let operand_bits = (rows * width * p.bits) as f64;
    let add_phase = PhaseCost {
        phase: "mp_add".into(),
        cycles: add,
        ns: add as f64 / ghz,
        pj: 2.0 * operand_bits * p.read_energy_per_bit_pj,
        ..Default::default()
    };
    let red = rows as u64 * MP_CYCLES_PER_ROW;
    let reduce = PhaseCost {
        phase: "mp_reduce".into(),
        cycles: red,
        ns: red as f64 / ghz,
        pj: operand_bits * p.read_energy_per_bit_pj + (rows * p.bits) as f64 * p.write_energy_per_bit_pj,
        writes: rows as u64,
        ..Default::default()
    };
    (add_phase, reduce)
}

/// `rows` min-reductions of `width` candidates each: two bit-serial add
/// passes to form the candidates, then the comparator tree.
pub fn model_mp_merge(rows: usize, width: usize, p: &PcmParams) -> Result<CostReport> {
    p.validate()?;
    if width > p.unit_dim {
        return Err(Error::Capacity(format!("reduction width {width} exceeds the {}-wide tree", p.unit_dim)));
    }
    let (a, r) = mp_phases(rows, width, p);
    Ok(CostReport::sequential(vec![a, r]))
}

/// (ns, cycles, pj, writes) of one closure, tiling it over several arrays in
/// three-phase rounds when it is wider than one array.
fn closure_cost(dim: usize, pivots: usize, work: PanelTrace, p: &PcmParams) -> (f64, u64, f64, u64) {
    if dim <= p.unit_dim {
        let ph = fw_phase(String::new(), dim, pivots, work, p);
        return (ph.ns, ph.cycles, ph.pj, ph.writes);
    }
    let t = dim.div_ceil(p.unit_dim);
    let step = fw_phase(String::new(), p.unit_dim, p.unit_dim, PanelTrace::default(), p);
    // Each round: diagonal closure, then panels, then the remaining tiles.
    let cycles = t as u64 * 3 * step.cycles;
    let energy = fw_phase(String::new(), dim, pivots, work, p);
    (cycles as f64 / p.clock_ghz(p.unit_dim), cycles, energy.pj, energy.writes)
}

fn units_for(dim: usize, p: &PcmParams) -> usize {
    dim.div_ceil(p.unit_dim).pow(2).max(1)
}

/// Concurrent tasks limited by array count: waves of the slowest task.
fn parallel_phase(name: String, tasks: &[(usize, f64, u64, f64, u64)], p: &PcmParams) -> PhaseCost {
    let units: usize = tasks.iter().map(|t| t.0).sum();
    let waves = units.div_ceil(p.units()).max(1) as u64;
    let slowest = tasks.iter().fold((0.0f64, 0u64), |m, t| (m.0.max(t.1), m.1.max(t.2)));
    PhaseCost {
        phase: name,
        cycles: waves * slowest.1,
        ns: waves as f64 * slowest.0,
        pj: tasks.iter().map(|t| t.3).sum(),
        writes: tasks.iter().map(|t| t.4).sum(),
        ..Default::default()
    }
}

fn closure_task(c: &ClosureTrace, p: &PcmParams) -> (usize, f64, u64, f64, u64) {
    let (ns, cycles, pj, writes) = closure_cost(c.dim, c.pivots, c.work, p);
    (units_for(c.dim, p), ns, cycles, pj, writes)
}

fn merge_task(s: &MergeShape, p: &PcmParams) -> (usize, f64, u64, f64, u64) {
    let mut out = (1, 0.0, 0, 0.0, 0);
    for (rows, width) in [(s.stage1_rows, s.stage1_width), (s.stage2_rows, s.stage2_width)] {
        let chunks = width.div_ceil(p.unit_dim).max(1);
        let (a, r) = mp_phases(rows * chunks, width.min(p.unit_dim), p);
        out.1 += a.ns + r.ns;
        out.2 += a.cycles + r.cycles;
        out.3 += a.pj + r.pj;
        out.4 += r.writes;
    }
    out
}

/// Rolls an execution trace up into per-level phases. Tasks within a phase
/// run concurrently on the available arrays; phases run back to back.
pub fn model_recursive_apsp(trace: &ExecutionTrace, p: &PcmParams) -> Result<CostReport> {
    p.validate()?;
    if trace.levels.is_empty() {
        return Err(Error::Validation("execution trace has no levels".into()));
    }
    let ghz = p.clock_ghz(p.unit_dim);
    let mut phases = Vec::new();
    let mut staged = 0u64;
    for l in &trace.levels {
        if l.kind == LevelKind::Partitioned {
            if let Some(c) = l.closures.iter().find(|c| c.dim > p.unit_dim) {
                return Err(Error::Validation(format!(
                    "level {} closes a {}-wide component on {}-wide arrays",
                    l.level, c.dim, p.unit_dim
                )));
            }
        }
        if !l.closures.is_empty() {
            let tasks: Vec<_> = l.closures.iter().map(|c| closure_task(c, p)).collect();
            phases.push(parallel_phase(format!("L{}_close", l.level), &tasks, p));
        }
        match l.top {
            Some(TopTrace::Dense(c)) => phases.push(parallel_phase(format!("L{}_top", l.level), &[closure_task(&c, p)], p)),
            Some(TopTrace::Blocked(b)) => {
                let c = ClosureTrace { dim: b.dim, pivots: b.dim, work: b.work };
                phases.push(parallel_phase(format!("L{}_top", l.level), &[closure_task(&c, p)], p));
            }
            None => {}
        }
        if !l.injects.is_empty() {
            let tasks: Vec<_> = l
                .injects
                .iter()
                .map(|i| {
                    let cycles = permutation_cycles(i.boundary, p);
                    staged += 2 * (i.boundary * i.boundary * p.bits / 8) as u64;
                    let pj = (i.improved * p.bits) as f64 * p.write_energy_per_bit_pj;
                    (1, cycles as f64 / ghz, cycles, pj, i.improved as u64)
                })
                .collect();
            phases.push(parallel_phase(format!("L{}_inject", l.level), &tasks, p));
        }
        let recloses: Vec<_> = l.recloses.iter().flatten().map(|c| closure_task(c, p)).collect();
        if !recloses.is_empty() {
            phases.push(parallel_phase(format!("L{}_reclose", l.level), &recloses, p));
        }
        if !l.merges.is_empty() {
            let tasks: Vec<_> = l.merges.iter().map(|m| merge_task(&m.shape, p)).collect();
            staged += l.merges.iter().map(|m| (m.shape.stage2_rows * p.bits / 8) as u64).sum::<u64>();
            phases.push(parallel_phase(format!("L{}_merge", l.level), &tasks, p));
        }
    }
    if staged > 0 {
        phases.push(PhaseCost {
            phase: "hbm_stage".into(),
            ns: staged as f64 / p.hbm_gbps,
            pj: staged as f64 * 8.0 * p.hbm_energy_per_bit_pj,
            bytes_regular: staged,
            ..Default::default()
        });
    }
    if trace.dense_output && trace.levels.len() > 1 {
        let n = trace.levels[0].n as u64;
        let bytes = n * n * (p.bits / 8) as u64;
        phases.push(PhaseCost { phase: "cold_export".into(), ns: bytes as f64 / p.cold_gbps, ..Default::default() });
    }
    let mut r = CostReport::sequential(phases);
    let busy: f64 = r.phases.iter().filter(|ph| ph.phase.starts_with('L')).map(|ph| ph.ns).sum();
    if r.wall_time > 0.0 {
        r.utilization.insert("matrix".into(), busy * 1e-9 / r.wall_time);
    }
    Ok(r)
}

/// Partition/merge operations of a hierarchy: ordered component pairs whose
/// boundaries are both non-empty, summed over levels.
pub fn overhead_ops<W: Weight>(h: &PartitionHierarchy<W>) -> u64 {
    h.levels
        .iter()
        .filter(|l| l.kind == LevelKind::Partitioned)
        .map(|l| {
            let ne = l.boundaries.sets().iter().filter(|s| !s.is_empty()).count() as u64;
            ne * ne.saturating_sub(1)
        })
        .sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TilePoint {
    pub n: usize,
    /// Normalized to N = 1024.
    pub latency: f64,
    /// Normalized to N = 1024.
    pub energy: f64,
    pub overhead_ops: u64,
    pub levels: usize,
    pub components: usize,
}

fn hierarchy_at<W: Weight>(g: &WeightedGraph<W>, n: usize, seed: u64) -> Result<PartitionHierarchy<W>> {
    let opts = HierarchyOptions {
        seed,
        mode: HierarchyMode::Structure,
        oversize: OversizePolicy::BlockedTop,
        min_shrink: crate::apsp::DEFAULT_MIN_SHRINK,
        ..HierarchyOptions::new(n)
    };
    build_hierarchy_with(g, &opts, &GreedyPartitioner::default())
}

/// Latency and energy against matrix-tile dimension N, normalized to N = 1024:
/// `latency(N) = derate(N)^-1 * ((1 - s) + s * ops(N) / ops(1024))` where
/// `ops` is measured on a real hierarchy built at each N and `s` is
/// `overhead_share`. Energy drops the derate term.
pub fn sweep_tile_size<W: Weight>(
    g: &WeightedGraph<W>,
    ns: &[usize],
    p: &PcmParams,
    overhead_share: f64,
    seed: u64,
) -> Result<Vec<TilePoint>> {
    p.validate()?;
    if ns.is_empty() || ns.contains(&0) {
        return Err(Error::Argument("tile sizes must be a non-empty list of positive values".into()));
    }
    if !(0.0..=1.0).contains(&overhead_share) {
        return Err(Error::Argument(format!("overhead share {overhead_share} outside [0, 1]")));
    }
    let mut measured = Vec::with_capacity(ns.len());
    let mut anchor = None;
    for &n in ns {
        let h = hierarchy_at(g, n, seed)?;
        let ops = overhead_ops(&h);
        if n == REFERENCE_DIM {
            anchor = Some(ops);
        }
        let comps = h.levels.iter().map(|l| l.components.len()).sum();
        measured.push((n, ops, h.depth(), comps));
    }
    let anchor = match anchor {
        Some(a) => a,
        None => overhead_ops(&hierarchy_at(g, REFERENCE_DIM, seed)?),
    };
    let s = overhead_share;
    Ok(measured
        .into_iter()
        .map(|(n, ops, levels, components)| {
            let rel = if anchor == 0 { 0.0 } else { ops as f64 / anchor as f64 };
            let energy = (1.0 - s) + s * rel;
            TilePoint { n, latency: energy / derate(n, p.freq_derate_alpha), energy, overhead_ops: ops, levels, components }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::apsp::{InjectTrace, LevelTrace, MergeTrace};

    #[test]
    fn one_pivot_at_reference_dim() {
        let p = PcmParams::default();
        let r = model_fw_block(1024, 1, PanelTrace::default(), &p).unwrap();
        assert_eq!(r.cycles, 480);
        let zero = model_fw_block(1024, 0, PanelTrace::default(), &p).unwrap();
        assert_eq!((zero.cycles, zero.energy), (0, 0.0));
        assert!(matches!(model_fw_block(1025, 1, PanelTrace::default(), &p), Err(Error::Capacity(_))));
    }

    #[test]
    fn selective_writes() {
        let p = PcmParams::default();
        let no_writes = model_fw_block(64, 64, PanelTrace { rows_touched: 100, improvements: 0 }, &p).unwrap();
        let some = model_fw_block(64, 64, PanelTrace { rows_touched: 100, improvements: 10 }, &p).unwrap();
        assert_eq!(no_writes.pcm_writes, 0);
        let write_pj = (some.energy - no_writes.energy) * 1e12;
        assert!((write_pj - 10.0 * 32.0 * 0.56).abs() < 1e-6);
    }

    #[test]
    fn serialized_permutation_is_slower() {
        let p = PcmParams { overlap: false, ..Default::default() };
        assert_eq!(model_fw_block(1024, 1, PanelTrace::default(), &p).unwrap().cycles, 128 + 1024 * 11);
    }

    #[test]
    fn merge_reduction_is_thirteen_per_row() {
        let p = PcmParams::default();
        let r = model_mp_merge(1, 1024, &p).unwrap();
        assert_eq!(r.phase("mp_reduce").unwrap().cycles, 13);
        assert_eq!(model_mp_merge(1024, 1024, &p).unwrap().phase("mp_reduce").unwrap().cycles, 13_312);
        assert_eq!(model_mp_merge(0, 1024, &p).unwrap().cycles, 0);
        assert!(matches!(model_mp_merge(1, 1025, &p), Err(Error::Capacity(_))));
    }

    fn closure(dim: usize) -> ClosureTrace {
        ClosureTrace { dim, pivots: dim, work: PanelTrace { rows_touched: (dim * dim) as u64, improvements: dim as u64 } }
    }

    fn level(level: usize, kind: LevelKind) -> LevelTrace {
        LevelTrace {
            level,
            n: 0,
            kind,
            closures: vec![],
            top: None,
            injects: vec![],
            recloses: vec![],
            merges: vec![],
        }
    }

    #[test]
    fn single_tile_equals_block() {
        let p = PcmParams::default();
        let c = closure(200);
        let t = ExecutionTrace {
            max_tile: 256,
            dense_output: true,
            levels: vec![LevelTrace { n: 200, top: Some(TopTrace::Dense(c)), ..level(0, LevelKind::Top) }],
        };
        let r = model_recursive_apsp(&t, &p).unwrap();
        let b = model_fw_block(200, 200, c.work, &p).unwrap();
        assert_eq!(r.cycles, b.cycles);
        assert!((r.energy - b.energy).abs() <= 1e-12 * b.energy);
        assert_eq!(r.pcm_writes, b.pcm_writes);
    }

    #[test]
    fn parallel_components_cost_one_latency() {
        let p = PcmParams::default();
        let c = closure(128);
        let one = model_fw_block(128, 128, c.work, &p).unwrap();
        let t = ExecutionTrace {
            max_tile: 128,
            dense_output: false,
            levels: vec![LevelTrace { closures: vec![c, c], ..level(0, LevelKind::Partitioned) }],
        };
        let r = model_recursive_apsp(&t, &p).unwrap();
        assert_eq!(r.cycles, one.cycles);
        assert!((r.energy - 2.0 * one.energy).abs() < 1e-9 * one.energy);
        // One array per die forces two waves.
        let tight = PcmParams { units_per_tile: 1, tiles_per_die: 1, ..p };
        assert_eq!(model_recursive_apsp(&t, &tight).unwrap().cycles, 2 * one.cycles);
    }

    #[test]
    fn oversize_partitioned_closure_is_rejected() {
        let t = ExecutionTrace {
            max_tile: 2048,
            dense_output: false,
            levels: vec![LevelTrace { closures: vec![closure(2048)], ..level(0, LevelKind::Partitioned) }],
        };
        assert!(matches!(model_recursive_apsp(&t, &PcmParams::default()), Err(Error::Validation(_))));
        let empty = ExecutionTrace { max_tile: 8, dense_output: false, levels: vec![] };
        assert!(matches!(model_recursive_apsp(&empty, &PcmParams::default()), Err(Error::Validation(_))));
    }

    #[test]
    fn hand_summed_critical_path() {
        // Level 0: closures 64 and 32, one inject (b = 40), one merge;
        // level 1: top closure of 100.
        let p = PcmParams::default();
        let shape = MergeShape::new(64, 10, 12, 32);
        let t = ExecutionTrace {
            max_tile: 64,
            dense_output: false,
            levels: vec![
                LevelTrace {
                    n: 96,
                    closures: vec![closure(64), closure(32)],
                    injects: vec![InjectTrace { component: 0, boundary: 40, improved: 0 }],
                    recloses: vec![None],
                    merges: vec![MergeTrace { from: 0, to: 1, shape }],
                    ..level(0, LevelKind::Partitioned)
                },
                LevelTrace { n: 100, top: Some(TopTrace::Dense(closure(100))), ..level(1, LevelKind::Top) },
            ],
        };
        let r = model_recursive_apsp(&t, &p).unwrap();
        let pivot = |d: usize| 128 + (d.div_ceil(32) as u64) * 11;
        let close = 64 * pivot(64);
        let top = 100 * pivot(100);
        let inject = 2 * 11;
        // Stage 2 has 2048 rows: two batches of bit-serial adds.
        let merge = (128 + 64 * 12 * 13) + (2 * 128 + 64 * 32 * 13);
        assert_eq!(r.cycles, close + top + inject + merge as u64);
    }

    #[test]
    fn sweep_is_anchored_at_reference() {
        let g = crate::graph::gen_nws(3000, 6, 0.01, 2, 10).unwrap();
        let p = PcmParams::default();
        let pts = sweep_tile_size(&g, &[1024], &p, DEFAULT_OVERHEAD_SHARE, 1).unwrap();
        assert_eq!(pts[0].latency, 1.0);
        assert_eq!(pts[0].energy, 1.0);
        assert!(sweep_tile_size(&g, &[], &p, 0.1, 1).is_err());
    }
}
