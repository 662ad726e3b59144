use serde::{Deserialize, Serialize};

use super::{CostReport, HbmParams, PhaseCost};
use crate::error::{Error, Result};
use crate::graph::{gen_genome, gen_reads, GenomeGraph, Read, ReadBatch, DEFAULT_SHORT_THRESHOLD};
use crate::s2g::{batch_align, BatchConfig, BatchTrace, GraphProfile, MappingMode, UpdateKind};

/// Live bytes per node: the `W`-bit state plus carry and bookkeeping.
pub fn state_bytes_per_node(width: usize, overhead: usize) -> usize {
    width.div_ceil(8) + overhead
}

fn bank_of(id: u32, banks: usize) -> usize {
    (id.wrapping_mul(0x9E37_79B1) >> 16) as usize & (banks - 1)
}

/// PE cycles for one sweep of all nodes: one per `Feedback` update; a `Hop`
/// update also waits for its predecessors' SRAM reads, serialized per bank.
pub fn window_cycles(profile: &GraphProfile, h: &HbmParams) -> u64 {
    let mut load = vec![0u64; h.sram_banks];
    let mut total = 0u64;
    for (kind, preds) in profile.kinds.iter().zip(&profile.hop_preds) {
        total += 1;
        if *kind == UpdateKind::Hop && !preds.is_empty() {
            load.fill(0);
            for &u in preds {
                load[bank_of(u, h.sram_banks)] += 1;
            }
            total += h.bank_access_cycles as u64 * load.iter().max().copied().unwrap_or(0);
        }
    }
    total
}

/// Bytes of topology streamed per sweep: a 2-byte node record plus 4 bytes per
/// predecessor reference of `Hop` nodes.
fn topology_bytes(profile: &GraphProfile) -> u64 {
    2 * profile.nodes as u64 + 4 * profile.hop_pred_total() as u64
}

/// Models one batch trace. Compute and HBM streaming overlap, so wall time is
/// the larger of the two.
pub fn model_traversal(trace: &BatchTrace, h: &HbmParams, mode: MappingMode) -> Result<CostReport> {
    h.validate()?;
    if trace.mode != mode {
        return Err(Error::Validation(format!("trace recorded in {:?} mode, modeled as {mode:?}", trace.mode)));
    }
    if trace.pe_per_pu != h.pe_per_pu || trace.group_size != h.group_size {
        return Err(Error::Validation(format!(
            "trace has {} PEs in groups of {}, parameters have {} in groups of {}",
            trace.pe_per_pu, trace.group_size, h.pe_per_pu, h.group_size
        )));
    }
    let sweep = window_cycles(&trace.profile, h);
    let topo = topology_bytes(&trace.profile);
    let state = state_bytes_per_node(trace.width, h.state_overhead_bytes);
    let footprint = trace.profile.nodes * state;
    let excess = footprint.saturating_sub(h.shared_sram_bytes) as u64;
    let spilled_nodes = excess.div_ceil(state as u64);
    let latency_cycles = (h.access_latency_ns * h.pe_clock_ghz).ceil() as u64;
    let lanes = match mode {
        MappingMode::ShortParallel => h.group_size,
        MappingMode::LongPipeline => h.pe_per_pu,
    };

    let mut group_cycles = vec![0u64; trace.groups.max(1)];
    let (mut regular, mut irregular) = (0u64, 0u64);
    for r in &trace.reads {
        let k = r.windows_processed.max(1);
        let passes = k.div_ceil(lanes) as u64;
        let fill = (k.min(lanes) - 1) as u64;
        group_cycles[r.group] += passes * (sweep + spilled_nodes * latency_cycles) + fill;
        regular += passes * topo;
        irregular += k as u64 * 2 * excess;
    }
    let compute = group_cycles.iter().copied().max().unwrap_or(0);
    let compute_ns = compute as f64 / h.pe_clock_ghz;
    let reg_ns = regular as f64 / h.channel_gbps;
    let irr_ns = irregular as f64 / h.channel_gbps;
    let wall_ns = compute_ns.max(reg_ns + irr_ns);

    let phases = vec![
        PhaseCost { phase: "traversal_compute".into(), cycles: compute, ns: compute_ns, ..Default::default() },
        PhaseCost {
            phase: "topology_stream".into(),
            ns: reg_ns,
            pj: regular as f64 * 8.0 * h.read_energy_per_bit_pj,
            bytes_regular: regular,
            ..Default::default()
        },
        PhaseCost {
            phase: "state_spill".into(),
            ns: irr_ns,
            // Spilled state is written out and read back in equal halves.
            pj: irregular as f64 * 4.0 * (h.read_energy_per_bit_pj + h.write_energy_per_bit_pj),
            bytes_irregular: irregular,
            ..Default::default()
        },
    ];
    let mut r = CostReport::sequential(phases);
    r.wall_time = wall_ns * 1e-9;
    r.cycles = (wall_ns * h.pe_clock_ghz).ceil() as u64;
    if wall_ns > 0.0 {
        r.utilization.insert("pe".into(), compute_ns / wall_ns);
        r.utilization.insert("hbm".into(), (reg_ns + irr_ns) / wall_ns);
    }
    Ok(r)
}

pub fn reads_per_second(report: &CostReport, reads: usize) -> f64 {
    if report.wall_time > 0.0 {
        reads as f64 / report.wall_time
    } else {
        0.0
    }
}

/// A graph and a read batch, split by length class and run in the matching mode.
#[derive(Clone, Debug)]
pub struct Workload {
    pub graph: GenomeGraph,
    pub batch: ReadBatch,
    pub width: usize,
    pub threshold: usize,
}

impl Workload {
    pub fn new(graph: GenomeGraph, batch: ReadBatch) -> Self {
        let d = BatchConfig::default();
        Workload { graph, batch, width: d.width, threshold: d.threshold }
    }

    /// 1024 short (100 bp) and 8 long (3 kbp) reads on a 5 kbp bubble genome
    /// whose node states fit in 128 KB.
    pub fn mixed(seed: u64) -> Result<Self> {
        let g = standard_genome(seed)?;
        let mut reads = gen_reads(&g, 1024, 100, 0.01, seed.wrapping_add(1))?.reads;
        let long = gen_reads(&g, 8, 3000, 0.01, seed.wrapping_add(2))?.reads;
        reads.extend(long.into_iter().map(|r| Read { id: format!("long{}", r.id), ..r }));
        Ok(Workload::new(g, ReadBatch::new(reads, DEFAULT_SHORT_THRESHOLD)))
    }

    /// 32 error-free 3 kbp reads on the same genome.
    pub fn long_reads(seed: u64) -> Result<Self> {
        let g = standard_genome(seed)?;
        let batch = gen_reads(&g, 32, 3000, 0.0, seed.wrapping_add(3))?;
        Ok(Workload::new(g, batch))
    }

    /// One trace per non-empty length class, aligned under `h`'s PE layout.
    pub fn traces(&self, h: &HbmParams) -> Result<Vec<BatchTrace>> {
        let cfg = BatchConfig {
            width: self.width,
            threshold: self.threshold,
            pe_per_pu: h.pe_per_pu,
            group_size: h.group_size,
            ..Default::default()
        };
        let (short, long) = self.batch.split_by_class(self.threshold);
        let mut out = Vec::new();
        for (b, mode) in [(short, MappingMode::ShortParallel), (long, MappingMode::LongPipeline)] {
            if let Some(b) = b {
                out.push(batch_align(&self.graph, &b, mode, &cfg)?.trace);
            }
        }
        Ok(out)
    }
}

fn standard_genome(seed: u64) -> Result<GenomeGraph> {
    gen_genome(5000, 0.02, seed)?.0.to_genome_graph()
}

fn model_all(traces: &[BatchTrace], h: &HbmParams) -> Result<CostReport> {
    let mut total = CostReport::default();
    for t in traces {
        let t = t.regrouped(h.pe_per_pu, h.group_size)?;
        total = total.then(model_traversal(&t, h, t.mode)?);
    }
    Ok(total)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PePoint {
    pub pes: usize,
    pub throughput: f64,
    pub bandwidth_utilization: f64,
}

/// Throughput against PEs per channel; short and long classes run back to back.
pub fn sweep_pe_density(w: &Workload, counts: &[usize], h: &HbmParams) -> Result<Vec<PePoint>> {
    if counts.is_empty() {
        return Err(Error::Argument("PE counts must be non-empty".into()));
    }
    let traces = w.traces(h)?;
    counts
        .iter()
        .map(|&pes| {
            let hp = HbmParams { pe_per_pu: pes, ..*h };
            let r = model_all(&traces, &hp)?;
            let bw = if r.wall_time > 0.0 { r.hbm_bytes() as f64 / (r.wall_time * 1e9 * hp.channel_gbps) } else { 0.0 };
            Ok(PePoint { pes, throughput: reads_per_second(&r, w.batch.len()), bandwidth_utilization: bw })
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SramPoint {
    pub bytes: usize,
    pub regular: u64,
    pub irregular: u64,
    pub throughput: f64,
}

/// Traffic split and throughput against shared SRAM capacity.
pub fn sweep_sram(w: &Workload, capacities: &[usize], h: &HbmParams) -> Result<Vec<SramPoint>> {
    if capacities.is_empty() {
        return Err(Error::Argument("capacities must be non-empty".into()));
    }
    let traces = w.traces(h)?;
    capacities
        .iter()
        .map(|&bytes| {
            let hp = HbmParams { shared_sram_bytes: bytes, ..*h };
            let r = model_all(&traces, &hp)?;
            Ok(SramPoint {
                bytes,
                regular: r.hbm_bytes_regular,
                irregular: r.hbm_bytes_irregular,
                throughput: reads_per_second(&r, w.batch.len()),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain(n: usize) -> GenomeGraph {
        let s: String = (0..n).map(|i| ['A', 'C', 'G', 'T'][(i * 3 + i / 7) % 4]).collect();
        GenomeGraph::chain(&s).unwrap()
    }

    fn one_pe() -> HbmParams {
        HbmParams { pe_per_pu: 1, group_size: 1, ..Default::default() }
    }

    #[test]
    fn all_feedback_chain_is_one_cycle_per_update() {
        let g = chain(500);
        let q: Vec<u8> = (0..300).map(|i| b"ACGT"[(i * 3 + i / 7) % 4]).collect();
        let batch = ReadBatch::new(vec![Read::new("r", q)], DEFAULT_SHORT_THRESHOLD);
        let cfg = BatchConfig { pe_per_pu: 1, group_size: 1, ..Default::default() };
        let t = batch_align(&g, &batch, MappingMode::LongPipeline, &cfg).unwrap().trace;
        let r = model_traversal(&t, &one_pe(), MappingMode::LongPipeline).unwrap();
        let k = t.reads[0].windows_processed as u64;
        assert_eq!(k, 3);
        assert_eq!(r.phase("traversal_compute").unwrap().cycles, 500 * k);
        assert_eq!(r.hbm_bytes_irregular, 0);
    }

    #[test]
    fn mode_mismatch_is_rejected() {
        let g = chain(20);
        let batch = ReadBatch::new(vec![Read::new("r", "ACG")], DEFAULT_SHORT_THRESHOLD);
        let t = batch_align(&g, &batch, MappingMode::ShortParallel, &BatchConfig::default()).unwrap().trace;
        assert!(matches!(model_traversal(&t, &HbmParams::default(), MappingMode::LongPipeline), Err(Error::Validation(_))));
        let other = HbmParams { pe_per_pu: 32, ..Default::default() };
        assert!(matches!(model_traversal(&t, &other, MappingMode::ShortParallel), Err(Error::Validation(_))));
    }

    #[test]
    fn design_point_fills_sram_exactly() {
        assert_eq!(16_384 * state_bytes_per_node(128, 0), 262_144);
        let g = chain(16_384);
        let batch = ReadBatch::new(vec![Read::new("r", "ACGA")], DEFAULT_SHORT_THRESHOLD);
        let t = batch_align(&g, &batch, MappingMode::ShortParallel, &BatchConfig::default()).unwrap().trace;
        let bare = HbmParams { state_overhead_bytes: 0, ..Default::default() };
        assert_eq!(model_traversal(&t, &bare, MappingMode::ShortParallel).unwrap().hbm_bytes_irregular, 0);
        let full = model_traversal(&t, &HbmParams::default(), MappingMode::ShortParallel).unwrap();
        assert!(full.hbm_bytes_irregular > 0);
    }

    #[test]
    fn bank_conflicts_serialize() {
        // Node 32 has 32 predecessors; with one bank all reads serialize.
        let mut preds: Vec<Vec<u32>> = vec![vec![]; 33];
        preds[32] = (0..32).collect();
        let g = GenomeGraph::new(vec![crate::graph::Base::A; 33], preds).unwrap();
        let p = GraphProfile::of(&g);
        let one_bank = HbmParams { sram_banks: 1, ..Default::default() };
        assert_eq!(window_cycles(&p, &one_bank), 33 + 32);
        assert!(window_cycles(&p, &HbmParams::default()) < 33 + 32);
    }
}
