//! Cycle, energy and traffic models of the matrix tile (in-array FW and
//! min-plus reduction) and the traversal tile (PE groups, banked SRAM, HBM).

mod matrix;
mod roofline;
mod traversal;

pub use matrix::{
    model_fw_block, model_mp_merge, model_recursive_apsp, overhead_ops, sweep_tile_size, TilePoint,
    DEFAULT_OVERHEAD_SHARE, MP_CYCLES_PER_ROW, REFERENCE_DIM,
};
pub use roofline::{arithmetic_intensity, Convention, Intensity, Kernel};
pub use traversal::{
    model_traversal, reads_per_second, state_bytes_per_node, sweep_pe_density, sweep_sram, window_cycles, PePoint,
    SramPoint, Workload,
};

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Matrix-tile device parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PcmParams {
    pub read_energy_per_bit_pj: f64,
    pub write_energy_per_bit_pj: f64,
    pub read_latency_ns: f64,
    pub write_latency_ns: f64,
    pub clock_mhz: f64,
    pub unit_dim: usize,
    pub units_per_tile: usize,
    pub tiles_per_die: usize,
    pub bits: usize,
    pub add_cycles_per_bit: usize,
    pub sub_cycles_per_bit: usize,
    pub freq_derate_alpha: f64,
    /// Row-permutation DMA overlapped with compute in 32-row bursts; when
    /// false every row pays the full read + write cost.
    pub overlap: bool,
    /// Aggregate HBM bandwidth for inter-level block staging.
    pub hbm_gbps: f64,
    pub hbm_energy_per_bit_pj: f64,
    /// Cold-tier bandwidth for exporting the dense result.
    pub cold_gbps: f64,
}

impl Default for PcmParams {
    fn default() -> Self {
        PcmParams {
            read_energy_per_bit_pj: 0.05,
            write_energy_per_bit_pj: 0.56,
            read_latency_ns: 2.0,
            write_latency_ns: 20.0,
            clock_mhz: 500.0,
            unit_dim: 1024,
            units_per_tile: 130,
            tiles_per_die: 128,
            bits: 32,
            add_cycles_per_bit: 2,
            sub_cycles_per_bit: 2,
            freq_derate_alpha: 1.3,
            overlap: true,
            hbm_gbps: 819.2,
            hbm_energy_per_bit_pj: 0.4,
            cold_gbps: 8.0,
        }
    }
}

impl PcmParams {
    pub fn validate(&self) -> Result<()> {
        let reals = [
            self.read_energy_per_bit_pj,
            self.write_energy_per_bit_pj,
            self.read_latency_ns,
            self.write_latency_ns,
            self.clock_mhz,
            self.freq_derate_alpha,
            self.hbm_gbps,
            self.hbm_energy_per_bit_pj,
            self.cold_gbps,
        ];
        let ints = [self.unit_dim, self.units_per_tile, self.tiles_per_die, self.bits, self.add_cycles_per_bit, self.sub_cycles_per_bit];
        if reals.iter().any(|&x| !(x > 0.0 && x.is_finite())) || ints.contains(&0) {
            return Err(Error::Argument("device parameters must be strictly positive".into()));
        }
        if !self.unit_dim.is_power_of_two() {
            return Err(Error::Argument(format!("unit_dim = {} is not a power of two", self.unit_dim)));
        }
        Ok(())
    }

    pub fn units(&self) -> usize {
        self.units_per_tile * self.tiles_per_die
    }

    /// Effective clock in GHz at array dimension `dim`.
    pub fn clock_ghz(&self, dim: usize) -> f64 {
        self.clock_mhz / 1000.0 * derate(dim, self.freq_derate_alpha)
    }
}

/// Frequency factor `(dim / 1024)^-alpha` above the reference dimension, 1 below.
pub fn derate(dim: usize, alpha: f64) -> f64 {
    if dim > REFERENCE_DIM {
        (dim as f64 / REFERENCE_DIM as f64).powf(-alpha)
    } else {
        1.0
    }
}

/// Traversal-tile device parameters (one HBM channel and its processing unit).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HbmParams {
    pub channels: usize,
    pub banks_per_channel: usize,
    pub read_energy_per_bit_pj: f64,
    pub write_energy_per_bit_pj: f64,
    pub access_latency_min_ns: f64,
    pub access_latency_max_ns: f64,
    pub access_latency_ns: f64,
    /// Per-channel bandwidth.
    pub channel_gbps: f64,
    pub pe_per_pu: usize,
    /// PEs per independent group in short mode.
    pub group_size: usize,
    pub shared_sram_bytes: usize,
    pub sram_banks: usize,
    pub bank_access_cycles: usize,
    pub pe_clock_ghz: f64,
    pub srf_bits: usize,
    pub pattern_buffer_bytes: usize,
    pub tbm_bytes: usize,
    pub bplu_width: usize,
    /// Per-node bytes beyond the `W / 8` state: one carry byte and four of bookkeeping.
    pub state_overhead_bytes: usize,
}

impl Default for HbmParams {
    fn default() -> Self {
        HbmParams {
            channels: 16,
            banks_per_channel: 32,
            read_energy_per_bit_pj: 0.4,
            write_energy_per_bit_pj: 0.45,
            access_latency_min_ns: 10.0,
            access_latency_max_ns: 20.0,
            access_latency_ns: 15.0,
            channel_gbps: 51.2,
            pe_per_pu: 64,
            group_size: 4,
            shared_sram_bytes: 262_144,
            sram_banks: 32,
            bank_access_cycles: 1,
            pe_clock_ghz: 1.0,
            srf_bits: 384,
            pattern_buffer_bytes: 256,
            tbm_bytes: 4096,
            bplu_width: 128,
            state_overhead_bytes: 5,
        }
    }
}

impl HbmParams {
    pub fn validate(&self) -> Result<()> {
        let reals = [
            self.read_energy_per_bit_pj,
            self.write_energy_per_bit_pj,
            self.access_latency_min_ns,
            self.access_latency_max_ns,
            self.access_latency_ns,
            self.channel_gbps,
            self.pe_clock_ghz,
        ];
        let ints = [
            self.channels,
            self.banks_per_channel,
            self.pe_per_pu,
            self.group_size,
            self.shared_sram_bytes,
            self.sram_banks,
            self.bank_access_cycles,
            self.bplu_width,
        ];
        if reals.iter().any(|&x| !(x > 0.0 && x.is_finite())) || ints.contains(&0) {
            return Err(Error::Argument("device parameters must be strictly positive".into()));
        }
        if !self.pe_per_pu.is_multiple_of(self.group_size) {
            return Err(Error::Argument(format!(
                "pe_per_pu = {} is not divisible by group_size = {}",
                self.pe_per_pu, self.group_size
            )));
        }
        if !self.sram_banks.is_power_of_two() {
            return Err(Error::Argument(format!("sram_banks = {} is not a power of two", self.sram_banks)));
        }
        if !(self.access_latency_min_ns..=self.access_latency_max_ns).contains(&self.access_latency_ns) {
            return Err(Error::Argument("access latency outside its min/max range".into()));
        }
        Ok(())
    }
}

/// One row of the flat report.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PhaseCost {
    pub phase: String,
    pub cycles: u64,
    pub ns: f64,
    pub pj: f64,
    pub bytes_regular: u64,
    pub bytes_irregular: u64,
    pub writes: u64,
}

impl PhaseCost {
    pub fn named(phase: &str) -> Self {
        PhaseCost { phase: phase.into(), ..Default::default() }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    pub cycles: u64,
    /// Seconds.
    pub wall_time: f64,
    /// Joules.
    pub energy: f64,
    pub hbm_bytes_regular: u64,
    pub hbm_bytes_irregular: u64,
    pub pcm_writes: u64,
    pub utilization: BTreeMap<String, f64>,
    pub phases: Vec<PhaseCost>,
}

impl CostReport {
    /// A report whose totals are the sums over `phases` (executed back to back).
    pub fn sequential(phases: Vec<PhaseCost>) -> Self {
        let mut r = CostReport::default();
        for p in &phases {
            r.cycles += p.cycles;
            r.wall_time += p.ns * 1e-9;
            r.energy += p.pj * 1e-12;
            r.hbm_bytes_regular += p.bytes_regular;
            r.hbm_bytes_irregular += p.bytes_irregular;
            r.pcm_writes += p.writes;
        }
        r.phases = phases;
        r
    }

    /// Back-to-back composition; utilization keys are time-weighted.
    pub fn then(mut self, other: CostReport) -> CostReport {
        let (t0, t1) = (self.wall_time, other.wall_time);
        let mut util = BTreeMap::new();
        for k in self.utilization.keys().chain(other.utilization.keys()) {
            let a = self.utilization.get(k).copied().unwrap_or(0.0) * t0;
            let b = other.utilization.get(k).copied().unwrap_or(0.0) * t1;
            let t = t0 + t1;
            util.insert(k.clone(), if t > 0.0 { (a + b) / t } else { 0.0 });
        }
        self.cycles += other.cycles;
        self.wall_time += t1;
        self.energy += other.energy;
        self.hbm_bytes_regular += other.hbm_bytes_regular;
        self.hbm_bytes_irregular += other.hbm_bytes_irregular;
        self.pcm_writes += other.pcm_writes;
        self.utilization = util;
        self.phases.extend(other.phases);
        self
    }

    pub fn hbm_bytes(&self) -> u64 {
        self.hbm_bytes_regular + self.hbm_bytes_irregular
    }

    pub fn phase(&self, name: &str) -> Option<&PhaseCost> {
        self.phases.iter().find(|p| p.phase == name)
    }

    pub fn write_csv<Wr: Write>(&self, mut w: Wr) -> Result<()> {
        writeln!(w, "phase,cycles,ns,pJ,bytes_regular,bytes_irregular,writes")?;
        for p in &self.phases {
            writeln!(
                w,
                "{},{},{:.3},{:.3},{},{},{}",
                p.phase, p.cycles, p.ns, p.pj, p.bytes_regular, p.bytes_irregular, p.writes
            )?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}
