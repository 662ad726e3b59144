use std::fmt::Write as _;

use anyhow::{bail, Context, Result};
use graphdp::cost::{
    arithmetic_intensity, sweep_pe_density, sweep_sram, sweep_tile_size, Convention, Kernel, Workload,
};
use graphdp::graph::io::load_edge_list;
use graphdp::graph::{gen_nws, DEFAULT_W_MAX};

use crate::{Ctx, SweepCmd};

/// Parses `32K`, `1M`, `4096`.
fn parse_bytes(s: &str) -> Result<usize> {
    let s = s.trim();
    let (num, mult) = match s.chars().last() {
        Some('K' | 'k') => (&s[..s.len() - 1], 1024),
        Some('M' | 'm') => (&s[..s.len() - 1], 1024 * 1024),
        _ => (s, 1),
    };
    let v: usize = num.parse().with_context(|| format!("bad size `{s}`"))?;
    Ok(v * mult)
}

/// `a..b` doubles from `a` up to `b`; otherwise a comma list.
pub fn parse_caps(text: &str) -> Result<Vec<usize>> {
    if let Some((lo, hi)) = text.split_once("..") {
        let (mut c, hi) = (parse_bytes(lo)?, parse_bytes(hi)?);
        if c == 0 || c > hi {
            bail!("bad capacity range `{text}`");
        }
        let mut out = Vec::new();
        while c <= hi {
            out.push(c);
            c *= 2;
        }
        Ok(out)
    } else {
        text.split(',').map(parse_bytes).collect()
    }
}

pub fn run(ctx: &Ctx, cmd: SweepCmd) -> Result<()> {
    let (name, csv) = match &cmd {
        SweepCmd::Tilesize { graph, ns, n, k, p, overhead_share } => {
            let (g, source) = match graph {
                Some(path) => (load_edge_list(path)?, format!("graph={}", path.display())),
                None => (
                    gen_nws(*n, *k, *p, ctx.seed, DEFAULT_W_MAX)?,
                    format!("graph=nws n={n} k={k} p={p} seed={} w_max={DEFAULT_W_MAX}", ctx.seed),
                ),
            };
            let pcm = ctx.device.pcm.unwrap_or_default();
            let pts = sweep_tile_size(&g, ns, &pcm, *overhead_share, ctx.seed)?;
            let mut s = String::new();
            writeln!(s, "# tile-size sweep, normalized to N=1024")?;
            writeln!(s, "# {source} vertices={} arcs={} overhead_share={overhead_share}", g.n(), g.edge_count())?;
            writeln!(s, "N,latency,energy,overhead_ops,levels,components")?;
            for t in &pts {
                writeln!(s, "{},{:.6},{:.6},{},{},{}", t.n, t.latency, t.energy, t.overhead_ops, t.levels, t.components)?;
            }
            ("tilesize.csv", s)
        }
        SweepCmd::Pe { counts } => {
            let h = ctx.device.hbm.unwrap_or_default();
            let w = Workload::mixed(ctx.seed)?;
            let pts = sweep_pe_density(&w, counts, &h)?;
            let mut s = String::new();
            writeln!(s, "# PE-density sweep, mixed workload seed={}", ctx.seed)?;
            writeln!(s, "# nodes={} reads={} width={}", w.graph.len(), w.batch.len(), w.width)?;
            writeln!(s, "pes,reads_per_second,bandwidth_utilization")?;
            for p in &pts {
                writeln!(s, "{},{:.3},{:.6}", p.pes, p.throughput, p.bandwidth_utilization)?;
            }
            ("pe.csv", s)
        }
        SweepCmd::Sram { caps } => {
            let h = ctx.device.hbm.unwrap_or_default();
            let w = Workload::long_reads(ctx.seed)?;
            let pts = sweep_sram(&w, &parse_caps(caps)?, &h)?;
            let mut s = String::new();
            writeln!(s, "# shared-SRAM sweep, long-read workload seed={}", ctx.seed)?;
            writeln!(s, "# nodes={} reads={} width={}", w.graph.len(), w.batch.len(), w.width)?;
            writeln!(s, "bytes,regular_bytes,irregular_bytes,reads_per_second")?;
            for p in &pts {
                writeln!(s, "{},{},{},{:.3}", p.bytes, p.regular, p.irregular, p.throughput)?;
            }
            ("sram.csv", s)
        }
        SweepCmd::Roofline { n, width } => {
            let mut s = String::new();
            writeln!(s, "# arithmetic intensity (ops per byte), 4-byte words")?;
            writeln!(s, "kernel,n,convention,ops,bytes,ops_per_byte")?;
            let rows = [
                (Kernel::FwClassic, *n, Convention::ThreeRead),
                (Kernel::FwClassic, *n, Convention::ThreeReadOneWrite),
                (Kernel::FwPartitioned, *n, Convention::LoadOnly),
                (Kernel::FwPartitioned, *n, Convention::LoadStore),
                (Kernel::S2g, *width, Convention::StateTraffic),
            ];
            for (k, n, c) in rows {
                let a = arithmetic_intensity(k, n, c)?;
                writeln!(s, "{k:?},{n},{c:?},{},{},{:.6}", a.ops, a.bytes, a.ops_per_byte)?;
            }
            ("roofline.csv", s)
        }
    };
    ctx.write(name, &csv)?;
    print!("{csv}");
    ctx.write_config("sweep", &cmd)
}
