use std::fs::File;
use std::io::BufWriter;

use anyhow::{bail, Context, Result};
use graphdp::apsp::{floyd_warshall_dense, recursive_apsp, write_matrix_binary, write_matrix_tsv, DistanceBlock, TSV_LIMIT};
use graphdp::cost::{model_recursive_apsp, CostReport};
use graphdp::graph::io::{load_edge_list, load_genome_graph, load_reads, write_edge_list, write_fasta};
use graphdp::graph::{gen_er, gen_genome, gen_nws, gen_reads};
use graphdp::planner::{execute, lower_apsp, lower_s2g, LoadedWorkload, Outputs, StageKind, WorkloadDescriptor};
use graphdp::s2g::{align_reference, write_results_tsv, BatchConfig, MappingMode, ReadResult};
use graphdp::apsp::ApspOptions;
use serde::Serialize;

use crate::{ApspArgs, Ctx, GenCmd, ModeArg, PlanArgs, S2gArgs, VerifyFailure};

pub fn gen(ctx: &Ctx, cmd: GenCmd) -> Result<()> {
    match &cmd {
        GenCmd::Er { n, p, w_max } => {
            let g = gen_er(*n, *p, ctx.seed, *w_max)?;
            ctx.write("er.tsv", write_edge_list(&g))?;
            println!("er: n={} |E|={} seed={}", g.n(), g.edge_count(), ctx.seed);
        }
        GenCmd::Nws { n, k, p, w_max } => {
            let g = gen_nws(*n, *k, *p, ctx.seed, *w_max)?;
            ctx.write("nws.tsv", write_edge_list(&g))?;
            println!("nws: n={} |E|={} seed={}", g.n(), g.edge_count(), ctx.seed);
        }
        GenCmd::Genome { bases, bubble_rate } => {
            let (gfa, reference) = gen_genome(*bases, *bubble_rate, ctx.seed)?;
            let g = gfa.to_genome_graph()?;
            ctx.write("genome.gfa", gfa.write())?;
            ctx.write("reference.fa", write_fasta([("reference", reference.as_bytes())]))?;
            println!("genome: n={} |E|={} seed={}", g.len(), g.edge_count(), ctx.seed);
        }
        GenCmd::Reads { graph, count, len, sub_rate } => {
            let g = load_genome_graph(graph)?;
            let batch = gen_reads(&g, *count, *len, *sub_rate, ctx.seed)?;
            ctx.write("reads.fa", write_fasta(batch.reads.iter().map(|r| (r.id.as_str(), r.seq.as_slice()))))?;
            println!("reads: count={} len={} seed={}", batch.len(), len, ctx.seed);
        }
    }
    ctx.write_config("gen", &cmd)
}

fn write_report(ctx: &Ctx, report: &CostReport) -> Result<()> {
    let mut csv = Vec::new();
    report.write_csv(&mut csv)?;
    ctx.write("cost.csv", csv)?;
    ctx.write("cost.json", report.to_json()? + "\n")?;
    println!("model: {:.6e} s, {:.6e} J, {} cycles", report.wall_time, report.energy, report.cycles);
    Ok(())
}

fn first_mismatch(got: &DistanceBlock<u32>, want: &DistanceBlock<u32>) -> Option<(usize, usize)> {
    let n = want.dim();
    (0..n * n).find(|&k| got.data()[k] != want.data()[k]).map(|k| (k / n, k % n))
}

pub fn apsp(ctx: &Ctx, a: ApspArgs) -> Result<()> {
    let g = load_edge_list(&a.graph).with_context(|| format!("loading {}", a.graph.display()))?;
    let opts = ApspOptions::new(a.max_tile).with_seed(ctx.seed);
    let r = recursive_apsp(&g, a.max_tile, &opts)?;
    let n = r.n();
    println!("apsp: n={} |E|={} levels={} merges={}", n, g.edge_count(), r.hierarchy.depth(), r.trace.merge_count());

    let d = match r.dense() {
        Some(d) => d.clone(),
        None => {
            // Lazy results are only materialised on request; this dumps them row by row.
            let mut data = Vec::with_capacity(n * n);
            for u in 0..n as u32 {
                for v in 0..n as u32 {
                    data.push(r.distance(u, v)?);
                }
            }
            DistanceBlock::new((0..n as u32).collect(), data)?
        }
    };
    if n <= TSV_LIMIT {
        write_matrix_tsv(&d, BufWriter::new(File::create(ctx.path("distances.tsv"))?))?;
    } else {
        write_matrix_binary(&d, BufWriter::new(File::create(ctx.path("distances.bin"))?))?;
    }

    if a.verify {
        if n > opts.dense_limit {
            bail!("--verify needs n <= {}, got {n}", opts.dense_limit);
        }
        let want = floyd_warshall_dense(&DistanceBlock::from_graph(&g))?;
        if let Some((i, j)) = first_mismatch(&d, &want) {
            return Err(VerifyFailure(format!(
                "d({i}, {j}) = {} but dense FW gives {}",
                d.get(i, j),
                want.get(i, j)
            ))
            .into());
        }
        println!("verify: PASS ({n} x {n} matches dense FW)");
    }
    if a.model {
        let pcm = ctx.device.pcm.unwrap_or_default();
        write_report(ctx, &model_recursive_apsp(&r.trace, &pcm)?)?;
    }
    let plan = lower_apsp(&r.hierarchy, &opts);
    ctx.write("plan.json", plan.to_json()? + "\n")?;
    ctx.write_config("apsp", &a)
}

#[derive(Serialize)]
struct WidthCheck {
    width: usize,
    windows_processed: usize,
}

pub fn s2g(ctx: &Ctx, a: S2gArgs) -> Result<()> {
    if a.widths.is_empty() {
        bail!("at least one width is required");
    }
    let graph = load_genome_graph(&a.graph).with_context(|| format!("loading {}", a.graph.display()))?;
    let reads = load_reads(&a.reads).with_context(|| format!("loading {}", a.reads.display()))?;
    let hbm = ctx.device.hbm.unwrap_or_default();
    let base = BatchConfig {
        pe_per_pu: hbm.pe_per_pu,
        group_size: hbm.group_size,
        record_trace: a.traceback,
        ..BatchConfig::default()
    };
    let mut plan = lower_s2g(&reads, base.threshold);
    let forced = match a.mode {
        ModeArg::Auto => None,
        ModeArg::Short => Some(MappingMode::ShortParallel),
        ModeArg::Long => Some(MappingMode::LongPipeline),
    };
    if let Some(m) = forced {
        for s in plan.stages.iter_mut().filter(|s| s.kind == StageKind::AlignBatch) {
            s.mapping = Some(m);
        }
    }

    let mut first: Option<(Vec<ReadResult>, Option<CostReport>)> = None;
    let mut checks = Vec::new();
    for &width in &a.widths {
        let config = BatchConfig { width, ..base };
        config.validate()?;
        let w = LoadedWorkload::S2g { graph: graph.clone(), reads: reads.clone(), config, hbm };
        let ex = execute(&plan, &w, a.model).with_context(|| format!("aligning at width {width}"))?;
        let Outputs::S2g(results) = ex.outputs else { unreachable!("s2g plan yields s2g outputs") };
        checks.push(WidthCheck { width, windows_processed: results.iter().map(|r| r.result.stats.windows_processed).sum() });
        match &first {
            None => first = Some((results, ex.report)),
            Some((base_results, _)) => {
                for (x, y) in base_results.iter().zip(&results) {
                    if (x.result.score_max, &x.result.end_nodes) != (y.result.score_max, &y.result.end_nodes) {
                        return Err(VerifyFailure(format!(
                            "read {} scores {} at width {} but {} at width {width}",
                            x.id, x.result.score_max, a.widths[0], y.result.score_max
                        ))
                        .into());
                    }
                }
            }
        }
    }
    let (results, report) = first.expect("at least one width ran");

    let mut tsv = Vec::new();
    write_results_tsv(&mut tsv, &results)?;
    ctx.write("scores.tsv", tsv)?;
    ctx.write("plan.json", plan.to_json()? + "\n")?;
    println!("s2g: reads={} nodes={} widths={:?}", results.len(), graph.len(), a.widths);

    if a.verify {
        let by_id: std::collections::HashMap<&str, &[u8]> = reads.reads.iter().map(|r| (r.id.as_str(), r.seq.as_slice())).collect();
        for r in &results {
            let want = align_reference(&graph, by_id[r.id.as_str()])?;
            if (want.score_max, &want.end_nodes) != (r.result.score_max, &r.result.end_nodes) {
                return Err(VerifyFailure(format!(
                    "read {}: windowed score {} ends {:?}, reference score {} ends {:?}",
                    r.id, r.result.score_max, r.result.end_nodes, want.score_max, want.end_nodes
                ))
                .into());
            }
        }
        println!("verify: PASS ({} reads match the reference DP)", results.len());
    }
    if let Some(report) = &report {
        write_report(ctx, report)?;
    }
    #[derive(Serialize)]
    struct Cfg<'a> {
        #[serde(flatten)]
        args: &'a S2gArgs,
        config: BatchConfig,
        per_width: Vec<WidthCheck>,
    }
    ctx.write_config("s2g", &Cfg { args: &a, config: base, per_width: checks })
}

pub fn plan(ctx: &Ctx, p: PlanArgs) -> Result<()> {
    let mut desc = WorkloadDescriptor::load_file(&p.descriptor)?;
    // Command-line device overrides apply where the descriptor leaves a gap.
    if desc.device.pcm.is_none() {
        desc.device.pcm = ctx.device.pcm;
    }
    if desc.device.hbm.is_none() {
        desc.device.hbm = ctx.device.hbm;
    }
    let plan = graphdp::planner::lower(&desc)?;
    ctx.write("plan.json", plan.to_json()? + "\n")?;
    for kind in [
        StageKind::PartitionBuild,
        StageKind::FwClose,
        StageKind::BoundaryFw,
        StageKind::Inject,
        StageKind::Merge,
        StageKind::MaskBuild,
        StageKind::AlignBatch,
    ] {
        let c = plan.count(kind);
        if c > 0 {
            println!("{kind:?}: {c}");
        }
    }
    println!("stages: {}", plan.stages.len());
    ctx.write_config("plan", &desc)
}
