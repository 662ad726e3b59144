use anyhow::Result;
use graphdp::apsp::{floyd_warshall_dense, recursive_apsp, ApspOptions, DistanceBlock};
use graphdp::graph::{gen_clustered, gen_er, gen_genome, gen_nws, gen_reads, ClusteredParams, WeightedGraph, DEFAULT_W_MAX};
use graphdp::partition::LevelKind;
use graphdp::s2g::{align_reference, align_windowed, CarryMode};

use crate::{Ctx, Suite, VerifyArgs, VerifyFailure};

const TILES: [usize; 3] = [16, 32, 64];
const WIDTHS: [usize; 5] = [8, 32, 64, 128, 256];

/// Small graph `i` of a suite; cycles through the three families.
fn graph(i: usize, seed: u64) -> Result<WeightedGraph> {
    let n = 40 + (i * 37) % 220;
    let s = seed.wrapping_add(i as u64);
    Ok(match i % 3 {
        0 => gen_er(n, 3.0 / n as f64, s, DEFAULT_W_MAX)?,
        1 => gen_nws(n, 4, 0.05, s, DEFAULT_W_MAX)?,
        _ => gen_clustered(n, ClusteredParams { groups: 3, subgroups: 2, p_in: 0.3, p_mid: 0.03, p_out: 0.005 }, s, DEFAULT_W_MAX)?,
    })
}

fn apsp_case(i: usize, seed: u64) -> Result<Option<String>> {
    let g = graph(i, seed)?;
    let tile = TILES[i % TILES.len()];
    let r = recursive_apsp(&g, tile, &ApspOptions::new(tile).with_seed(seed))?;
    let want = floyd_warshall_dense(&DistanceBlock::from_graph(&g))?;
    let got = r.dense().expect("small graphs are assembled densely");
    let n = g.n();
    Ok((0..n * n).find(|&k| got.data()[k] != want.data()[k]).map(|k| {
        format!("apsp case {i} (n={n}, tile={tile}): d({}, {}) = {} expected {}", k / n, k % n, got.data()[k], want.data()[k])
    }))
}

fn boundary_case(i: usize, seed: u64) -> Result<Option<String>> {
    let g = graph(i, seed)?;
    let tile = TILES[i % TILES.len()];
    let r = recursive_apsp(&g, tile, &ApspOptions::new(tile).with_seed(seed))?;
    let full = floyd_warshall_dense(&DistanceBlock::from_graph(&g))?;
    let h = &r.hierarchy;
    for l in 0..h.depth() - 1 {
        if h.levels[l].kind != LevelKind::Partitioned {
            continue;
        }
        let up = &h.levels[l + 1];
        let closed = floyd_warshall_dense(&DistanceBlock::from_graph(&up.graph))?;
        for a in 0..up.n() {
            for b in 0..up.n() {
                let (u, v) = (up.to_base[a] as usize, up.to_base[b] as usize);
                if closed.get(a, b) != full.get(u, v) {
                    return Ok(Some(format!(
                        "boundary case {i}: level {} distance {u}->{v} is {} but the input graph gives {}",
                        l + 1,
                        closed.get(a, b),
                        full.get(u, v)
                    )));
                }
            }
        }
    }
    Ok(None)
}

fn s2g_case(i: usize, seed: u64) -> Result<Option<String>> {
    let s = seed.wrapping_add(i as u64);
    let (gfa, _) = gen_genome(300 + (i * 53) % 700, 0.05, s)?;
    let g = gfa.to_genome_graph()?;
    let len = 20 + (i * 29) % 260;
    let reads = gen_reads(&g, 4, len.min(g.longest_path_len()), 0.02, s)?;
    for r in &reads.reads {
        let want = align_reference(&g, &r.seq)?;
        for w in WIDTHS {
            let got = align_windowed(&g, &r.seq, w, CarryMode::PredCarry)?;
            if (got.score_max, &got.end_nodes) != (want.score_max, &want.end_nodes) {
                return Ok(Some(format!(
                    "s2g case {i}, read {} at width {w}: score {} ends {:?}, reference {} ends {:?}",
                    r.id, got.score_max, got.end_nodes, want.score_max, want.end_nodes
                )));
            }
        }
    }
    Ok(None)
}

type Case = fn(usize, u64) -> Result<Option<String>>;

pub fn run(ctx: &Ctx, v: VerifyArgs) -> Result<()> {
    let suites: Vec<(&str, Case)> = match v.suite {
        Suite::Apsp => vec![("apsp", apsp_case)],
        Suite::S2g => vec![("s2g", s2g_case)],
        Suite::Boundary => vec![("boundary", boundary_case)],
        Suite::All => vec![("apsp", apsp_case), ("s2g", s2g_case), ("boundary", boundary_case)],
    };
    let mut failures = Vec::new();
    for (name, case) in suites {
        let mut first = None;
        for i in 0..v.cases {
            if let Some(msg) = case(i, ctx.seed)? {
                first = Some(msg);
                break;
            }
        }
        match first {
            None => println!("PASS {name} ({} cases)", v.cases),
            Some(msg) => {
                println!("FAIL {name}: {msg}");
                failures.push(msg);
            }
        }
    }
    ctx.write_config("verify", &v)?;
    if failures.is_empty() {
        Ok(())
    } else {
        Err(VerifyFailure(failures.join("; ")).into())
    }
}
