mod common;

use common::{oracle_align, random_dag, random_query};
use graphdp::graph::{gen_genome, gen_reads, GenomeGraph};
use graphdp::s2g::{align_reference, align_windowed, align_windowed_with, batch_align, reconstruct_path, AlignOptions, BatchConfig, CarryMode, MappingMode};
use proptest::prelude::*;

const WIDTHS: [usize; 5] = [8, 32, 64, 128, 256];

fn check_path(g: &GenomeGraph, q: &[u8], score: usize, ends: &[u32], path: &[u32]) {
    assert_eq!(path.len(), score);
    assert!(ends.contains(path.last().unwrap()));
    for (i, &v) in path.iter().enumerate() {
        assert_eq!(g.base(v as usize).to_char() as u8, q[i].to_ascii_uppercase());
        if i > 0 {
            assert!(g.preds(v as usize).contains(&path[i - 1]), "{} -> {v} is not an edge", path[i - 1]);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn windowed_matches_oracle(seed in any::<u64>(), n in 1usize..160, fan in 1usize..4, len in 1usize..400, errs in 0usize..4, walk in any::<bool>()) {
        let g = random_dag(n, fan, seed);
        let q = random_query(&g, len, errs, walk, seed ^ 0x5eed);
        let want = oracle_align(&g, &q);
        let r = align_reference(&g, &q).unwrap();
        prop_assert_eq!((r.score_max, r.end_nodes.clone()), want.clone());
        for w in WIDTHS {
            let got = align_windowed(&g, &q, w, CarryMode::PredCarry).unwrap();
            prop_assert_eq!((got.score_max, got.end_nodes), want.clone(), "width {}", w);
        }
    }

    #[test]
    fn score_is_bounded(seed in any::<u64>(), n in 1usize..100, len in 1usize..300) {
        let g = random_dag(n, 2, seed);
        let q = random_query(&g, len, 1, true, seed);
        let r = align_windowed(&g, &q, 64, CarryMode::PredCarry).unwrap();
        prop_assert!(r.score_max <= q.len().min(g.longest_path_len()));
        prop_assert!(r.stats.windows_processed <= r.stats.windows_total);
        prop_assert_eq!(r.stats.windows_total, q.len().div_ceil(64));
    }

    #[test]
    fn extra_edge_never_lowers_score(seed in any::<u64>(), n in 2usize..120, len in 1usize..250, a in any::<u32>(), b in any::<u32>()) {
        let g = random_dag(n, 2, seed);
        let q = random_query(&g, len, 2, true, seed);
        let topo = g.topo_order();
        let (i, j) = ((a as usize) % n, (b as usize) % n);
        prop_assume!(i != j);
        let (from, to) = (topo[i.min(j)], topo[i.max(j)]);
        let g2 = g.with_edge(from, to).unwrap();
        let before = align_windowed(&g, &q, 32, CarryMode::PredCarry).unwrap().score_max;
        let after = align_windowed(&g2, &q, 32, CarryMode::PredCarry).unwrap().score_max;
        prop_assert!(after >= before);
    }

    #[test]
    fn traceback_is_a_valid_path(seed in any::<u64>(), n in 1usize..120, len in 1usize..300, w in prop::sample::select(WIDTHS.to_vec())) {
        let g = random_dag(n, 2, seed);
        let q = random_query(&g, len, 1, true, seed);
        let opts = AlignOptions { record_trace: true, tbm_bytes: 1 << 16, ..AlignOptions::with_width(w) };
        let r = align_windowed_with(&g, &q, &opts).unwrap();
        prop_assume!(r.score_max > 0);
        let p = reconstruct_path(&g, &q, &r).unwrap();
        check_path(&g, &q, r.score_max, &r.end_nodes, &p);
    }

    #[test]
    fn batch_equals_single_reads(seed in any::<u64>(), long in any::<bool>()) {
        let (gfa, _) = gen_genome(800, 0.05, seed).unwrap();
        let g = gfa.to_genome_graph().unwrap();
        let reads = gen_reads(&g, 12, if long { 400 } else { 90 }, 0.02, seed).unwrap();
        let mode = if long { MappingMode::LongPipeline } else { MappingMode::ShortParallel };
        let cfg = BatchConfig { record_trace: true, ..BatchConfig::default() };
        let out = batch_align(&g, &reads, mode, &cfg).unwrap();
        for r in &out.results {
            let q = &reads.reads.iter().find(|x| x.id == r.id).unwrap().seq;
            let want = oracle_align(&g, q);
            prop_assert_eq!((r.result.score_max, r.result.end_nodes.clone()), want);
            check_path(&g, q, r.result.score_max, &r.result.end_nodes, r.path.as_ref().unwrap());
        }
    }
}

#[test]
fn self_carry_can_lose_matches_that_pred_carry_keeps() {
    // A chain crossing a window boundary: only the predecessor's carry continues the match.
    let g = GenomeGraph::chain("ACGTACGTACGT").unwrap();
    let q = b"ACGTACGTACGT";
    assert_eq!(align_windowed(&g, q, 8, CarryMode::PredCarry).unwrap().score_max, 12);
    assert!(align_windowed(&g, q, 8, CarryMode::SelfCarry).unwrap().score_max < 12);
}

#[test]
fn bad_input_is_rejected() {
    let g = GenomeGraph::chain("ACGT").unwrap();
    assert!(align_windowed(&g, b"", 8, CarryMode::PredCarry).is_err());
    assert!(align_windowed(&g, b"ACXT", 8, CarryMode::PredCarry).is_err());
    assert!(align_windowed(&g, b"AC", 0, CarryMode::PredCarry).is_err());
}
