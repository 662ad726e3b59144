#![allow(dead_code)]

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use graphdp::graph::WeightedGraph;
use graphdp::INF_SENTINEL;

/// Textbook triple-loop Floyd-Warshall over u64 so no saturation is involved.
pub fn oracle_fw(g: &WeightedGraph) -> Vec<u64> {
    let n = g.n();
    let inf = u64::MAX / 4;
    let mut d = vec![inf; n * n];
    for i in 0..n {
        d[i * n + i] = 0;
    }
    for e in g.edges() {
        let s = &mut d[e.src as usize * n + e.dst as usize];
        *s = (*s).min(e.w as u64);
    }
    for k in 0..n {
        for i in 0..n {
            let ik = d[i * n + k];
            if ik >= inf {
                continue;
            }
            for j in 0..n {
                let c = ik + d[k * n + j];
                if c < d[i * n + j] {
                    d[i * n + j] = c;
                }
            }
        }
    }
    d.into_iter().map(|x| if x >= inf { INF_SENTINEL as u64 } else { x }).collect()
}

/// Single-source Dijkstra with a binary heap.
pub fn oracle_dijkstra(g: &WeightedGraph, src: u32) -> Vec<u64> {
    let n = g.n();
    let mut adj = vec![Vec::new(); n];
    for e in g.edges() {
        adj[e.src as usize].push((e.dst as usize, e.w as u64));
    }
    let mut dist = vec![u64::MAX; n];
    let mut heap = BinaryHeap::new();
    dist[src as usize] = 0;
    heap.push(Reverse((0u64, src as usize)));
    while let Some(Reverse((d, u))) = heap.pop() {
        if d > dist[u] {
            continue;
        }
        for &(v, w) in &adj[u] {
            if d + w < dist[v] {
                dist[v] = d + w;
                heap.push(Reverse((dist[v], v)));
            }
        }
    }
    dist.into_iter().map(|x| if x == u64::MAX { INF_SENTINEL as u64 } else { x }).collect()
}

/// Random DAG whose node ids are shuffled against topological order, so the
/// engine cannot rely on `pred < node`.
pub fn random_dag(n: usize, fan_in: usize, seed: u64) -> graphdp::graph::GenomeGraph {
    use graphdp::graph::{Base, GenomeGraph};
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut label: Vec<u32> = (0..n as u32).collect();
    label.shuffle(&mut rng);
    let mut preds = vec![Vec::new(); n];
    let mut bases = vec![Base::A; n];
    for rank in 0..n {
        let v = label[rank] as usize;
        bases[v] = Base::ACGT[rng.gen_range(0..4)];
        if rank > 0 {
            let k = rng.gen_range(0..=fan_in.min(rank));
            for _ in 0..k {
                // Mostly local edges so long paths exist.
                let back = if rng.gen_bool(0.8) { 1 } else { rng.gen_range(1..=rank) };
                preds[v].push(label[rank - back]);
            }
        }
    }
    GenomeGraph::new(bases, preds).unwrap()
}

/// Longest query prefix spelled by some graph path, with every node where such
/// a prefix ends. Tracks the set of nodes matching `q[..=j]` position by position.
pub fn oracle_align(g: &graphdp::graph::GenomeGraph, q: &[u8]) -> (usize, Vec<u32>) {
    let n = g.len();
    let matches = |v: usize, ch: u8| {
        let b = g.base(v).to_char() as u8;
        b != b'N' && b == ch.to_ascii_uppercase()
    };
    let mut alive: Vec<u32> = (0..n).filter(|&v| matches(v, q[0])).map(|v| v as u32).collect();
    if alive.is_empty() {
        return (0, Vec::new());
    }
    let mut best = (1, alive.clone());
    for (j, &ch) in q.iter().enumerate().skip(1) {
        let set: std::collections::HashSet<u32> = alive.iter().copied().collect();
        alive = (0..n)
            .filter(|&v| matches(v, ch) && g.preds(v).iter().any(|u| set.contains(u)))
            .map(|v| v as u32)
            .collect();
        if alive.is_empty() {
            break;
        }
        best = (j + 1, alive.clone());
    }
    best
}

/// A query sampled along a random path of `g` with `errors` substitutions, or
/// uniform noise when `walk` is false.
pub fn random_query(g: &graphdp::graph::GenomeGraph, len: usize, errors: usize, walk: bool, seed: u64) -> Vec<u8> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let acgt = b"ACGT";
    let mut q: Vec<u8> = if walk {
        let succ = g.successors();
        let mut v = rng.gen_range(0..g.len());
        let mut q = Vec::with_capacity(len);
        while q.len() < len {
            q.push(g.base(v).to_char() as u8);
            if succ[v].is_empty() {
                v = rng.gen_range(0..g.len());
            } else {
                v = succ[v][rng.gen_range(0..succ[v].len())] as usize;
            }
        }
        q
    } else {
        (0..len).map(|_| acgt[rng.gen_range(0..4)]).collect()
    };
    for _ in 0..errors {
        let i = rng.gen_range(0..len);
        q[i] = acgt[rng.gen_range(0..4)];
    }
    q
}
