//! Seeded synthetic graph generators.

use std::collections::HashSet;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Edge, WeightedGraph};
use crate::error::{Error, Result};

/// Default upper bound of the uniform edge-weight distribution.
pub const DEFAULT_W_MAX: u32 = 100;

fn check_prob(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) || p.is_nan() {
        return Err(Error::Argument(format!("probability {p} outside [0, 1]")));
    }
    Ok(())
}

/// Calls `f` with the index of every success in `total` Bernoulli(p) trials,
/// using geometric skips so the cost is proportional to the number of successes.
fn bernoulli_indices(total: u64, p: f64, rng: &mut ChaCha8Rng, mut f: impl FnMut(u64)) {
    if p <= 0.0 || total == 0 {
        return;
    }
    if p >= 1.0 {
        (0..total).for_each(f);
        return;
    }
    let log_q = (1.0 - p).ln();
    let mut t: i64 = -1;
    loop {
        let u: f64 = 1.0 - rng.gen::<f64>();
        let skip = (u.ln() / log_q).floor();
        if !skip.is_finite() || skip >= (total as f64) {
            return;
        }
        t += 1 + skip as i64;
        if t as u64 >= total {
            return;
        }
        f(t as u64);
    }
}

/// Directed Erdős–Rényi G(n, p): every ordered pair `(i, j)`, `i != j`, is an arc
/// with probability `p`; weights uniform in `[1, w_max]`.
pub fn gen_er(n: usize, p: f64, seed: u64, w_max: u32) -> Result<WeightedGraph> {
    check_prob(p)?;
    if w_max == 0 {
        return Err(Error::Argument("w_max must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut weights = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut edges = Vec::new();
    if n >= 2 {
        let m = (n - 1) as u64;
        bernoulli_indices(n as u64 * m, p, &mut rng, |t| {
            let src = t / m;
            let off = t % m;
            let dst = if off >= src { off + 1 } else { off };
            edges.push(Edge::new(src as u32, dst as u32, weights.gen_range(1..=w_max)));
        });
    }
    WeightedGraph::new(n, edges, true)
}

/// Newman–Watts–Strogatz: a ring lattice where each vertex links to `k / 2`
/// neighbours on each side, plus one random shortcut per lattice edge with
/// probability `p`. Lattice edges are never removed. Output is symmetric.
pub fn gen_nws(n: usize, k: usize, p: f64, seed: u64, w_max: u32) -> Result<WeightedGraph> {
    check_prob(p)?;
    if !k.is_multiple_of(2) || k >= n {
        return Err(Error::Argument(format!("ring degree k = {k} must be even and < n = {n}")));
    }
    if w_max == 0 {
        return Err(Error::Argument("w_max must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen: HashSet<(u32, u32)> = HashSet::new();
    let key = |a: u32, b: u32| if a < b { (a, b) } else { (b, a) };
    let mut undirected = Vec::with_capacity(n * k / 2);
    for u in 0..n {
        for j in 1..=k / 2 {
            let v = (u + j) % n;
            seen.insert(key(u as u32, v as u32));
            undirected.push(Edge::new(u as u32, v as u32, rng.gen_range(1..=w_max)));
        }
    }
    let lattice = undirected.len();
    for idx in 0..lattice {
        if rng.gen::<f64>() < p {
            let u = undirected[idx].src;
            let w = rng.gen_range(0..n as u32);
            if w != u && seen.insert(key(u, w)) {
                undirected.push(Edge::new(u, w, rng.gen_range(1..=w_max)));
            }
        }
    }
    WeightedGraph::from_undirected(n, undirected)
}

/// Parameters of the two-level planted-cluster generator.
#[derive(Clone, Copy, Debug)]
pub struct ClusteredParams {
    pub groups: usize,
    pub subgroups: usize,
    pub p_in: f64,
    pub p_mid: f64,
    pub p_out: f64,
}

/// Two-level clustered digraph: `groups` super-clusters each split into
/// `subgroups` sub-clusters. Arc probability is `p_in` inside a sub-cluster,
/// `p_mid` between sub-clusters of one group and `p_out` across groups.
pub fn gen_clustered(n: usize, cp: ClusteredParams, seed: u64, w_max: u32) -> Result<WeightedGraph> {
    for p in [cp.p_in, cp.p_mid, cp.p_out] {
        check_prob(p)?;
    }
    if cp.groups == 0 || cp.subgroups == 0 {
        return Err(Error::Argument("groups and subgroups must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cells = cp.groups * cp.subgroups;
    let cell = |v: usize| v * cells / n.max(1);
    let mut edges = Vec::new();
    for i in 0..n {
        let ci = cell(i);
        for j in 0..n {
            if i == j {
                continue;
            }
            let cj = cell(j);
            let p = if ci == cj {
                cp.p_in
            } else if ci / cp.subgroups == cj / cp.subgroups {
                cp.p_mid
            } else {
                cp.p_out
            };
            if rng.gen::<f64>() < p {
                edges.push(Edge::new(i as u32, j as u32, rng.gen_range(1..=w_max)));
            }
        }
    }
    WeightedGraph::new(n, edges, true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_csr;

    #[test]
    fn er_degenerate_probabilities() {
        assert_eq!(gen_er(100, 0.0, 1, DEFAULT_W_MAX).unwrap().edge_count(), 0);
        let full = gen_er(100, 1.0, 1, DEFAULT_W_MAX).unwrap();
        assert_eq!(full.edge_count(), 9_900);
        build_csr(&full).unwrap();
    }

    #[test]
    fn er_edge_count_within_three_sigma() {
        let g = gen_er(1000, 0.01, 42, DEFAULT_W_MAX).unwrap();
        let trials = 1000.0 * 999.0;
        let mean = trials * 0.01;
        let sigma = (trials * 0.01 * 0.99f64).sqrt();
        assert!((g.edge_count() as f64 - mean).abs() <= 3.0 * sigma, "{}", g.edge_count());
        assert!(g.edges().iter().all(|e| (1..=DEFAULT_W_MAX).contains(&e.w) && e.src != e.dst));
        build_csr(&g).expect("generator never emits duplicates");
    }

    #[test]
    fn er_is_reproducible() {
        assert_eq!(gen_er(300, 0.03, 9, 50).unwrap(), gen_er(300, 0.03, 9, 50).unwrap());
        assert_ne!(gen_er(300, 0.03, 9, 50).unwrap(), gen_er(300, 0.03, 10, 50).unwrap());
    }

    #[test]
    fn nws_ring_without_rewiring() {
        let g = gen_nws(8, 2, 0.0, 0, DEFAULT_W_MAX).unwrap();
        assert_eq!(g.edge_count(), 16);
        let g4 = gen_nws(8, 4, 0.0, 0, DEFAULT_W_MAX).unwrap();
        let adj = g4.undirected_neighbors();
        for (u, nb) in adj.iter().enumerate() {
            let mut expect: Vec<u32> = [1usize, 2, 6, 7].iter().map(|d| ((u + d) % 8) as u32).collect();
            expect.sort_unstable();
            assert_eq!(nb, &expect);
        }
    }

    #[test]
    fn nws_only_adds_shortcuts() {
        let g = gen_nws(1000, 10, 0.1, 7, DEFAULT_W_MAX).unwrap();
        assert!(g.edge_count() >= 1000 * 10);
        build_csr(&g).unwrap();
        assert!(gen_nws(10, 3, 0.1, 0, 5).is_err());
        assert!(gen_nws(10, 10, 0.1, 0, 5).is_err());
    }

    #[test]
    fn clustered_is_denser_inside() {
        let cp = ClusteredParams { groups: 2, subgroups: 2, p_in: 0.3, p_mid: 0.05, p_out: 0.0 };
        let g = gen_clustered(80, cp, 3, 10).unwrap();
        // groups never connect
        assert!(g.edges().iter().all(|e| (e.src < 40) == (e.dst < 40)));
    }
}
