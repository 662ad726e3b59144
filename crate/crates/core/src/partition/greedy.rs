use std::collections::{BTreeSet, VecDeque};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::Partition;
use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::weight::Weight;

pub const DEFAULT_IMBALANCE: f64 = 0.1;
pub const DEFAULT_REFINE_PASSES: usize = 2;

/// A k-way partitioning strategy over an undirected adjacency structure.
///
/// Implementations must return exactly `k` non-empty components, none larger
/// than `limit`, and must be deterministic in `seed`.
pub trait Partitioner: Send + Sync {
    fn partition(&self, adj: &[Vec<u32>], k: usize, limit: usize, seed: u64) -> Result<Partition>;
}

/// BFS region growing followed by single-vertex boundary moves.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GreedyPartitioner {
    pub imbalance: f64,
    pub refine_passes: usize,
}

impl Default for GreedyPartitioner {
    fn default() -> Self {
        GreedyPartitioner { imbalance: DEFAULT_IMBALANCE, refine_passes: DEFAULT_REFINE_PASSES }
    }
}

/// Seed-selection key: frontier vertices first, then fewest unassigned
/// neighbours, then a seeded random rank.
type Key = (bool, u32, u32, u32);

struct Grower<'a> {
    adj: &'a [Vec<u32>],
    rank: Vec<u32>,
    assign: Vec<u32>,
    free_deg: Vec<u32>,
    frontier: Vec<bool>,
    pool: BTreeSet<Key>,
}

const FREE: u32 = u32::MAX;

impl<'a> Grower<'a> {
    fn new(adj: &'a [Vec<u32>], seed: u64) -> Self {
        let n = adj.len();
        let mut order: Vec<u32> = (0..n as u32).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let mut rank = vec![0u32; n];
        for (r, &v) in order.iter().enumerate() {
            rank[v as usize] = r as u32;
        }
        let free_deg: Vec<u32> = adj.iter().map(|a| a.len() as u32).collect();
        let pool = (0..n).map(|v| (true, free_deg[v], rank[v], v as u32)).collect();
        Grower { adj, rank, assign: vec![FREE; n], free_deg, frontier: vec![false; n], pool }
    }

    fn key(&self, v: usize) -> Key {
        (!self.frontier[v], self.free_deg[v], self.rank[v], v as u32)
    }

    fn take(&mut self, v: usize, c: u32) {
        self.pool.remove(&self.key(v));
        self.assign[v] = c;
        for &u in &self.adj[v] {
            let u = u as usize;
            if self.assign[u] == FREE {
                self.pool.remove(&self.key(u));
                self.free_deg[u] -= 1;
                self.frontier[u] = true;
                self.pool.insert(self.key(u));
            }
        }
    }

    fn next_seed(&self) -> Option<usize> {
        self.pool.first().map(|k| k.3 as usize)
    }

    /// Grows component `c` to exactly `target` vertices (fewer only if the pool runs dry).
    fn grow(&mut self, c: u32, target: usize) {
        let mut size = 0;
        let mut queue = VecDeque::new();
        while size < target {
            let v = match queue.pop_front() {
                Some(v) => v,
                None => match self.next_seed() {
                    Some(s) => s,
                    None => return,
                },
            };
            if self.assign[v] != FREE {
                continue;
            }
            self.take(v, c);
            size += 1;
            for &u in &self.adj[v] {
                if self.assign[u as usize] == FREE {
                    queue.push_back(u as usize);
                }
            }
        }
    }
}

impl GreedyPartitioner {
    /// Component size cap for `n` vertices in `k` parts under `limit`.
    pub fn cap(&self, n: usize, k: usize, limit: usize) -> usize {
        let even = n.div_ceil(k);
        let loose = ((even as f64) * (1.0 + self.imbalance)).floor() as usize;
        loose.max(even).min(limit)
    }

    fn refine(&self, adj: &[Vec<u32>], assign: &mut [u32], sizes: &mut [usize], cap: usize) {
        let mut count = vec![0u32; sizes.len()];
        let mut touched = Vec::new();
        for _ in 0..self.refine_passes {
            let mut moved = 0;
            for v in 0..adj.len() {
                let a = assign[v] as usize;
                for &u in &adj[v] {
                    let c = assign[u as usize] as usize;
                    if count[c] == 0 {
                        touched.push(c);
                    }
                    count[c] += 1;
                }
                let here = count[a];
                let mut best = (0u32, usize::MAX);
                for &c in &touched {
                    if c != a && sizes[c] < cap && (count[c] > best.0 || (count[c] == best.0 && c < best.1)) {
                        best = (count[c], c);
                    }
                }
                for &c in &touched {
                    count[c] = 0;
                }
                touched.clear();
                if best.1 != usize::MAX && best.0 > here && sizes[a] > 1 {
                    assign[v] = best.1 as u32;
                    sizes[a] -= 1;
                    sizes[best.1] += 1;
                    moved += 1;
                }
            }
            if moved == 0 {
                break;
            }
        }
    }
}

impl Partitioner for GreedyPartitioner {
    fn partition(&self, adj: &[Vec<u32>], k: usize, limit: usize, seed: u64) -> Result<Partition> {
        let n = adj.len();
        if k == 0 || k > n.max(1) {
            return Err(Error::Argument(format!("k = {k} must satisfy 1 <= k <= n = {n}")));
        }
        if n == 0 {
            return Partition::new(Vec::new(), k);
        }
        if n.div_ceil(k) > limit {
            return Err(Error::Argument(format!("{n} vertices cannot fit in {k} components of at most {limit}")));
        }
        let cap = self.cap(n, k, limit);
        let mut grower = Grower::new(adj, seed);
        let mut remaining = n;
        for c in 0..k {
            let target = remaining.div_ceil(k - c);
            grower.grow(c as u32, target);
            remaining -= target;
        }
        let mut assign = grower.assign;
        let mut sizes = vec![0usize; k];
        for &c in &assign {
            sizes[c as usize] += 1;
        }
        self.refine(adj, &mut assign, &mut sizes, cap);
        Partition::new(assign, k)
    }
}

/// Default strategy with the default imbalance and no tile limit.
pub fn kway_partition<W: Weight>(g: &WeightedGraph<W>, k: usize, seed: u64) -> Result<Partition> {
    let n = g.n();
    if k == 0 || k > n {
        return Err(Error::Argument(format!("k = {k} must satisfy 1 <= k <= n = {n}")));
    }
    GreedyPartitioner::default().partition(&g.undirected_neighbors(), k, usize::MAX, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{gen_er, Edge};
    use crate::partition::find_boundary;

    fn path(n: u32) -> WeightedGraph {
        WeightedGraph::from_undirected(n as usize, (0..n - 1).map(|i| Edge::new(i, i + 1, 1))).unwrap()
    }

    #[test]
    fn k_one_and_k_n() {
        let g = gen_er(30, 0.1, 1, 10).unwrap();
        let p = kway_partition(&g, 1, 5).unwrap();
        assert!(p.assignment().iter().all(|&c| c == 0));
        let p = kway_partition(&g, 30, 5).unwrap();
        assert!(p.sizes().iter().all(|&s| s == 1));
        let b = find_boundary(&g, &p).unwrap();
        let with_edge: Vec<u32> = g.undirected_neighbors().iter().enumerate().filter(|(_, a)| !a.is_empty()).map(|(v, _)| v as u32).collect();
        assert_eq!(b.union(), with_edge);
        assert!(matches!(kway_partition(&g, 31, 5), Err(Error::Argument(_))));
    }

    #[test]
    fn path_cut_into_contiguous_pieces() {
        let g = path(400);
        let p = GreedyPartitioner::default().partition(&g.undirected_neighbors(), 4, 100, 9).unwrap();
        assert_eq!(p.cut_size(&g), 6);
        assert!(p.sizes().iter().all(|&s| s == 100));
    }

    #[test]
    fn balance_cap_respected() {
        for seed in 0..5 {
            let g = gen_er(500, 0.01, seed, 10).unwrap();
            let p = kway_partition(&g, 7, seed).unwrap();
            let cap = ((500usize.div_ceil(7)) as f64 * 1.1).floor() as usize;
            assert!(p.sizes().iter().all(|&s| s >= 1 && s <= cap), "{:?}", p.sizes());
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let g = gen_er(300, 0.02, 4, 10).unwrap();
        assert_eq!(kway_partition(&g, 5, 11).unwrap(), kway_partition(&g, 5, 11).unwrap());
    }
}
