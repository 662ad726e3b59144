//! Character-labelled DAGs (one node per base) and read batches.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::io::Gfa;
use crate::error::{Error, Result};

/// Reads at or below this length are short.
pub const DEFAULT_SHORT_THRESHOLD: usize = 300;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Base {
    A,
    C,
    G,
    T,
    N,
}

impl Base {
    pub const ACGT: [Base; 4] = [Base::A, Base::C, Base::G, Base::T];

    pub fn from_char(ch: char) -> Result<Base> {
        match ch.to_ascii_uppercase() {
            'A' => Ok(Base::A),
            'C' => Ok(Base::C),
            'G' => Ok(Base::G),
            'T' => Ok(Base::T),
            'N' => Ok(Base::N),
            _ => Err(Error::Alphabet { ch }),
        }
    }

    pub fn from_byte(b: u8) -> Result<Base> {
        Base::from_char(b as char)
    }

    pub fn to_char(self) -> char {
        match self {
            Base::A => 'A',
            Base::C => 'C',
            Base::G => 'G',
            Base::T => 'T',
            Base::N => 'N',
        }
    }

    pub fn code(self) -> usize {
        self as usize
    }
}

/// Kahn's topological sort with min-id tie-breaking.
///
/// `preds[v]` lists the predecessors of `v`. On a cycle, the returned error
/// names an edge that lies on a cycle.
pub fn topo_sort(preds: &[Vec<u32>]) -> Result<Vec<u32>> {
    let n = preds.len();
    let mut indeg = vec![0usize; n];
    let mut succs = vec![Vec::new(); n];
    for (v, ps) in preds.iter().enumerate() {
        for &u in ps {
            if u as usize >= n {
                return Err(Error::InvalidGraph(format!("predecessor {u} of {v} out of range")));
            }
            indeg[v] += 1;
            succs[u as usize].push(v as u32);
        }
    }
    let mut heap: BinaryHeap<Reverse<u32>> =
        (0..n as u32).filter(|&v| indeg[v as usize] == 0).map(Reverse).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(Reverse(u)) = heap.pop() {
        order.push(u);
        for &s in &succs[u as usize] {
            indeg[s as usize] -= 1;
            if indeg[s as usize] == 0 {
                heap.push(Reverse(s));
            }
        }
    }
    if order.len() == n {
        return Ok(order);
    }
    // Every unprocessed node keeps an unprocessed predecessor; walking those
    // pointers must revisit a node, which closes a cycle.
    let mut done = vec![false; n];
    for &v in &order {
        done[v as usize] = true;
    }
    let start = (0..n).find(|&v| !done[v]).expect("unprocessed node exists");
    let mut seen = vec![usize::MAX; n];
    let mut v = start;
    let mut step = 0;
    loop {
        seen[v] = step;
        step += 1;
        let u = *preds[v]
            .iter()
            .filter(|&&u| !done[u as usize])
            .min()
            .expect("unprocessed node has an unprocessed predecessor") as usize;
        if seen[u] != usize::MAX {
            return Err(Error::Cycle { from: u as u32, to: v as u32 });
        }
        v = u;
    }
}

/// Acyclic genome graph with one base per node.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenomeGraph {
    bases: Vec<Base>,
    preds: Vec<Vec<u32>>,
    topo_order: Vec<u32>,
}

impl GenomeGraph {
    pub fn new(bases: Vec<Base>, mut preds: Vec<Vec<u32>>) -> Result<Self> {
        if bases.len() != preds.len() {
            return Err(Error::InvalidGraph(format!(
                "{} bases but {} predecessor lists",
                bases.len(),
                preds.len()
            )));
        }
        for ps in &mut preds {
            ps.sort_unstable();
            ps.dedup();
        }
        let topo_order = topo_sort(&preds)?;
        Ok(GenomeGraph { bases, preds, topo_order })
    }

    /// Linear chain spelling `seq`.
    pub fn chain(seq: &str) -> Result<Self> {
        let bases = seq.chars().map(Base::from_char).collect::<Result<Vec<_>>>()?;
        let preds = (0..bases.len())
            .map(|i| if i == 0 { Vec::new() } else { vec![i as u32 - 1] })
            .collect();
        GenomeGraph::new(bases, preds)
    }

    pub fn len(&self) -> usize {
        self.bases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bases.is_empty()
    }

    pub fn base(&self, v: usize) -> Base {
        self.bases[v]
    }

    pub fn bases(&self) -> &[Base] {
        &self.bases
    }

    pub fn preds(&self, v: usize) -> &[u32] {
        &self.preds[v]
    }

    pub fn all_preds(&self) -> &[Vec<u32>] {
        &self.preds
    }

    pub fn topo_order(&self) -> &[u32] {
        &self.topo_order
    }

    pub fn edge_count(&self) -> usize {
        self.preds.iter().map(Vec::len).sum()
    }

    pub fn successors(&self) -> Vec<Vec<u32>> {
        let mut succs = vec![Vec::new(); self.len()];
        for (v, ps) in self.preds.iter().enumerate() {
            for &u in ps {
                succs[u as usize].push(v as u32);
            }
        }
        succs
    }

    /// Returns a copy with one extra edge `from -> to`.
    pub fn with_edge(&self, from: u32, to: u32) -> Result<Self> {
        let mut preds = self.preds.clone();
        preds[to as usize].push(from);
        GenomeGraph::new(self.bases.clone(), preds)
    }

    /// Number of nodes on the longest path starting at each node.
    pub fn longest_from(&self) -> Vec<usize> {
        let succs = self.successors();
        let mut lp = vec![1usize; self.len()];
        for &v in self.topo_order.iter().rev() {
            let best = succs[v as usize].iter().map(|&s| lp[s as usize]).max().unwrap_or(0);
            lp[v as usize] = 1 + best;
        }
        lp
    }

    pub fn longest_path_len(&self) -> usize {
        self.longest_from().into_iter().max().unwrap_or(0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LengthClass {
    Short,
    Long,
}

impl LengthClass {
    pub fn of(len: usize, threshold: usize) -> Self {
        if len <= threshold {
            LengthClass::Short
        } else {
            LengthClass::Long
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Read {
    pub id: String,
    pub seq: Vec<u8>,
}

impl Read {
    pub fn new(id: impl Into<String>, seq: impl Into<Vec<u8>>) -> Self {
        Read { id: id.into(), seq: seq.into() }
    }

    pub fn len(&self) -> usize {
        self.seq.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seq.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReadBatch {
    pub reads: Vec<Read>,
    pub length_class: LengthClass,
}

impl ReadBatch {
    /// Classifies the batch as `Long` when any read exceeds `threshold`.
    pub fn new(reads: Vec<Read>, threshold: usize) -> Self {
        let long = reads.iter().any(|r| r.len() > threshold);
        let length_class = if long { LengthClass::Long } else { LengthClass::Short };
        ReadBatch { reads, length_class }
    }

    pub fn len(&self) -> usize {
        self.reads.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reads.is_empty()
    }

    /// Splits into (short, long) sub-batches, preserving order; empty halves are `None`.
    pub fn split_by_class(&self, threshold: usize) -> (Option<ReadBatch>, Option<ReadBatch>) {
        let (short, long): (Vec<Read>, Vec<Read>) =
            self.reads.iter().cloned().partition(|r| r.len() <= threshold);
        let wrap = |reads: Vec<Read>, class| {
            (!reads.is_empty()).then_some(ReadBatch { reads, length_class: class })
        };
        (wrap(short, LengthClass::Short), wrap(long, LengthClass::Long))
    }
}

/// Random SNP/deletion bubble genome of `bases` backbone bases, as GFA segments.
///
/// At each interior backbone position a bubble opens with probability
/// `bubble_rate`: three quarters are SNPs (an alternative one-base segment in
/// parallel) and the rest deletions (a link skipping the base). Returns the
/// GFA and the backbone reference sequence.
pub fn gen_genome(bases: usize, bubble_rate: f64, seed: u64) -> Result<(Gfa, String)> {
    if !(0.0..=1.0).contains(&bubble_rate) {
        return Err(Error::Argument(format!("bubble rate {bubble_rate} outside [0, 1]")));
    }
    if bases == 0 {
        return Err(Error::Argument("genome needs at least one base".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let reference: String =
        (0..bases).map(|_| Base::ACGT[rng.gen_range(0..4)].to_char()).collect();
    let ref_bytes = reference.as_bytes();

    let mut gfa = Gfa::default();
    let mut chunk_start = 0usize;
    // Segments that must link into whatever segment comes next.
    let mut tails: Vec<usize> = Vec::new();
    let mut i = 1;
    while i + 1 < bases {
        if rng.gen::<f64>() >= bubble_rate {
            i += 1;
            continue;
        }
        let before = gfa.push_segment(&reference[chunk_start..i]);
        for t in tails.drain(..) {
            gfa.links.push((t, before));
        }
        let refseg = gfa.push_segment(&reference[i..i + 1]);
        gfa.links.push((before, refseg));
        tails.push(refseg);
        if rng.gen::<f64>() < 0.75 {
            let r = Base::from_byte(ref_bytes[i])?;
            let alt = *Base::ACGT.iter().filter(|&&b| b != r).collect::<Vec<_>>().choose(&mut rng).unwrap();
            let altseg = gfa.push_segment(&alt.to_char().to_string());
            gfa.links.push((before, altseg));
            tails.push(altseg);
        } else {
            tails.push(before);
        }
        chunk_start = i + 1;
        i += 2;
    }
    let last = gfa.push_segment(&reference[chunk_start..]);
    for t in tails.drain(..) {
        gfa.links.push((t, last));
    }
    Ok((gfa, reference))
}

/// Samples `count` reads of length `len` along uniformly chosen graph paths,
/// substituting each base with probability `sub_rate`.
pub fn gen_reads(
    g: &GenomeGraph,
    count: usize,
    len: usize,
    sub_rate: f64,
    seed: u64,
) -> Result<ReadBatch> {
    gen_reads_with_threshold(g, count, len, sub_rate, seed, DEFAULT_SHORT_THRESHOLD)
}

pub fn gen_reads_with_threshold(
    g: &GenomeGraph,
    count: usize,
    len: usize,
    sub_rate: f64,
    seed: u64,
    threshold: usize,
) -> Result<ReadBatch> {
    if !(0.0..=1.0).contains(&sub_rate) {
        return Err(Error::Argument(format!("substitution rate {sub_rate} outside [0, 1]")));
    }
    if count == 0 {
        return Ok(ReadBatch::new(Vec::new(), threshold));
    }
    if len == 0 {
        return Err(Error::Argument("read length must be >= 1".into()));
    }
    let lp = g.longest_from();
    let longest = lp.iter().copied().max().unwrap_or(0);
    if len > longest {
        return Err(Error::Length { len, longest });
    }
    let succs = g.successors();
    let starts: Vec<u32> = (0..g.len() as u32).filter(|&v| lp[v as usize] >= len).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut reads = Vec::with_capacity(count);
    for r in 0..count {
        let mut v = *starts.choose(&mut rng).expect("at least one start");
        let mut seq = Vec::with_capacity(len);
        for step in 0..len {
            let mut b = g.base(v as usize);
            if rng.gen::<f64>() < sub_rate {
                let others: Vec<Base> = Base::ACGT.iter().copied().filter(|&x| x != b).collect();
                b = others[rng.gen_range(0..others.len())];
            }
            seq.push(b.to_char() as u8);
            if step + 1 < len {
                let need = len - step - 1;
                let next: Vec<u32> = succs[v as usize]
                    .iter()
                    .copied()
                    .filter(|&s| lp[s as usize] >= need)
                    .collect();
                v = *next.choose(&mut rng).expect("longest-path table guarantees a successor");
            }
        }
        reads.push(Read::new(format!("read{r}"), seq));
    }
    Ok(ReadBatch::new(reads, threshold))
}
