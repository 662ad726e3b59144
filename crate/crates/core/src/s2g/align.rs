use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::{precompute_masks, words_for};
use crate::error::{Error, Result};
use crate::graph::{Base, GenomeGraph};

pub const DEFAULT_WIDTH: usize = 128;

/// Traceback log budget per node, in bytes.
pub const DEFAULT_TBM_BYTES: usize = 4096;

/// Source of the carry-in bit at the start of windows after the first.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CarryMode {
    /// OR of the predecessors' previous-window top bits.
    #[default]
    PredCarry,
    /// The node's own previous-window top bit.
    SelfCarry,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlignOptions {
    pub width: usize,
    pub carry: CarryMode,
    pub record_trace: bool,
    pub tbm_bytes: usize,
}

impl Default for AlignOptions {
    fn default() -> Self {
        AlignOptions { width: DEFAULT_WIDTH, carry: CarryMode::PredCarry, record_trace: false, tbm_bytes: DEFAULT_TBM_BYTES }
    }
}

impl AlignOptions {
    pub fn with_width(width: usize) -> Self {
        AlignOptions { width, ..Default::default() }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlignStats {
    /// `ceil(|q| / W)`.
    pub windows_total: usize,
    /// Windows actually swept (fewer after an early exit).
    pub windows_processed: usize,
    pub node_updates: u64,
}

/// Per-window node states kept for replay, oldest windows evicted first.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlignTrace {
    width: usize,
    words: usize,
    nodes: usize,
    capacity_windows: usize,
    first_window: usize,
    windows: VecDeque<Vec<u64>>,
}

impl AlignTrace {
    fn new(width: usize, nodes: usize, tbm_bytes: usize) -> Self {
        let capacity_windows = (tbm_bytes * 8 / width).max(1);
        AlignTrace { width, words: words_for(width), nodes, capacity_windows, first_window: 0, windows: VecDeque::new() }
    }

    fn push(&mut self, state: &[u64]) {
        if self.windows.len() == self.capacity_windows {
            self.windows.pop_front();
            self.first_window += 1;
        }
        self.windows.push_back(state.to_vec());
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Windows still held in the log.
    pub fn retained(&self) -> std::ops::Range<usize> {
        self.first_window..self.first_window + self.windows.len()
    }

    /// State words of `node` after window `window`, if still retained.
    pub fn state(&self, window: usize, node: u32) -> Option<&[u64]> {
        let w = window.checked_sub(self.first_window)?;
        let s = self.windows.get(w)?;
        let n = node as usize;
        (n < self.nodes).then(|| &s[n * self.words..(n + 1) * self.words])
    }

    /// The state as an integer (only meaningful for `width <= 128`).
    pub fn state_u128(&self, window: usize, node: u32) -> Option<u128> {
        self.state(window, node)
            .map(|s| s.iter().take(2).enumerate().fold(0u128, |acc, (i, &w)| acc | ((w as u128) << (64 * i))))
    }

    fn bit(&self, window: usize, node: u32, bit: usize) -> Option<bool> {
        self.state(window, node).map(|s| s[bit / 64] >> (bit % 64) & 1 == 1)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlignResult {
    /// Longest matched query prefix.
    pub score_max: usize,
    /// Nodes where a prefix of length `score_max` ends, sorted.
    pub end_nodes: Vec<u32>,
    pub stats: AlignStats,
    pub trace: Option<AlignTrace>,
}

fn check_query(q: &[u8]) -> Result<()> {
    if q.is_empty() {
        return Err(Error::Argument("query is empty".into()));
    }
    for &ch in q {
        Base::from_byte(ch)?;
    }
    Ok(())
}

fn record(best: &mut usize, ends: &mut Vec<u32>, score: usize, v: u32) {
    if score > *best {
        *best = score;
        ends.clear();
    }
    if score == *best && score > 0 {
        ends.push(v);
    }
}

/// Windowed alignment with default options at window width `width`.
pub fn align_windowed(g: &GenomeGraph, q: &[u8], width: usize, carry: CarryMode) -> Result<AlignResult> {
    align_windowed_with(g, q, &AlignOptions { width, carry, ..Default::default() })
}

/// Sweeps `ceil(|q| / W)` windows; in each, nodes are visited in topological
/// order and updated as `S = ((OR of pred states) << 1 | carry_in) & mask[base]`.
pub fn align_windowed_with(g: &GenomeGraph, q: &[u8], opts: &AlignOptions) -> Result<AlignResult> {
    check_query(q)?;
    let width = opts.width;
    if width == 0 {
        return Err(Error::Argument("window width must be positive".into()));
    }
    let words = words_for(width);
    let n = g.len();
    let k = q.len().div_ceil(width);
    let msb = (width - 1) / 64;
    let msb_bit = (width - 1) % 64;
    let mut state = vec![0u64; n * words];
    let mut carry_prev = vec![false; n];
    let mut carry_cur = vec![false; n];
    let mut din = vec![0u64; words];
    let mut best = 0usize;
    let mut ends = Vec::new();
    let mut stats = AlignStats { windows_total: k, ..Default::default() };
    let mut trace = opts.record_trace.then(|| AlignTrace::new(width, n, opts.tbm_bytes));

    for i in 0..k {
        let seg = &q[i * width..((i + 1) * width).min(q.len())];
        let masks = precompute_masks(seg, width)?;
        for &v in g.topo_order() {
            let vi = v as usize;
            let preds = g.preds(vi);
            din.fill(0);
            for &u in preds {
                let su = &state[u as usize * words..(u as usize + 1) * words];
                for (d, &s) in din.iter_mut().zip(su) {
                    *d |= s;
                }
            }
            let c_in = if i == 0 {
                true
            } else {
                match opts.carry {
                    CarryMode::PredCarry => preds.iter().any(|&u| carry_prev[u as usize]),
                    CarryMode::SelfCarry => carry_prev[vi],
                }
            };
            let mask = masks.mask(g.base(vi));
            let sv = &mut state[vi * words..(vi + 1) * words];
            let mut shift_in = c_in as u64;
            let mut top = None;
            for w in 0..words {
                let x = din[w];
                let nw = ((x << 1) | shift_in) & mask[w];
                shift_in = x >> 63;
                sv[w] = nw;
                if nw != 0 {
                    top = Some(w * 64 + 63 - nw.leading_zeros() as usize);
                }
            }
            carry_cur[vi] = (sv[msb] >> msb_bit) & 1 == 1;
            if let Some(hb) = top {
                record(&mut best, &mut ends, i * width + hb + 1, v);
            }
        }
        stats.windows_processed += 1;
        stats.node_updates += n as u64;
        if let Some(t) = trace.as_mut() {
            t.push(&state);
        }
        std::mem::swap(&mut carry_prev, &mut carry_cur);
        if !carry_prev.iter().any(|&c| c) {
            break;
        }
    }
    ends.sort_unstable();
    Ok(AlignResult { score_max: best, end_nodes: ends, stats, trace })
}

/// Character-by-character boolean DP: `m[v][j] = base(v) == q[j] && (j == 0 || any pred u: m[u][j-1])`.
pub fn align_reference(g: &GenomeGraph, q: &[u8]) -> Result<AlignResult> {
    check_query(q)?;
    let n = g.len();
    let mut prev = vec![false; n];
    let mut cur = vec![false; n];
    let mut best = 0usize;
    let mut ends = Vec::new();
    let mut processed = 0;
    for (j, &ch) in q.iter().enumerate() {
        let b = Base::from_byte(ch)?;
        let mut any = false;
        for v in 0..n {
            let hit = b != Base::N
                && g.base(v) == b
                && (j == 0 || g.preds(v).iter().any(|&u| prev[u as usize]));
            cur[v] = hit;
            if hit {
                any = true;
                record(&mut best, &mut ends, j + 1, v as u32);
            }
        }
        processed += 1;
        std::mem::swap(&mut prev, &mut cur);
        if !any {
            break;
        }
    }
    ends.sort_unstable();
    let stats = AlignStats { windows_total: q.len(), windows_processed: processed, node_updates: (processed * n) as u64 };
    Ok(AlignResult { score_max: best, end_nodes: ends, stats, trace: None })
}

/// Replays the logged states backwards from the first end node and returns
/// the matched path (one node per matched character).
pub fn reconstruct_path(g: &GenomeGraph, q: &[u8], result: &AlignResult) -> Result<Vec<u32>> {
    let trace = result.trace.as_ref().ok_or_else(|| Error::State("alignment ran without a traceback log".into()))?;
    if result.score_max == 0 || result.end_nodes.is_empty() {
        return Err(Error::State("nothing matched, the path is empty".into()));
    }
    if result.score_max > q.len() {
        return Err(Error::State("score exceeds the query length".into()));
    }
    let w = trace.width();
    let mut v = result.end_nodes[0];
    let mut path = vec![v];
    for j in (1..result.score_max).rev() {
        let p = j - 1;
        let (win, bit) = (p / w, p % w);
        if !trace.retained().contains(&win) {
            return Err(Error::State(format!("window {win} was evicted from the traceback log")));
        }
        let u = g
            .preds(v as usize)
            .iter()
            .copied()
            .find(|&u| trace.bit(win, u, bit) == Some(true))
            .ok_or_else(|| Error::State(format!("no logged predecessor of node {v} matches position {p}")))?;
        path.push(u);
        v = u;
    }
    path.reverse();
    Ok(path)
}
