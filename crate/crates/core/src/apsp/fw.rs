use std::ops::{Add, AddAssign, Range};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::block::DistanceBlock;
use crate::error::{Error, Result};
use crate::weight::Weight;

/// Below this dimension the row loop stays sequential.
const PAR_MIN_DIM: usize = 256;

/// Work done by one pivot (or a sum over pivots).
///
/// `rows_touched` counts rows whose pivot-column entry was finite, so the row
/// was actually relaxed; `improvements` counts strict-improvement writes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PanelTrace {
    pub rows_touched: u64,
    pub improvements: u64,
}

impl Add for PanelTrace {
    type Output = PanelTrace;
    fn add(self, o: PanelTrace) -> PanelTrace {
        PanelTrace {
            rows_touched: self.rows_touched + o.rows_touched,
            improvements: self.improvements + o.improvements,
        }
    }
}

impl AddAssign for PanelTrace {
    fn add_assign(&mut self, o: PanelTrace) {
        *self = *self + o;
    }
}

impl std::iter::Sum for PanelTrace {
    fn sum<I: Iterator<Item = PanelTrace>>(iter: I) -> Self {
        iter.fold(PanelTrace::default(), Add::add)
    }
}

/// Aggregate record of closing one block with dense FW.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClosureTrace {
    pub dim: usize,
    pub pivots: usize,
    pub work: PanelTrace,
}

/// Aggregate record of a tiled (three-phase) FW closure.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockedTrace {
    pub dim: usize,
    pub tile: usize,
    /// Tiles per side.
    pub tiles: usize,
    /// Diagonal-tile closures, one per round.
    pub diagonal_ops: usize,
    /// Row and column panel tile updates.
    pub panel_ops: usize,
    /// Remaining-tile min-plus updates.
    pub inner_ops: usize,
    pub work: PanelTrace,
}

#[inline]
fn relax_row<W: Weight>(row: &mut [W], dik: W, pivot: &[W]) -> u64 {
    W::relax_row(row, dik, pivot)
}

/// One outer iteration of FW for pivot `k`: `d[i][j] = min(d[i][j], d[i][k] + d[k][j])`,
/// written only on strict improvement. Row and column `k` are left unchanged.
pub fn fw_panel_step<W: Weight>(b: &mut DistanceBlock<W>, k: usize) -> PanelTrace {
    let n = b.dim();
    assert!(k < n, "pivot {k} out of range for dim {n}");
    let pivot: Vec<W> = b.row(k).to_vec();
    let data = b.data_mut();
    let step = |(i, row): (usize, &mut [W])| -> PanelTrace {
        let dik = row[k];
        if i == k || dik.is_inf() {
            return PanelTrace::default();
        }
        PanelTrace { rows_touched: 1, improvements: relax_row(row, dik, &pivot) }
    };
    if n >= PAR_MIN_DIM {
        data.par_chunks_mut(n).enumerate().map(step).sum()
    } else {
        data.chunks_mut(n).enumerate().map(step).sum()
    }
}

/// Closes `b` in place and returns the aggregated trace.
pub fn floyd_warshall_in_place<W: Weight>(b: &mut DistanceBlock<W>) -> Result<ClosureTrace> {
    b.validate()?;
    let n = b.dim();
    let mut work = PanelTrace::default();
    for k in 0..n {
        work += fw_panel_step(b, k);
    }
    Ok(ClosureTrace { dim: n, pivots: n, work })
}

/// Dense FW closure of a copy of `b`.
pub fn floyd_warshall_dense<W: Weight>(b: &DistanceBlock<W>) -> Result<DistanceBlock<W>> {
    let mut out = b.clone();
    floyd_warshall_in_place(&mut out)?;
    Ok(out)
}

/// Relaxes the sub-rectangle `rows x cols` through each pivot in `pivots`, in order.
fn relax_region<W: Weight>(
    data: &mut [W],
    n: usize,
    pivots: Range<usize>,
    rows: &[Range<usize>],
    cols: &[Range<usize>],
) -> PanelTrace {
    let mut work = PanelTrace::default();
    let mut pivots_row: Vec<Vec<W>> = vec![Vec::new(); cols.len()];
    for k in pivots {
        for (seg, c) in pivots_row.iter_mut().zip(cols) {
            seg.clear();
            seg.extend_from_slice(&data[k * n + c.start..k * n + c.end]);
        }
        for r in rows {
            for i in r.clone() {
                let dik = data[i * n + k];
                if i == k || dik.is_inf() {
                    continue;
                }
                work.rows_touched += 1;
                for (seg, c) in pivots_row.iter().zip(cols) {
                    let row = &mut data[i * n + c.start..i * n + c.end];
                    work.improvements += relax_row(row, dik, seg);
                }
            }
        }
    }
    work
}

/// Three-phase tiled FW with square tiles of side `tile`; values equal
/// [`floyd_warshall_dense`]. Used when a level cannot be cut into tiles.
pub fn blocked_floyd_warshall<W: Weight>(b: &mut DistanceBlock<W>, tile: usize) -> Result<BlockedTrace> {
    if tile == 0 {
        return Err(Error::Argument("tile size must be positive".into()));
    }
    b.validate()?;
    let n = b.dim();
    let tiles = n.div_ceil(tile);
    let mut trace = BlockedTrace { dim: n, tile, tiles, ..Default::default() };
    let data = b.data_mut();
    for t in 0..tiles {
        let kr = t * tile..((t + 1) * tile).min(n);
        let before = 0..kr.start;
        let after = kr.end..n;
        let rest = [before.clone(), after.clone()];
        trace.work += relax_region(data, n, kr.clone(), std::slice::from_ref(&kr), std::slice::from_ref(&kr));
        trace.diagonal_ops += 1;
        trace.work += relax_region(data, n, kr.clone(), std::slice::from_ref(&kr), &rest);
        trace.work += relax_region(data, n, kr.clone(), &rest, std::slice::from_ref(&kr));
        trace.panel_ops += 2 * (tiles - 1);
        trace.work += relax_region(data, n, kr.clone(), &rest, &rest);
        trace.inner_ops += (tiles - 1) * (tiles - 1);
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weight::INF_SENTINEL;

    fn block(n: usize, arcs: &[(usize, usize, u32)]) -> DistanceBlock {
        let mut b = DistanceBlock::unreachable((0..n as u32).collect());
        for &(i, j, w) in arcs {
            b.set(i, j, w);
        }
        b
    }

    #[test]
    fn single_vertex() {
        let b = floyd_warshall_dense(&block(1, &[])).unwrap();
        assert_eq!(b.data(), &[0]);
    }

    #[test]
    fn four_vertex_example() {
        let b = block(4, &[(0, 1, 3), (1, 2, 4), (0, 2, 10), (2, 3, 1), (0, 3, 20)]);
        let d = floyd_warshall_dense(&b).unwrap();
        assert_eq!(d.get(0, 2), 7);
        assert_eq!(d.get(0, 3), 8);
        assert_eq!(d.get(1, 3), 5);
        assert_eq!(d.get(3, 0), INF_SENTINEL);
    }

    #[test]
    fn disconnected_pair_stays_infinite() {
        let d = floyd_warshall_dense(&block(2, &[])).unwrap();
        assert_eq!(d.get(0, 1), INF_SENTINEL);
        assert_eq!(d.get(1, 0), INF_SENTINEL);
    }

    #[test]
    fn negative_entry_is_a_domain_error() {
        let mut b = DistanceBlock::<f64>::unreachable(vec![0, 1]);
        b.set(0, 1, -1.0);
        assert!(matches!(floyd_warshall_dense(&b), Err(Error::Domain(_))));
    }

    #[test]
    fn single_relaxation_by_hand() {
        let mut b = block(3, &[(0, 1, 2), (1, 2, 2), (0, 2, 9)]);
        let t = fw_panel_step(&mut b, 1);
        assert_eq!(b.get(0, 2), 4);
        assert_eq!(t.improvements, 1);
    }

    #[test]
    fn isolated_pivot_changes_nothing() {
        let mut b = block(3, &[(0, 1, 2), (1, 0, 5)]);
        let before = b.clone();
        let t = fw_panel_step(&mut b, 2);
        assert_eq!(b, before);
        assert_eq!(t, PanelTrace::default());
    }

    #[test]
    fn zero_weight_cycle_keeps_incumbent() {
        let mut b = block(3, &[(0, 1, 0), (1, 0, 0), (0, 2, 4), (1, 2, 4)]);
        let t = fw_panel_step(&mut b, 0);
        assert_eq!(t.improvements, 0);
        assert_eq!(b.get(1, 2), 4);
    }
}
