use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::block::DistanceBlock;
use crate::error::{Error, Result};
use crate::weight::Weight;

fn locate(map: &HashMap<u32, usize>, vs: &[u32], what: &str) -> Result<Vec<usize>> {
    vs.iter()
        .map(|v| map.get(v).copied().ok_or_else(|| Error::Index(format!("vertex {v} is not in the {what} block"))))
        .collect()
}

/// `|B| x |B|` sub-block over the given global ids, in the given order.
pub fn restrict<W: Weight>(d: &DistanceBlock<W>, boundary: &[u32]) -> Result<DistanceBlock<W>> {
    let idx = locate(&d.index_map(), boundary, "source")?;
    let mut data = Vec::with_capacity(idx.len() * idx.len());
    for &i in &idx {
        let row = d.row(i);
        data.extend(idx.iter().map(|&j| row[j]));
    }
    DistanceBlock::new(boundary.to_vec(), data)
}

/// Lowers boundary-pair entries of `d` to `min(d, db)` in place; returns the
/// number of entries that strictly improved. Other entries are untouched.
pub fn inject_in_place<W: Weight>(db: &DistanceBlock<W>, boundary: &[u32], d: &mut DistanceBlock<W>) -> Result<usize> {
    let src = locate(&db.index_map(), boundary, "boundary")?;
    let dst = locate(&d.index_map(), boundary, "target")?;
    let mut improved = 0;
    for (a, &si) in src.iter().enumerate() {
        let di = dst[a];
        for (b, &sj) in src.iter().enumerate() {
            let w = db.get(si, sj);
            let dj = dst[b];
            if w < d.get(di, dj) {
                d.set(di, dj, w);
                improved += 1;
            }
        }
    }
    Ok(improved)
}

/// Copying form of [`inject_in_place`]; the caller re-closes the result.
pub fn inject<W: Weight>(db: &DistanceBlock<W>, boundary: &[u32], d: &DistanceBlock<W>) -> Result<DistanceBlock<W>> {
    let mut out = d.clone();
    inject_in_place(db, boundary, &mut out)?;
    Ok(out)
}

/// Row-major min-plus product of `a` (`rows x inner`) and `b` (`inner x cols`).
pub fn min_plus_product<W: Weight>(a: &[W], rows: usize, inner: usize, b: &[W], cols: usize) -> Vec<W> {
    debug_assert_eq!(a.len(), rows * inner);
    debug_assert_eq!(b.len(), inner * cols);
    let mut out = vec![W::INF; rows * cols];
    for m in 0..rows {
        let dst = &mut out[m * cols..(m + 1) * cols];
        for i in 0..inner {
            let am = a[m * inner + i];
            if am.is_inf() {
                continue;
            }
            for (o, &bv) in dst.iter_mut().zip(&b[i * cols..(i + 1) * cols]) {
                let c = am.sat_add(bv);
                if c < *o {
                    *o = c;
                }
            }
        }
    }
    out
}

/// Cross-component distances: rows are `d1`'s vertices, columns `d2`'s.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossBlock<W = u32> {
    pub rows: Vec<u32>,
    pub cols: Vec<u32>,
    pub data: Vec<W>,
}

impl<W: Weight> CrossBlock<W> {
    pub fn get(&self, i: usize, j: usize) -> W {
        self.data[i * self.cols.len() + j]
    }
}

/// Shape of one two-stage merge, as seen by the reduction hardware: each
/// stage is `rows` min-reductions of `width` candidates.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MergeShape {
    pub stage1_rows: usize,
    pub stage1_width: usize,
    pub stage2_rows: usize,
    pub stage2_width: usize,
}

impl MergeShape {
    pub fn new(c1: usize, b1: usize, b2: usize, c2: usize) -> Self {
        MergeShape { stage1_rows: c1 * b2, stage1_width: b1, stage2_rows: c1 * c2, stage2_width: b2 }
    }
}

/// `result[m][n] = min over i in b1, j in b2 of d1[m][i] + db[i][j] + d2[j][n]`,
/// evaluated as `(d1[:, b1] * db[b1, b2]) * d2[b2, :]` in the min-plus semiring.
/// An empty boundary on either side yields an all-`INF` block.
pub fn min_plus_merge<W: Weight>(
    d1: &DistanceBlock<W>,
    db: &DistanceBlock<W>,
    d2: &DistanceBlock<W>,
    b1: &[u32],
    b2: &[u32],
) -> Result<(CrossBlock<W>, MergeShape)> {
    let (r, c) = (d1.dim(), d2.dim());
    let shape = MergeShape::new(r, b1.len(), b2.len(), c);
    if b1.is_empty() || b2.is_empty() {
        let data = vec![W::INF; r * c];
        return Ok((CrossBlock { rows: d1.ids().to_vec(), cols: d2.ids().to_vec(), data }, shape));
    }
    let i1 = locate(&d1.index_map(), b1, "first component")?;
    let db_map = db.index_map();
    let ib1 = locate(&db_map, b1, "boundary")?;
    let ib2 = locate(&db_map, b2, "boundary")?;
    let i2 = locate(&d2.index_map(), b2, "second component")?;

    let mut left = Vec::with_capacity(r * b1.len());
    for m in 0..r {
        let row = d1.row(m);
        left.extend(i1.iter().map(|&i| row[i]));
    }
    let mut mid = Vec::with_capacity(b1.len() * b2.len());
    for &i in &ib1 {
        let row = db.row(i);
        mid.extend(ib2.iter().map(|&j| row[j]));
    }
    let mut right = Vec::with_capacity(b2.len() * c);
    for &j in &i2 {
        right.extend_from_slice(d2.row(j));
    }
    let t = min_plus_product(&left, r, b1.len(), &mid, b2.len());
    let data = min_plus_product(&t, r, b2.len(), &right, c);
    Ok((CrossBlock { rows: d1.ids().to_vec(), cols: d2.ids().to_vec(), data }, shape))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weight::INF_SENTINEL;

    fn ids(n: u32) -> Vec<u32> {
        (0..n).collect()
    }

    #[test]
    fn restrict_to_all_is_copy() {
        let mut d = DistanceBlock::<u32>::unreachable(vec![4, 7, 9]);
        d.set(0, 2, 3);
        let r = restrict(&d, &[4, 7, 9]).unwrap();
        assert_eq!(r, d);
        let one = restrict(&d, &[7]).unwrap();
        assert_eq!(one.data(), &[0]);
        assert!(matches!(restrict(&d, &[5]), Err(Error::Index(_))));
    }

    #[test]
    fn inject_takes_minimum() {
        let mut d = DistanceBlock::<u32>::unreachable(ids(3));
        d.set(0, 1, 10);
        let mut db = DistanceBlock::unreachable(vec![0, 1]);
        db.set(0, 1, 4);
        db.set(1, 0, 20);
        let out = inject(&db, &[0, 1], &d).unwrap();
        assert_eq!(out.get(0, 1), 4);
        assert_eq!(out.get(1, 0), 20);
        assert_eq!(out.get(0, 2), INF_SENTINEL);
        let all_inf = DistanceBlock::<u32>::new(vec![0, 1], vec![INF_SENTINEL; 4]).unwrap();
        assert_eq!(inject(&all_inf, &[0, 1], &d).unwrap(), d);
    }

    #[test]
    fn merge_through_single_gateway() {
        let mut d1 = DistanceBlock::<u32>::unreachable(vec![0, 1]);
        d1.set(0, 1, 2);
        let mut d2 = DistanceBlock::<u32>::unreachable(vec![2, 3]);
        d2.set(0, 1, 5);
        let mut db = DistanceBlock::<u32>::unreachable(vec![1, 2]);
        db.set(0, 1, 7);
        let (x, shape) = min_plus_merge(&d1, &db, &d2, &[1], &[2]).unwrap();
        assert_eq!(x.get(0, 0), 2 + 7);
        assert_eq!(x.get(0, 1), 2 + 7 + 5);
        assert_eq!(x.get(1, 1), 7 + 5);
        assert_eq!(shape, MergeShape { stage1_rows: 2, stage1_width: 1, stage2_rows: 4, stage2_width: 1 });
    }

    #[test]
    fn merge_with_unreachable_boundary_is_infinite() {
        let d1 = DistanceBlock::<u32>::unreachable(vec![0, 1]);
        let d2 = DistanceBlock::<u32>::unreachable(vec![2, 3]);
        let db = DistanceBlock::<u32>::unreachable(vec![1, 2]);
        let (x, _) = min_plus_merge(&d1, &db, &d2, &[1], &[2]).unwrap();
        assert!(x.data.iter().all(|&w| w == INF_SENTINEL));
        let (e, _) = min_plus_merge(&d1, &db, &d2, &[], &[2]).unwrap();
        assert!(e.data.iter().all(|&w| w == INF_SENTINEL));
    }
}
