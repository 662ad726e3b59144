//! Scalar types usable as min-plus distances.
//!
//! Every distance kernel is generic over [`Weight`]. Integer weights saturate
//! at a sentinel so that `INF ⊕ x == INF` never overflows; floating point
//! weights use IEEE infinity.

use std::fmt::Debug;

use num_traits::{NumCast, Zero};

/// Absence-of-path sentinel for the 32-bit datapath.
pub const INF_SENTINEL: u32 = (1u32 << 31) - 1;

/// Largest weight accepted on an input edge.
pub const MAX_EDGE_WEIGHT: u32 = INF_SENTINEL / 2;

/// A totally ordered, non-negative distance scalar with a saturating add.
pub trait Weight:
    Copy + PartialOrd + PartialEq + Zero + NumCast + Debug + Send + Sync + 'static
{
    /// The unreachable sentinel; `INF.sat_add(x) == INF` for every valid `x`.
    const INF: Self;

    /// Largest weight accepted on an input edge (`INF / 2` for integers).
    const MAX_EDGE: Self;

    /// Width in bits of the stored value.
    const BITS: u32;

    /// Addition that clamps at [`Weight::INF`].
    fn sat_add(self, rhs: Self) -> Self;

    #[inline]
    fn is_inf(self) -> bool {
        self >= Self::INF
    }

    #[inline]
    fn min_w(self, rhs: Self) -> Self {
        if rhs < self {
            rhs
        } else {
            self
        }
    }

    /// Converts between weight types, mapping `INF` to `INF`.
    fn cast<V: Weight>(self) -> V {
        if self.is_inf() {
            V::INF
        } else {
            <V as NumCast>::from(self).unwrap_or(V::INF)
        }
    }

    /// `row[j] = min(row[j], dik + pivot[j])` with strict-improvement writes;
    /// returns the number of entries written.
    #[inline]
    fn relax_row(row: &mut [Self], dik: Self, pivot: &[Self]) -> u64 {
        let mut improved = 0u64;
        for (dst, &pk) in row.iter_mut().zip(pivot) {
            let cand = dik.sat_add(pk);
            let better = cand < *dst;
            if better {
                *dst = cand;
            }
            improved += better as u64;
        }
        improved
    }

    /// Converts an edge weight; `u32` values at or above `INF_SENTINEL` map to `INF`.
    fn from_edge(w: u32) -> Self {
        if w >= INF_SENTINEL {
            Self::INF
        } else {
            <Self as NumCast>::from(w).unwrap_or(Self::INF)
        }
    }
}

impl Weight for u32 {
    const INF: Self = INF_SENTINEL;
    const MAX_EDGE: Self = MAX_EDGE_WEIGHT;
    const BITS: u32 = 32;

    #[inline(always)]
    fn sat_add(self, rhs: Self) -> Self {
        // Both operands are <= 2^31 - 1, so the sum fits in u32.
        let s = self.wrapping_add(rhs);
        if s > INF_SENTINEL {
            INF_SENTINEL
        } else {
            s
        }
    }

    #[inline]
    fn relax_row(row: &mut [u32], dik: u32, pivot: &[u32]) -> u64 {
        // Values are at most i32::MAX, so signed lanes give the same order and a
        // sum above the sentinel shows up as a negative lane.
        let mut improved = 0u64;
        for (rc, pc) in row.chunks_mut(1024).zip(pivot.chunks(1024)) {
            let mut count = 0u32;
            for (dst, &pk) in rc.iter_mut().zip(pc) {
                let s = dik.wrapping_add(pk) as i32;
                let cand = if s < 0 { i32::MAX } else { s };
                let cur = *dst as i32;
                let better = cand < cur;
                *dst = (if better { cand } else { cur }) as u32;
                count += better as u32;
            }
            improved += count as u64;
        }
        improved
    }
}

impl Weight for u64 {
    const INF: Self = (1u64 << 63) - 1;
    const MAX_EDGE: Self = ((1u64 << 63) - 1) / 2;
    const BITS: u32 = 64;

    #[inline(always)]
    fn sat_add(self, rhs: Self) -> Self {
        let s = self.wrapping_add(rhs);
        if s > Self::INF {
            Self::INF
        } else {
            s
        }
    }
}

impl Weight for f32 {
    const INF: Self = f32::INFINITY;
    const MAX_EDGE: Self = f32::MAX;
    const BITS: u32 = 32;

    #[inline(always)]
    fn sat_add(self, rhs: Self) -> Self {
        self + rhs
    }
}

impl Weight for f64 {
    const INF: Self = f64::INFINITY;
    const MAX_EDGE: Self = f64::MAX;
    const BITS: u32 = 64;

    #[inline(always)]
    fn sat_add(self, rhs: Self) -> Self {
        self + rhs
    }
}
