//! Windowed bit-parallel exact-prefix alignment of reads to genome graphs.

mod align;
mod batch;

pub use align::{
    align_reference, align_windowed, align_windowed_with, reconstruct_path, AlignOptions, AlignResult, AlignStats,
    AlignTrace, CarryMode, DEFAULT_TBM_BYTES, DEFAULT_WIDTH,
};
pub use batch::{
    batch_align, select_mapping, write_results_tsv, BatchConfig, BatchOutput, BatchTrace, GraphProfile,
    MappingMode, ReadResult, ReadTrace, UpdateKind,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Base;

/// Per-character match masks of one query window; bit `j` of `A` is set iff
/// the window's `j`-th character is `A`. `N` never matches.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaskTable {
    width: usize,
    words: usize,
    /// A, C, G, T masks followed by the all-zero N mask, `words` each.
    data: Vec<u64>,
}

impl MaskTable {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn words(&self) -> usize {
        self.words
    }

    pub fn mask(&self, b: Base) -> &[u64] {
        let c = b.code();
        &self.data[c * self.words..(c + 1) * self.words]
    }

    /// The mask as an integer (only meaningful for `width <= 128`).
    pub fn mask_u128(&self, b: Base) -> u128 {
        self.mask(b).iter().take(2).enumerate().fold(0u128, |acc, (i, &w)| acc | ((w as u128) << (64 * i)))
    }
}

pub(crate) fn words_for(width: usize) -> usize {
    width.div_ceil(64)
}

/// Builds masks for `segment` (at most `width` characters).
pub fn precompute_masks(segment: &[u8], width: usize) -> Result<MaskTable> {
    if width == 0 {
        return Err(Error::Argument("window width must be positive".into()));
    }
    if segment.len() > width {
        return Err(Error::Width { len: segment.len(), width });
    }
    let words = words_for(width);
    let mut data = vec![0u64; 5 * words];
    for (j, &ch) in segment.iter().enumerate() {
        let b = Base::from_byte(ch)?;
        if b != Base::N {
            data[b.code() * words + j / 64] |= 1u64 << (j % 64);
        }
    }
    Ok(MaskTable { width, words, data })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn act_masks() {
        let m = precompute_masks(b"ACT", 8).unwrap();
        assert_eq!(m.mask_u128(Base::A), 0b001);
        assert_eq!(m.mask_u128(Base::C), 0b010);
        assert_eq!(m.mask_u128(Base::T), 0b100);
        assert_eq!(m.mask_u128(Base::G), 0);
    }

    #[test]
    fn repeated_and_n() {
        assert_eq!(precompute_masks(b"AAAA", 8).unwrap().mask_u128(Base::A), 0b1111);
        let m = precompute_masks(b"ANA", 8).unwrap();
        for b in [Base::A, Base::C, Base::G, Base::T, Base::N] {
            assert_eq!(m.mask_u128(b) & 0b010, 0);
        }
    }

    #[test]
    fn too_long_segment() {
        assert!(matches!(precompute_masks(b"ACGTA", 4), Err(Error::Width { len: 5, width: 4 })));
        assert!(matches!(precompute_masks(b"AXG", 4), Err(Error::Alphabet { .. })));
    }

    #[test]
    fn wide_window_spans_words() {
        let seg: Vec<u8> = (0..130).map(|i| if i == 129 { b'G' } else { b'A' }).collect();
        let m = precompute_masks(&seg, 192).unwrap();
        assert_eq!(m.words(), 3);
        assert_eq!(m.mask(Base::G), &[0, 0, 0b10]);
        assert_eq!(m.mask(Base::A)[2], 0b01);
    }
}
