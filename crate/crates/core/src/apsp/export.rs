use std::io::{Read, Write};

use super::block::DistanceBlock;
use crate::error::{Error, Result};
use crate::weight::INF_SENTINEL;

/// Header magic of the binary matrix format ("APSP", little-endian).
pub const MATRIX_MAGIC: u32 = u32::from_le_bytes(*b"APSP");

/// Largest dimension exported as TSV.
pub const TSV_LIMIT: usize = 512;

/// 8-byte header (magic, n) followed by `n * n` little-endian `u32`, row-major.
pub fn write_matrix_binary<Wr: Write>(d: &DistanceBlock<u32>, mut out: Wr) -> Result<()> {
    out.write_all(&MATRIX_MAGIC.to_le_bytes())?;
    out.write_all(&(d.dim() as u32).to_le_bytes())?;
    let mut buf = Vec::with_capacity(d.data().len() * 4);
    for &w in d.data() {
        buf.extend_from_slice(&w.to_le_bytes());
    }
    out.write_all(&buf)?;
    Ok(())
}

pub fn read_matrix_binary<R: Read>(mut input: R) -> Result<DistanceBlock<u32>> {
    let mut head = [0u8; 8];
    input.read_exact(&mut head)?;
    let magic = u32::from_le_bytes(head[0..4].try_into().expect("4 bytes"));
    if magic != MATRIX_MAGIC {
        return Err(Error::Parse { line: 0, msg: format!("bad matrix magic {magic:#010x}") });
    }
    let n = u32::from_le_bytes(head[4..8].try_into().expect("4 bytes")) as usize;
    let mut raw = vec![0u8; n * n * 4];
    input.read_exact(&mut raw)?;
    let data = raw.chunks_exact(4).map(|c| u32::from_le_bytes(c.try_into().expect("4 bytes"))).collect();
    DistanceBlock::new((0..n as u32).collect(), data)
}

/// Tab-separated rows; unreachable entries print as `inf`.
pub fn write_matrix_tsv<Wr: Write>(d: &DistanceBlock<u32>, mut out: Wr) -> Result<()> {
    if d.dim() > TSV_LIMIT {
        return Err(Error::Capacity(format!("TSV export is limited to n <= {TSV_LIMIT}, got {}", d.dim())));
    }
    let mut line = String::new();
    for i in 0..d.dim() {
        line.clear();
        for (j, &w) in d.row(i).iter().enumerate() {
            if j > 0 {
                line.push('\t');
            }
            if w >= INF_SENTINEL {
                line.push_str("inf");
            } else {
                line.push_str(&w.to_string());
            }
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}
