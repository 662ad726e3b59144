use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const WORD_BYTES: f64 = 4.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Kernel {
    /// Textbook FW streaming operands from memory every inner iteration.
    FwClassic,
    /// FW over a resident `N x N` block.
    FwPartitioned,
    /// One windowed alignment node update; `n` is the window width.
    S2g,
}

/// Which memory traffic counts as bytes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Convention {
    /// FwClassic: reads of `d[i][j]`, `d[i][k]`, `d[k][j]` per inner iteration.
    ThreeRead,
    /// FwClassic: the three reads plus the write-back.
    ThreeReadOneWrite,
    /// FwPartitioned: the block is loaded once (`4 N^2` bytes).
    LoadOnly,
    /// FwPartitioned: loaded once and stored once.
    LoadStore,
    /// S2g: predecessor state read, own state write, 2-byte node record and a
    /// 4-byte predecessor reference.
    StateTraffic,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Intensity {
    pub kernel: Kernel,
    pub n: usize,
    pub convention: Convention,
    pub ops: f64,
    pub bytes: f64,
    pub ops_per_byte: f64,
}

/// Operations per byte; FW counts one add and one min per inner iteration,
/// alignment counts one shift-or and one mask-and per node update.
pub fn arithmetic_intensity(kernel: Kernel, n: usize, convention: Convention) -> Result<Intensity> {
    if n < 2 {
        return Err(Error::Argument(format!("n = {n} must be at least 2")));
    }
    let nf = n as f64;
    let (ops, bytes) = match (kernel, convention) {
        (Kernel::FwClassic, Convention::ThreeRead) => (2.0, 3.0 * WORD_BYTES),
        (Kernel::FwClassic, Convention::ThreeReadOneWrite) => (2.0, 4.0 * WORD_BYTES),
        (Kernel::FwPartitioned, Convention::LoadOnly) => (2.0 * nf.powi(3), WORD_BYTES * nf * nf),
        (Kernel::FwPartitioned, Convention::LoadStore) => (2.0 * nf.powi(3), 2.0 * WORD_BYTES * nf * nf),
        (Kernel::S2g, Convention::StateTraffic) => (2.0, 2.0 * (n.div_ceil(8) as f64) + 6.0),
        _ => return Err(Error::Argument(format!("convention {convention:?} does not apply to {kernel:?}"))),
    };
    Ok(Intensity { kernel, n, convention, ops, bytes, ops_per_byte: ops / bytes })
}
