//! Min-plus kernels and the recursive partitioned all-pairs shortest-path driver.

mod block;
mod export;
mod fw;
mod ops;
mod recursive;

pub use block::DistanceBlock;
pub use export::{read_matrix_binary, write_matrix_binary, write_matrix_tsv, MATRIX_MAGIC, TSV_LIMIT};
pub use fw::{
    blocked_floyd_warshall, floyd_warshall_dense, floyd_warshall_in_place, fw_panel_step, BlockedTrace,
    ClosureTrace, PanelTrace,
};
pub use ops::{inject, inject_in_place, min_plus_merge, min_plus_product, restrict, CrossBlock, MergeShape};
pub use recursive::{
    query_distance, recursive_apsp, recursive_apsp_with, ApspMode, ApspOptions, ApspResult, ExecutionTrace,
    InjectTrace, LevelTrace, MergeTrace, OutputMode, TopTrace, DEFAULT_DENSE_LIMIT, DEFAULT_MIN_SHRINK,
    MAX_OVERSIZE_DIM,
};
