use std::io;

use thiserror::Error;

/// Errors raised by graph construction, the DP engines, the cost model and the planner.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("duplicate edge ({src}, {dst})")]
    DuplicateEdge { src: u32, dst: u32 },
    #[error("graph is not acyclic: edge {from} -> {to} closes a cycle")]
    Cycle { from: u32, to: u32 },
    #[error("character {ch:?} is outside the alphabet {{A,C,G,T,N}}")]
    Alphabet { ch: char },
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("index error: {0}")]
    Index(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("consistency error: {0}")]
    Consistency(String),
    #[error("recursion error: {0}")]
    Recursion(String),
    #[error("capacity error: {0}")]
    Capacity(String),
    #[error("segment of length {len} does not fit window width {width}")]
    Width { len: usize, width: usize },
    #[error("no path of length {len} exists in the graph (longest is {longest})")]
    Length { len: usize, longest: usize },
    #[error("state error: {0}")]
    State(String),
    #[error("validation error: {0}")]
    Validation(String),
    #[error("descriptor error: {0}")]
    Descriptor(String),
    #[error("stage {stage} failed: {source}")]
    Stage {
        stage: usize,
        #[source]
        source: Box<Error>,
    },
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
