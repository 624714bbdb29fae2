use thiserror::Error;

use crate::graph::VertexId;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GraphError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("input contains no edges")]
    EmptyGraph,
    #[error("pruning would remove every vertex")]
    CoreEmpty,
    #[error("i/o error: {0}")]
    Io(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error("superstep {superstep}: vertex {from} sent a message to non-neighbor {to}")]
    MessageToNonNeighbor { superstep: u64, from: VertexId, to: VertexId },
    #[error("run stopped by the superstep cap ({cap})")]
    SuperstepCapExceeded { cap: u64 },
    #[error("invalid partition map: {0}")]
    InvalidPartition(String),
    #[error("invalid engine configuration: {0}")]
    InvalidConfig(String),
    #[error("vertex program failed at vertex {vertex}: {message}")]
    Program { vertex: VertexId, message: String },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MergerError {
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("coarsening made no progress: {0}")]
    NoProgress(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlacerError {
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("coarse image of vertex {0} has no position")]
    MissingCoarsePosition(VertexId),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("drawing is degenerate: mean edge length is zero")]
    DegenerateDrawing,
    #[error("no edges to measure")]
    NoEdges,
    #[error("unsupported export format {0:?}")]
    UnsupportedFormat(String),
}

/// Pipeline-level error carrying the phase in which it surfaced.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{phase}: {source}")]
    Graph { phase: &'static str, source: GraphError },
    #[error("{phase}: {source}")]
    Engine { phase: &'static str, source: EngineError },
    #[error("{phase}: {source}")]
    Merger { phase: &'static str, source: MergerError },
    #[error("{phase}: {source}")]
    Placer { phase: &'static str, source: PlacerError },
    #[error("{phase}: {source}")]
    Metrics { phase: &'static str, source: MetricsError },
    #[error("{phase}: {message}")]
    Io { phase: &'static str, message: String },
    #[error("configuration: {0}")]
    Config(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
}

impl Error {
    pub fn io(phase: &'static str, err: impl std::fmt::Display) -> Self {
        Error::Io { phase, message: err.to_string() }
    }
}
