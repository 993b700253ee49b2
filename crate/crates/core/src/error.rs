use thiserror::Error;

use crate::{EdgeId, FaceId, NodeId};

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("triangle {triangle} references vertex {index}, but only {vertex_count} vertices exist")]
    IndexOutOfRange {
        triangle: usize,
        index: usize,
        vertex_count: usize,
    },
    #[error("vertex {0} has a non-finite coordinate")]
    NonFinite(usize),
    #[error("face {0} is degenerate")]
    DegenerateFace(FaceId),
    #[error("epsilon must lie in (0, 1], got {0}")]
    EpsilonOutOfRange(f64),
    #[error("terrain needs at least 3 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("point ({x}, {y}, {z}) is not on the terrain surface")]
    OffSurface { x: f64, y: f64, z: f64 },
    #[error("unknown node id {0}")]
    UnknownNode(NodeId),
    #[error("no descending path reaches the target")]
    NoDescendingPath,
    #[error("operation requires a face- or edge-interior location")]
    WrongLocationKind,
    #[error("malformed path: {0}")]
    MalformedPath(String),
    #[error("points do not lie in the two faces adjacent to edge {0}")]
    FacesNotAdjacent(EdgeId),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
