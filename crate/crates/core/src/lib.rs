//! Approximate shortest descending paths on polyhedral terrains.
//!
//! A terrain is sliced by horizontal planes spaced `delta` apart (plus one
//! plane through every vertex); the plane/edge intersections become Steiner
//! nodes of an implicit directed graph whose links join nodes of a common
//! face in the non-ascending direction. A shortest-path tree over that graph
//! answers `(1 + epsilon)`-approximate shortest descending path queries from
//! a fixed source vertex to any point of the surface.
//!
//! The pipeline is:
//!
//! 1. [`Terrain`] load and validation, [`GeomParams`] extraction.
//! 2. [`Discretization`] with [`compute_delta`] and [`place_steiner`].
//! 3. [`DescendGraph`], searched by [`dijkstra`] or [`bushwhack`].
//! 4. [`query`] for arbitrary surface points.
//!
//! The [`oracle`] module holds independent checkers (descent verification,
//! snapped-path construction, unfolding on two faces) used by the tests.

pub mod descend_graph;
pub mod discretizer;
mod error;
pub mod generate;
pub mod geom;
pub mod oracle;
pub mod query;
pub mod sssp;
pub mod terrain;

pub use descend_graph::DescendGraph;
pub use discretizer::{compute_delta, node_bound, place_steiner, Discretization, Node, NodeKind};
pub use error::{Error, Result};
pub use oracle::{verify_descending, DescentReport, Path};
pub use query::{candidate_nodes, query, QueryAnswer, TerminalKind};
pub use sssp::{bushwhack, dijkstra, extract_path, SPTree, Solver};
pub use terrain::{GeomParams, Location, Terrain, ValidationReport, Violation};

pub type Point3 = nalgebra::Point3<f64>;
pub type Vector3 = nalgebra::Vector3<f64>;

pub type VertexId = usize;
pub type EdgeId = usize;
pub type FaceId = usize;
pub type NodeId = usize;
