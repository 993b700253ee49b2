//! Steiner point placement by horizontal slicing.
//!
//! Non-level edges get a node wherever they cross a plane `z = j * delta` or
//! a plane through some vertex height. Level edges are split into equal parts
//! no longer than `delta * sec(theta)`. Node ids: terrain vertices first, in
//! input order, then Steiner points grouped by edge id and sorted along the
//! edge.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::terrain::{GeomParams, Terrain};
use crate::{EdgeId, NodeId, Point3, VertexId};

/// Intersections closer than this (as an edge-parameter gap) are merged.
const MERGE_PARAM_TOL: f64 = 1e-12;

/// `epsilon * h * cos(theta) / (4 n)`.
pub fn compute_delta(params: &GeomParams, epsilon: f64, n: usize) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::EpsilonOutOfRange(epsilon));
    }
    if n < 3 {
        return Err(Error::TooFewVertices(n));
    }
    Ok(epsilon * params.min_height * params.cos_theta / (4.0 * n as f64))
}

/// Per-edge node-count bound `c = 5 n (L / h) (1 / epsilon) sec(theta)`.
pub fn node_bound(params: &GeomParams, epsilon: f64, n: usize) -> f64 {
    5.0 * n as f64 * (params.longest_edge / params.min_height) * (1.0 / epsilon) * params.sec_theta
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum NodeKind {
    Vertex(VertexId),
    /// Interior point of `edge` at parameter `t`, `index`-th in the edge's
    /// node sequence (endpoints included).
    Steiner { edge: EdgeId, t: f64, index: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Node {
    /// Position; `pos.z` is the node height exactly.
    pub pos: Point3,
    pub kind: NodeKind,
}

impl Node {
    pub fn height(&self) -> f64 {
        self.pos.z
    }

    pub fn is_vertex(&self) -> bool {
        matches!(self.kind, NodeKind::Vertex(_))
    }
}

#[derive(Debug, Clone)]
pub struct Discretization {
    delta: f64,
    epsilon: Option<f64>,
    bound: f64,
    vertex_count: usize,
    nodes: Vec<Node>,
    /// Node ids along each edge from `v[0]` to `v[1]`, endpoints included.
    edge_nodes: Vec<Vec<NodeId>>,
}

impl Discretization {
    /// Computes `delta` for `epsilon` and places the Steiner points.
    pub fn new(terrain: &Terrain, params: &GeomParams, epsilon: f64) -> Result<Self> {
        let delta = compute_delta(params, epsilon, terrain.vertex_count())?;
        let mut d = place_steiner(terrain, params, delta);
        d.epsilon = Some(epsilon);
        d.bound = node_bound(params, epsilon, terrain.vertex_count());
        Ok(d)
    }

    /// Builds a discretization from explicit interior edge parameters.
    ///
    /// Heights are interpolated along each edge. Used to compare the slicing
    /// placement against arbitrary per-edge placements.
    pub fn from_edge_params(terrain: &Terrain, params: &[Vec<f64>]) -> Result<Self> {
        if params.len() != terrain.edge_count() {
            return Err(Error::InvalidParameter(format!(
                "expected parameters for {} edges, got {}",
                terrain.edge_count(),
                params.len()
            )));
        }
        let per_edge = params
            .iter()
            .enumerate()
            .map(|(e, ts)| {
                let (a, b) = terrain.edge_points(e);
                let mut ts: Vec<f64> = ts.iter().copied().filter(|t| *t > 0.0 && *t < 1.0).collect();
                ts.sort_by(f64::total_cmp);
                ts.dedup();
                ts.into_iter().map(|t| (t, a.z + (b.z - a.z) * t)).collect()
            })
            .collect();
        Ok(assemble(terrain, f64::NAN, f64::NAN, per_edge))
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn epsilon(&self) -> Option<f64> {
        self.epsilon
    }

    /// The per-edge node-count bound `c`.
    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id]
    }

    /// Checked node lookup.
    pub fn node_at(&self, id: NodeId) -> Result<&Node> {
        self.nodes.get(id).ok_or(Error::UnknownNode(id))
    }

    pub fn height(&self, id: NodeId) -> f64 {
        self.nodes[id].pos.z
    }

    pub fn edge_nodes(&self, e: EdgeId) -> &[NodeId] {
        &self.edge_nodes[e]
    }

    /// Edges incident to a node: all incident edges for a vertex, the
    /// carrying edge for a Steiner point.
    pub fn node_edges<'a>(&self, terrain: &'a Terrain, id: NodeId) -> NodeEdges<'a> {
        match self.nodes[id].kind {
            NodeKind::Vertex(v) => NodeEdges::Many(terrain.vertex_edges(v)),
            NodeKind::Steiner { edge, .. } => NodeEdges::One(edge),
        }
    }

    /// Position of a node within an edge's sequence, if it lies on the edge.
    pub fn index_on_edge(&self, terrain: &Terrain, id: NodeId, e: EdgeId) -> Option<usize> {
        match self.nodes[id].kind {
            NodeKind::Steiner { edge, index, .. } => (edge == e).then_some(index),
            NodeKind::Vertex(v) => {
                let [a, b] = terrain.edge(e).v;
                if v == a {
                    Some(0)
                } else if v == b {
                    Some(self.edge_nodes[e].len() - 1)
                } else {
                    None
                }
            }
        }
    }

    /// Per-edge node counts, endpoints included.
    pub fn edge_node_counts(&self) -> Vec<usize> {
        self.edge_nodes.iter().map(Vec::len).collect()
    }
}

pub enum NodeEdges<'a> {
    One(EdgeId),
    Many(&'a [EdgeId]),
}

impl NodeEdges<'_> {
    pub fn contains(&self, e: EdgeId) -> bool {
        match self {
            NodeEdges::One(x) => *x == e,
            NodeEdges::Many(es) => es.contains(&e),
        }
    }

    pub fn to_vec(&self) -> Vec<EdgeId> {
        match self {
            NodeEdges::One(x) => vec![*x],
            NodeEdges::Many(es) => es.to_vec(),
        }
    }
}

/// Places Steiner points for plane spacing `delta`.
pub fn place_steiner(terrain: &Terrain, params: &GeomParams, delta: f64) -> Discretization {
    assert!(delta > 0.0, "delta must be positive");
    let mut vertex_heights: Vec<f64> = terrain.vertices().iter().map(|p| p.z).collect();
    vertex_heights.sort_by(f64::total_cmp);
    vertex_heights.dedup();

    let level_spacing = delta * params.sec_theta;
    let per_edge = (0..terrain.edge_count())
        .map(|e| {
            let (a, b) = terrain.edge_points(e);
            if terrain.is_level(e) {
                level_params(terrain.edge_length(e), level_spacing, a.z)
            } else {
                plane_params(a.z, b.z, delta, &vertex_heights)
            }
        })
        .collect();
    let mut d = assemble(terrain, delta, f64::NAN, per_edge);
    // c = 5 n (L/h)(1/eps) sec(theta) expressed through delta.
    d.bound = 1.25 * params.longest_edge / delta;
    d
}

fn level_params(len: f64, spacing: f64, z: f64) -> Vec<(f64, f64)> {
    let parts = (len / spacing).ceil().max(1.0) as usize;
    (1..parts).map(|i| (i as f64 / parts as f64, z)).collect()
}

/// Interior `(t, z)` pairs where the edge from height `za` to `zb` crosses a
/// slicing plane, merged and sorted by `t`.
fn plane_params(za: f64, zb: f64, delta: f64, vertex_heights: &[f64]) -> Vec<(f64, f64)> {
    let (lo, hi) = (za.min(zb), za.max(zb));
    // (t, z, from a vertex plane)
    let mut cuts: Vec<(f64, f64, bool)> = Vec::new();
    let to_t = |z: f64| (z - za) / (zb - za);

    let first = vertex_heights.partition_point(|&z| z <= lo);
    let last = vertex_heights.partition_point(|&z| z < hi);
    for &z in &vertex_heights[first..last] {
        cuts.push((to_t(z), z, true));
    }

    let j_lo = (lo / delta).floor() as i64;
    let j_hi = (hi / delta).ceil() as i64;
    for j in j_lo..=j_hi {
        let z = j as f64 * delta;
        if z > lo && z < hi {
            cuts.push((to_t(z), z, false));
        }
    }
    cuts.sort_by(|x, y| x.0.total_cmp(&y.0).then(y.2.cmp(&x.2)));

    let mut out: Vec<(f64, f64, bool)> = Vec::with_capacity(cuts.len());
    for c in cuts {
        if c.0 <= MERGE_PARAM_TOL || c.0 >= 1.0 - MERGE_PARAM_TOL {
            continue;
        }
        match out.last_mut() {
            Some(prev) if c.0 - prev.0 <= MERGE_PARAM_TOL => {
                if c.2 && !prev.2 {
                    *prev = c;
                }
            }
            _ => out.push(c),
        }
    }
    out.into_iter().map(|(t, z, _)| (t, z)).collect()
}

fn assemble(terrain: &Terrain, delta: f64, bound: f64, per_edge: Vec<Vec<(f64, f64)>>) -> Discretization {
    let n = terrain.vertex_count();
    let mut nodes: Vec<Node> = terrain
        .vertices()
        .iter()
        .enumerate()
        .map(|(v, p)| Node {
            pos: *p,
            kind: NodeKind::Vertex(v),
        })
        .collect();
    let mut edge_nodes = Vec::with_capacity(per_edge.len());
    for (e, cuts) in per_edge.into_iter().enumerate() {
        let [va, vb] = terrain.edge(e).v;
        let (a, b) = terrain.edge_points(e);
        let mut seq = Vec::with_capacity(cuts.len() + 2);
        seq.push(va);
        for (i, (t, z)) in cuts.into_iter().enumerate() {
            let mut pos = a + (b - a) * t;
            pos.z = z;
            seq.push(nodes.len());
            nodes.push(Node {
                pos,
                kind: NodeKind::Steiner {
                    edge: e,
                    t,
                    index: i + 1,
                },
            });
        }
        seq.push(vb);
        edge_nodes.push(seq);
    }
    Discretization {
        delta,
        epsilon: None,
        bound,
        vertex_count: n,
        nodes,
        edge_nodes,
    }
}
