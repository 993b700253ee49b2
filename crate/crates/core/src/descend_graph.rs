//! The implicit descending graph over vertices and Steiner points.
//!
//! A link `x -> y` exists iff `x` and `y` lie on the boundary of a common
//! face, `h(x) >= h(y)`, and the two are not points of one edge unless both
//! are terrain vertices. Links are enumerated on demand and never stored.

use crate::discretizer::{Discretization, NodeKind};
use crate::error::{Error, Result};
use crate::terrain::Terrain;
use crate::{FaceId, NodeId};

#[derive(Debug, Clone, Copy)]
pub struct DescendGraph<'a> {
    terrain: &'a Terrain,
    disc: &'a Discretization,
    edge_chords: bool,
}

impl<'a> DescendGraph<'a> {
    pub fn new(terrain: &'a Terrain, disc: &'a Discretization) -> Self {
        Self {
            terrain,
            disc,
            edge_chords: false,
        }
    }

    /// Also link consecutive nodes of one edge (off by default).
    pub fn with_edge_chords(mut self, on: bool) -> Self {
        self.edge_chords = on;
        self
    }

    pub fn terrain(&self) -> &'a Terrain {
        self.terrain
    }

    pub fn discretization(&self) -> &'a Discretization {
        self.disc
    }

    pub fn edge_chords(&self) -> bool {
        self.edge_chords
    }

    pub fn node_count(&self) -> usize {
        self.disc.node_count()
    }

    fn check(&self, id: NodeId) -> Result<()> {
        if id < self.disc.node_count() {
            Ok(())
        } else {
            Err(Error::UnknownNode(id))
        }
    }

    /// Faces whose boundary contains the node, in increasing id order.
    pub fn faces_of(&self, id: NodeId) -> Vec<FaceId> {
        let mut fs = match self.disc.node(id).kind {
            NodeKind::Vertex(v) => self.terrain.vertex_faces(v).to_vec(),
            NodeKind::Steiner { edge, .. } => self.terrain.edge(edge).faces.clone(),
        };
        fs.sort_unstable();
        fs
    }

    /// Boundary nodes of a face in increasing id order.
    pub fn face_nodes(&self, f: FaceId) -> Vec<NodeId> {
        let mut out = Vec::new();
        self.for_each_face_node(f, |y| out.push(y));
        out
    }

    fn for_each_face_node(&self, f: FaceId, mut visit: impl FnMut(NodeId)) {
        let mut verts = self.terrain.triangle(f);
        verts.sort_unstable();
        for v in verts {
            visit(v);
        }
        let mut edges = self.terrain.face_edges(f);
        edges.sort_unstable();
        for e in edges {
            let seq = self.disc.edge_nodes(e);
            for &y in &seq[1..seq.len() - 1] {
                visit(y);
            }
        }
    }

    fn consecutive_on_edge(&self, x: NodeId, y: NodeId) -> bool {
        let (nx, ny) = (self.disc.node(x), self.disc.node(y));
        let edge = match (nx.kind, ny.kind) {
            (NodeKind::Steiner { edge, .. }, _) | (_, NodeKind::Steiner { edge, .. }) => edge,
            _ => return false,
        };
        match (
            self.disc.index_on_edge(self.terrain, x, edge),
            self.disc.index_on_edge(self.terrain, y, edge),
        ) {
            (Some(i), Some(j)) => i.abs_diff(j) == 1,
            _ => false,
        }
    }

    fn share_edge(&self, x: NodeId, y: NodeId) -> bool {
        let ex = self.disc.node_edges(self.terrain, x);
        match self.disc.node(y).kind {
            NodeKind::Steiner { edge, .. } => ex.contains(edge),
            NodeKind::Vertex(v) => self.terrain.vertex_edges(v).iter().any(|&e| ex.contains(e)),
        }
    }

    fn link_rule(&self, x: NodeId, y: NodeId) -> bool {
        if x == y || self.disc.height(x) < self.disc.height(y) {
            return false;
        }
        if !self.share_edge(x, y) {
            return true;
        }
        let both_vertices = self.disc.node(x).is_vertex() && self.disc.node(y).is_vertex();
        both_vertices || (self.edge_chords && self.consecutive_on_edge(x, y))
    }

    pub fn link_exists(&self, x: NodeId, y: NodeId) -> Result<bool> {
        self.check(x)?;
        self.check(y)?;
        let fy = self.faces_of(y);
        let common = self.faces_of(x).iter().any(|f| fy.contains(f));
        Ok(common && self.link_rule(x, y))
    }

    /// Weight of the segment `xy`.
    pub fn weight(&self, x: NodeId, y: NodeId) -> f64 {
        (self.disc.node(x).pos - self.disc.node(y).pos).norm()
    }

    /// Calls `visit(y, |xy|)` for every link `x -> y`, ordered by face id
    /// then node id. Each neighbor is reported once.
    pub fn for_each_out_link(&self, x: NodeId, mut visit: impl FnMut(NodeId, f64)) {
        let hx = self.disc.height(x);
        let px = self.disc.node(x).pos;
        let x_vertex = self.disc.node(x).is_vertex();
        let ex = self.disc.node_edges(self.terrain, x);
        for f in self.faces_of(x) {
            self.for_each_face_node(f, |y| {
                if y == x || self.disc.height(y) > hx {
                    return;
                }
                let ny = self.disc.node(y);
                let on_common_edge = match ny.kind {
                    NodeKind::Steiner { edge, .. } => ex.contains(edge),
                    NodeKind::Vertex(v) => self.terrain.vertex_edges(v).iter().any(|&e| ex.contains(e)),
                };
                if on_common_edge {
                    if x_vertex && ny.is_vertex() {
                        // Two vertices of a face share the edge between them;
                        // report the link from the lowest face on that edge only.
                        let NodeKind::Vertex(v) = ny.kind else { unreachable!() };
                        let NodeKind::Vertex(u) = self.disc.node(x).kind else { unreachable!() };
                        let e = self.terrain.edge_between(u, v).expect("face vertices share an edge");
                        if self.terrain.edge(e).faces.iter().min() != Some(&f) {
                            return;
                        }
                    } else if !(self.edge_chords && self.consecutive_on_edge(x, y)) {
                        return;
                    } else {
                        let edge = match (self.disc.node(x).kind, ny.kind) {
                            (NodeKind::Steiner { edge, .. }, _) | (_, NodeKind::Steiner { edge, .. }) => edge,
                            _ => unreachable!(),
                        };
                        if self.terrain.edge(edge).faces.iter().min() != Some(&f) {
                            return;
                        }
                    }
                }
                visit(y, (ny.pos - px).norm());
            });
        }
    }

    pub fn out_neighbors(&self, x: NodeId) -> Result<Vec<(NodeId, f64)>> {
        self.check(x)?;
        let mut out = Vec::new();
        self.for_each_out_link(x, |y, w| out.push((y, w)));
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate;

    fn ramp_disc(eps: f64) -> (Terrain, Discretization) {
        let t = generate::ramp(1.0).unwrap();
        let p = t.geometry_params().unwrap();
        let d = Discretization::new(&t, &p, eps).unwrap();
        (t, d)
    }

    #[test]
    fn ramp_link_examples() {
        let (t, d) = ramp_disc(1.0);
        let g = DescendGraph::new(&t, &d);
        let bc = d.edge_nodes(1);
        assert!(g.link_exists(0, bc[5]).unwrap());
        let ac = d.edge_nodes(2);
        assert!(!g.link_exists(ac[3], ac[7]).unwrap());
        assert!(!g.link_exists(2, 0).unwrap());
        assert!(g.link_exists(0, 1).unwrap());
        assert!(g.link_exists(1, 0).unwrap());
        assert!(matches!(g.link_exists(0, 10_000), Err(Error::UnknownNode(_))));
    }

    #[test]
    fn ramp_out_degree_of_top_vertex() {
        let (t, d) = ramp_disc(1.0);
        let g = DescendGraph::new(&t, &d);
        let out = g.out_neighbors(0).unwrap();
        assert_eq!(out.len(), 35);
        assert!(out.iter().any(|&(y, _)| y == 1));
        assert!(out.iter().any(|&(y, _)| y == 2));
    }

    #[test]
    fn ramp_bottom_vertex_only_level_links() {
        let (t, d) = ramp_disc(1.0);
        let g = DescendGraph::new(&t, &d);
        let out: Vec<NodeId> = g.out_neighbors(3).unwrap().into_iter().map(|(y, _)| y).collect();
        // CD is level at z = 0 and its interior nodes share an edge with D.
        assert_eq!(out, vec![2]);
    }

    #[test]
    fn horizontal_triangle_complete() {
        let t = generate::horizontal_triangle(1.0).unwrap();
        let p = t.geometry_params().unwrap();
        let d = place_steiner_large(&t, &p);
        let g = DescendGraph::new(&t, &d);
        for x in 0..3 {
            let ys: Vec<NodeId> = g.out_neighbors(x).unwrap().iter().map(|&(y, _)| y).collect();
            let expect: Vec<NodeId> = (0..3).filter(|&y| y != x).collect();
            assert_eq!(ys, expect);
        }
    }

    fn place_steiner_large(t: &Terrain, p: &crate::GeomParams) -> Discretization {
        crate::discretizer::place_steiner(t, p, 10.0)
    }

    #[test]
    fn brute_force_agreement() {
        let (t, d) = ramp_disc(1.0);
        for chords in [false, true] {
            let g = DescendGraph::new(&t, &d).with_edge_chords(chords);
            for x in 0..d.node_count() {
                let fast: Vec<NodeId> = g.out_neighbors(x).unwrap().iter().map(|&(y, _)| y).collect();
                let mut sorted = fast.clone();
                sorted.sort_unstable();
                sorted.dedup();
                assert_eq!(sorted.len(), fast.len(), "duplicate neighbor of {x}");
                let brute: Vec<NodeId> = (0..d.node_count())
                    .filter(|&y| g.link_exists(x, y).unwrap())
                    .collect();
                assert_eq!(sorted, brute, "node {x}, chords {chords}");
            }
        }
    }

    #[test]
    fn chords_link_consecutive_nodes() {
        let (t, d) = ramp_disc(1.0);
        let g = DescendGraph::new(&t, &d).with_edge_chords(true);
        let ac = d.edge_nodes(2);
        assert!(g.link_exists(ac[1], ac[2]).unwrap());
        assert!(g.link_exists(ac[0], ac[1]).unwrap());
        assert!(!g.link_exists(ac[1], ac[3]).unwrap());
    }

    #[test]
    fn antisymmetric_except_level() {
        let (t, d) = ramp_disc(1.0);
        let g = DescendGraph::new(&t, &d);
        for x in 0..d.node_count() {
            for (y, _) in g.out_neighbors(x).unwrap() {
                if g.link_exists(y, x).unwrap() {
                    assert_eq!(d.height(x), d.height(y));
                }
            }
        }
    }
}
