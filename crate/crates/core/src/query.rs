//! Query phase: answers from the fixed source to arbitrary surface points.

use serde::Serialize;

use crate::descend_graph::DescendGraph;
use crate::discretizer::Discretization;
use crate::error::{Error, Result};
use crate::oracle::{node_at_point, Path};
use crate::sssp::{extract_path, SPTree, Solver};
use crate::terrain::{GeomParams, Location, Terrain};
use crate::{NodeId, Point3, VertexId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TerminalKind {
    TreeNode,
    InteriorPoint,
}

#[derive(Debug, Clone, Serialize)]
pub struct QueryAnswer {
    pub path: Path,
    pub length: f64,
    pub terminal_kind: TerminalKind,
    /// Node the final segment leaves from, for interior targets.
    pub last_hop: Option<NodeId>,
}

/// Nodes that may precede an interior target: everything on the boundary of
/// the containing face, or of the faces around the containing edge except
/// the edge's own interior nodes. Sorted and unique.
pub fn candidate_nodes(t: &Terrain, d: &Discretization, loc: &Location) -> Result<Vec<NodeId>> {
    let mut out = Vec::new();
    let mut push_face = |f, skip| {
        out.extend(t.triangle(f));
        for e in t.face_edges(f) {
            if Some(e) != skip {
                out.extend_from_slice(d.edge_nodes(e));
            }
        }
    };
    match *loc {
        Location::Face { face, .. } => push_face(face, None),
        Location::Edge { edge, .. } => {
            for &f in &t.edge(edge).faces {
                push_face(f, Some(edge));
            }
        }
        _ => return Err(Error::WrongLocationKind),
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

pub fn query(t: &Terrain, d: &Discretization, tree: &SPTree, v: &Point3) -> Result<QueryAnswer> {
    let loc = t.locate(v);
    if loc == Location::OffSurface {
        return Err(Error::OffSurface {
            x: v.x,
            y: v.y,
            z: v.z,
        });
    }
    if let Some(id) = node_at_point(t, d, &loc, v) {
        let path = extract_path(tree, d, id)?;
        return Ok(QueryAnswer {
            length: path.length,
            path,
            terminal_kind: TerminalKind::TreeNode,
            last_hop: None,
        });
    }
    let mut best: Option<(f64, NodeId)> = None;
    for u in candidate_nodes(t, d, &loc)? {
        let du = tree.dist(u);
        if !du.is_finite() || d.height(u) < v.z {
            continue;
        }
        let total = du + (d.node(u).pos - v).norm();
        if best.is_none_or(|(b, _)| total < b) {
            best = Some((total, u));
        }
    }
    let (_, u) = best.ok_or(Error::NoDescendingPath)?;
    let mut points = extract_path(tree, d, u)?.points;
    if points.last() != Some(v) {
        points.push(*v);
    }
    let path = Path::new(points);
    Ok(QueryAnswer {
        length: path.length,
        path,
        terminal_kind: TerminalKind::InteriorPoint,
        last_hop: Some(u),
    })
}

/// Everything the query phase needs, built once per (terrain, source, eps).
#[derive(Debug, Clone)]
pub struct Preprocessed {
    pub terrain: Terrain,
    pub params: GeomParams,
    pub disc: Discretization,
    pub tree: SPTree,
    pub edge_chords: bool,
}

impl Preprocessed {
    pub fn build(
        terrain: Terrain,
        source: VertexId,
        epsilon: f64,
        solver: Solver,
        edge_chords: bool,
    ) -> Result<Self> {
        if source >= terrain.vertex_count() {
            return Err(Error::UnknownNode(source));
        }
        let params = terrain.geometry_params()?;
        let disc = Discretization::new(&terrain, &params, epsilon)?;
        let tree = {
            let g = DescendGraph::new(&terrain, &disc).with_edge_chords(edge_chords);
            solver.run(&g, source)?
        };
        Ok(Self {
            terrain,
            params,
            disc,
            tree,
            edge_chords,
        })
    }

    pub fn graph(&self) -> DescendGraph<'_> {
        DescendGraph::new(&self.terrain, &self.disc).with_edge_chords(self.edge_chords)
    }

    pub fn query(&self, v: &Point3) -> Result<QueryAnswer> {
        query(&self.terrain, &self.disc, &self.tree, v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate;
    use crate::oracle::verify_descending;

    fn ramp(eps: f64) -> Preprocessed {
        Preprocessed::build(generate::ramp(1.0).unwrap(), 0, eps, Solver::Dijkstra, false).unwrap()
    }

    #[test]
    fn centroid_of_source_face() {
        let pre = ramp(1.0);
        let c = 1.0 / 3.0;
        let a = pre.query(&Point3::new(c, c, 2.0 * c)).unwrap();
        assert_eq!(a.terminal_kind, TerminalKind::InteriorPoint);
        assert_eq!(a.last_hop, Some(0));
        assert!((a.length - (1.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!(verify_descending(&pre.terrain, &a.path).ok);
    }

    #[test]
    fn midpoint_of_bc() {
        let pre = ramp(1.0);
        let a = pre.query(&Point3::new(0.5, 0.5, 0.5)).unwrap();
        assert!((a.length - 0.75f64.sqrt()).abs() < 1e-12);
        assert!(verify_descending(&pre.terrain, &a.path).ok);
    }

    #[test]
    fn vertex_target_is_tree_node() {
        let pre = ramp(0.1);
        let a = pre.query(&Point3::new(1.0, 1.0, 0.0)).unwrap();
        assert_eq!(a.terminal_kind, TerminalKind::TreeNode);
        assert_eq!(a.last_hop, None);
        let s = 3f64.sqrt();
        assert!(a.length >= s - 1e-9 && a.length <= 1.1 * s + 1e-9);
        let direct = extract_path(&pre.tree, &pre.disc, 3).unwrap();
        assert_eq!(a.path, direct);
    }

    #[test]
    fn steiner_target_matches_tree() {
        let pre = ramp(1.0);
        let id = pre.disc.edge_nodes(4)[3];
        let a = pre.query(&pre.disc.node(id).pos).unwrap();
        assert_eq!(a.terminal_kind, TerminalKind::TreeNode);
        assert_eq!(a.path, extract_path(&pre.tree, &pre.disc, id).unwrap());
    }

    #[test]
    fn candidate_counts() {
        let pre = ramp(1.0);
        let t = &pre.terrain;
        let c = 1.0 / 3.0;
        let face = t.locate(&Point3::new(c, c, 2.0 * c));
        assert_eq!(candidate_nodes(t, &pre.disc, &face).unwrap().len(), 88);
        let edge = t.locate(&Point3::new(0.5, 0.5, 0.5));
        let got = candidate_nodes(t, &pre.disc, &edge).unwrap();
        let bc = pre.disc.edge_nodes(1);
        assert!(bc[1..bc.len() - 1].iter().all(|id| !got.contains(id)));
        assert_eq!(got.len(), 4 + 19 + 33 + 33 + 19);
        assert!(matches!(
            candidate_nodes(t, &pre.disc, &Location::Vertex(0)),
            Err(Error::WrongLocationKind)
        ));
        assert!(matches!(
            candidate_nodes(t, &pre.disc, &Location::OffSurface),
            Err(Error::WrongLocationKind)
        ));
    }

    #[test]
    fn candidates_match_brute_force() {
        let t = generate::random_grid(4, 11).unwrap();
        let p = t.geometry_params().unwrap();
        let d = Discretization::new(&t, &p, 1.0).unwrap();
        let g = DescendGraph::new(&t, &d);
        for f in 0..t.face_count() {
            let [a, b, c] = t.face_points(f);
            let centroid = Point3::from((a.coords + b.coords + c.coords) / 3.0);
            let loc = t.locate(&centroid);
            let brute: Vec<NodeId> = (0..d.node_count()).filter(|&x| g.faces_of(x).contains(&f)).collect();
            assert_eq!(candidate_nodes(&t, &d, &loc).unwrap(), brute);
        }
    }

    #[test]
    fn errors() {
        let pre = ramp(1.0);
        assert!(matches!(pre.query(&Point3::new(5.0, 5.0, 0.0)), Err(Error::OffSurface { .. })));
        // From D nothing but the level edge CD is reachable.
        let low = Preprocessed::build(generate::ramp(1.0).unwrap(), 3, 1.0, Solver::Dijkstra, false).unwrap();
        assert!(matches!(low.query(&Point3::new(0.0, 0.0, 1.0)), Err(Error::NoDescendingPath)));
        let c = 1.0 / 3.0;
        assert!(matches!(low.query(&Point3::new(c, c, 2.0 * c)), Err(Error::NoDescendingPath)));
        // Interior of the level edge CD is reached straight from D, but its
        // Steiner nodes are not (no same-edge links).
        let ok = low.query(&Point3::new(0.49, 1.0, 0.0)).unwrap();
        assert_eq!(ok.last_hop, Some(3));
        assert!((ok.length - 0.51).abs() < 1e-12);
        let node = low.disc.edge_nodes(4)[10];
        assert!(matches!(low.query(&low.disc.node(node).pos), Err(Error::NoDescendingPath)));
    }
}
