//! Verification machinery that does not depend on the solver: descent
//! checks, the snap construction that moves path nodes up to the nearest
//! Steiner node, Euclidean lower bounds, exact two-face shortest paths by
//! unfolding, and epsilon-refinement studies.

use serde::Serialize;

use crate::descend_graph::DescendGraph;
use crate::discretizer::{Discretization, NodeKind};
use crate::error::{Error, Result};
use crate::query::Preprocessed;
use crate::sssp::Solver;
use crate::terrain::{Location, Terrain};
use crate::{EdgeId, FaceId, NodeId, Point3, VertexId};

/// Absolute slack on height comparisons when checking descent.
pub const HEIGHT_TOL: f64 = 1e-9;

/// A surface polyline.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Path {
    pub points: Vec<Point3>,
    pub length: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub face_trace: Option<Vec<FaceId>>,
}

impl Path {
    pub fn new(points: Vec<Point3>) -> Self {
        let length = polyline_length(&points);
        Self {
            points,
            length,
            face_trace: None,
        }
    }

    /// Builds a path from `[[x, y, z], ...]` JSON (either a bare array or an
    /// object with a `points` field).
    pub fn from_json(data: &[u8]) -> Result<Self> {
        #[derive(serde::Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Bare(Vec<[f64; 3]>),
            Object { points: Vec<[f64; 3]> },
        }
        let raw: Raw = serde_json::from_slice(data).map_err(|e| Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        let pts = match raw {
            Raw::Bare(p) | Raw::Object { points: p } => p,
        };
        if pts.is_empty() {
            return Err(Error::MalformedPath("path has no points".into()));
        }
        Ok(Self::new(pts.into_iter().map(|p| Point3::new(p[0], p[1], p[2])).collect()))
    }

    pub fn start(&self) -> &Point3 {
        &self.points[0]
    }

    pub fn end(&self) -> &Point3 {
        self.points.last().expect("non-empty path")
    }
}

pub fn polyline_length(points: &[Point3]) -> f64 {
    points.windows(2).map(|w| (w[1] - w[0]).norm()).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PathViolation {
    /// Segment `segment` climbs from `from` to `to`.
    Ascending { segment: usize, from: f64, to: f64 },
    /// Segment `segment` is not contained in any single face.
    NotInFace { segment: usize },
    /// Point `point` is not on the surface.
    OffSurface { point: usize },
}

impl std::fmt::Display for PathViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PathViolation::Ascending { segment, from, to } => {
                write!(f, "segment {segment} ascends from z={from} to z={to}")
            }
            PathViolation::NotInFace { segment } => {
                write!(f, "segment {segment} does not lie in a single face")
            }
            PathViolation::OffSurface { point } => write!(f, "point {point} is off the surface"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DescentReport {
    pub ok: bool,
    pub first_violation: Option<PathViolation>,
}

/// Checks that heights never increase (within [`HEIGHT_TOL`]) and that every
/// segment lies in one face of the terrain.
pub fn verify_descending(t: &Terrain, p: &Path) -> DescentReport {
    let fail = |v| DescentReport {
        ok: false,
        first_violation: Some(v),
    };
    let locs: Vec<Location> = p.points.iter().map(|q| t.locate(q)).collect();
    for (i, loc) in locs.iter().enumerate() {
        if *loc == Location::OffSurface {
            return fail(PathViolation::OffSurface { point: i });
        }
    }
    for (i, w) in p.points.windows(2).enumerate() {
        let (a, b) = (&w[0], &w[1]);
        if b.z > a.z + HEIGHT_TOL {
            return fail(PathViolation::Ascending {
                segment: i,
                from: a.z,
                to: b.z,
            });
        }
        let mid = nalgebra::center(a, b);
        let in_face = t
            .faces_at(&locs[i])
            .into_iter()
            .any(|f| t.face_contains(f, b) && t.face_contains(f, &mid));
        if !in_face {
            return fail(PathViolation::NotInFace { segment: i });
        }
    }
    DescentReport {
        ok: true,
        first_violation: None,
    }
}

pub fn euclid_lower_bound(s: &Point3, v: &Point3) -> f64 {
    (v - s).norm()
}

/// The snapped path and the displacement of every original node.
#[derive(Debug, Clone)]
pub struct SnapResult {
    pub snapped: Path,
    /// `|p_i p'_i|` for every node of the input path.
    pub displacement: Vec<f64>,
    /// Graph node each snapped point coincides with, when it does.
    pub nodes: Vec<Option<NodeId>>,
    /// `length(P') - length(P)`.
    pub excess: f64,
}

impl SnapResult {
    /// Whether every snapped segment except the last is a link of `g` (or a
    /// repeated point).
    pub fn prefix_in_graph(&self, g: &DescendGraph) -> bool {
        let k = self.nodes.len();
        if k < 2 {
            return true;
        }
        (0..k - 2).all(|i| match (self.nodes[i], self.nodes[i + 1]) {
            (Some(x), Some(y)) => x == y || g.link_exists(x, y).unwrap_or(false),
            _ => false,
        })
    }
}

/// Moves every interior path node to the nearest node of its edge at equal
/// or greater height; vertices and the two endpoints stay put.
pub fn snap_path(t: &Terrain, d: &Discretization, p: &Path) -> Result<SnapResult> {
    let k = p.points.len();
    let mut snapped_pts = Vec::with_capacity(k);
    let mut displacement = Vec::with_capacity(k);
    let mut nodes = Vec::with_capacity(k);
    for (i, q) in p.points.iter().enumerate() {
        let loc = t.locate(q);
        if i == 0 || i + 1 == k {
            snapped_pts.push(*q);
            displacement.push(0.0);
            nodes.push(node_at_point(t, d, &loc, q));
            continue;
        }
        let id = match loc {
            Location::Vertex(v) => v,
            Location::Edge { edge, .. } => snap_on_edge(t, d, edge, q),
            _ => {
                return Err(Error::MalformedPath(format!(
                    "interior point {i} is not on an edge"
                )))
            }
        };
        let s = d.node(id).pos;
        displacement.push((s - q).norm());
        snapped_pts.push(s);
        nodes.push(Some(id));
    }
    snapped_pts.dedup();
    let snapped = Path::new(snapped_pts);
    let excess = snapped.length - p.length;
    Ok(SnapResult {
        snapped,
        displacement,
        nodes,
        excess,
    })
}

fn snap_on_edge(t: &Terrain, d: &Discretization, edge: EdgeId, q: &Point3) -> NodeId {
    let seq = d.edge_nodes(edge);
    if t.is_level(edge) {
        return *seq
            .iter()
            .min_by(|&&a, &&b| {
                let da = (d.node(a).pos - q).norm();
                let db = (d.node(b).pos - q).norm();
                da.total_cmp(&db)
            })
            .expect("edge has endpoints");
    }
    // Heights are strictly monotone along the edge: the lowest node at or
    // above q is also the nearest.
    let rising = d.height(seq[seq.len() - 1]) > d.height(seq[0]);
    if rising {
        let i = seq.partition_point(|&id| d.height(id) < q.z);
        seq[i.min(seq.len() - 1)]
    } else {
        let i = seq.partition_point(|&id| d.height(id) >= q.z);
        seq[i.saturating_sub(1)]
    }
}

/// Graph node located at `q`, if any.
pub fn node_at_point(t: &Terrain, d: &Discretization, loc: &Location, q: &Point3) -> Option<NodeId> {
    match *loc {
        Location::Vertex(v) => Some(v),
        Location::Edge { edge, t: s } => {
            let seq = d.edge_nodes(edge);
            let tol = t.tolerance();
            let param = |id: NodeId| match d.node(id).kind {
                NodeKind::Steiner { t, .. } => t,
                NodeKind::Vertex(_) => f64::NAN,
            };
            let inner = &seq[1..seq.len() - 1];
            let i = inner.partition_point(|&id| param(id) < s);
            [i.checked_sub(1), Some(i)]
                .into_iter()
                .flatten()
                .filter_map(|j| inner.get(j).copied())
                .find(|&id| (d.node(id).pos - q).norm() <= tol)
        }
        _ => None,
    }
}

/// Exact shortest descending path between points of the two faces adjacent
/// to `edge`, when the unfolded straight segment crosses the edge interior
/// and is descending on both sides. Returns `None` when that does not hold;
/// no claim is made in that case.
pub fn two_face_exact(t: &Terrain, s: &Point3, v: &Point3, edge: EdgeId) -> Result<Option<Path>> {
    let faces = &t.edge(edge).faces;
    let fs: Vec<FaceId> = faces.iter().copied().filter(|&f| t.face_contains(f, s)).collect();
    let fv: Vec<FaceId> = faces.iter().copied().filter(|&f| t.face_contains(f, v)).collect();
    if fs.is_empty() || fv.is_empty() {
        return Err(Error::FacesNotAdjacent(edge));
    }
    if fs.iter().any(|f| fv.contains(f)) {
        // Same face: the straight segment, when descending.
        return Ok((v.z <= s.z).then(|| Path::new(vec![*s, *v])));
    }
    let (f1, f2) = (fs[0], fv[0]);
    let (a, b) = t.edge_points(edge);
    let axis = b - a;
    let len = axis.norm();
    let ux = axis / len;
    // Planar coordinates of a point of face f, with the opposite vertex side
    // mapped to +y for f1 and -y for f2.
    let unfold = |p: &Point3, sign: f64| {
        let w = p - a;
        let x = w.dot(&ux);
        let y = (w - ux * x).norm();
        (x, sign * y)
    };
    let _ = f2;
    let _ = f1;
    let (xs, ys) = unfold(s, 1.0);
    let (xv, yv) = unfold(v, -1.0);
    if ys <= 0.0 || yv >= 0.0 {
        return Ok(None);
    }
    let lambda = ys / (ys - yv);
    let xc = xs + (xv - xs) * lambda;
    if !(xc > 0.0 && xc < len) {
        return Ok(None);
    }
    let c = a + ux * xc;
    if !(s.z >= c.z && c.z >= v.z) {
        return Ok(None);
    }
    let path = Path {
        length: ((xv - xs).powi(2) + (yv - ys).powi(2)).sqrt(),
        points: vec![*s, c, *v],
        face_trace: Some(vec![f1, f2]),
    };
    Ok(Some(path))
}

/// A random walk of up to `max_steps` links from `start`, never revisiting a
/// node. Every walk is a descending surface path.
pub fn sample_descending_walk<R: rand::Rng + ?Sized>(
    g: &DescendGraph,
    start: NodeId,
    max_steps: usize,
    rng: &mut R,
) -> Vec<NodeId> {
    let steps = rng.gen_range(1..=max_steps.max(1));
    let mut walk = vec![start];
    let mut seen = std::collections::HashSet::from([start]);
    let mut options = Vec::new();
    for _ in 0..steps {
        options.clear();
        g.for_each_out_link(*walk.last().expect("non-empty"), |y, _| {
            if !seen.contains(&y) {
                options.push(y);
            }
        });
        if options.is_empty() {
            break;
        }
        let y = options[rng.gen_range(0..options.len())];
        seen.insert(y);
        walk.push(y);
    }
    walk
}

/// Query lengths for each target across a decreasing epsilon sequence.
#[derive(Debug, Clone, Serialize)]
pub struct RefineTable {
    pub epsilons: Vec<f64>,
    /// `lengths[target][k]` at `epsilons[k]`; `None` when no path was found.
    pub lengths: Vec<Vec<Option<f64>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RefineViolation {
    pub target: usize,
    pub coarse: usize,
    pub fine: usize,
}

impl RefineTable {
    /// Pairs where `len(eps_i) > (1 + eps_i) len(eps_j) + 1e-9` for a finer
    /// `eps_j`, or the coarse run missed a path the fine run found.
    pub fn violations(&self) -> Vec<RefineViolation> {
        let mut out = Vec::new();
        for (target, row) in self.lengths.iter().enumerate() {
            for i in 0..row.len() {
                for j in i + 1..row.len() {
                    let bad = match (row[i], row[j]) {
                        (Some(c), Some(f)) => c > (1.0 + self.epsilons[i]) * f + 1e-9,
                        (None, Some(_)) => true,
                        _ => false,
                    };
                    if bad {
                        out.push(RefineViolation {
                            target,
                            coarse: i,
                            fine: j,
                        });
                    }
                }
            }
        }
        out
    }
}

pub fn refine_study(
    t: &Terrain,
    source: VertexId,
    targets: &[Point3],
    epsilons: &[f64],
    solver: Solver,
) -> Result<RefineTable> {
    if epsilons.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidParameter(
            "epsilons must be strictly decreasing".into(),
        ));
    }
    let mut lengths = vec![Vec::with_capacity(epsilons.len()); targets.len()];
    for &eps in epsilons {
        let pre = Preprocessed::build(t.clone(), source, eps, solver, false)?;
        for (row, v) in lengths.iter_mut().zip(targets) {
            row.push(match pre.query(v) {
                Ok(a) => Some(a.length),
                Err(Error::NoDescendingPath) => None,
                Err(e) => return Err(e),
            });
        }
    }
    Ok(RefineTable {
        epsilons: epsilons.to_vec(),
        lengths,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate;
    use crate::terrain::GeomParams;

    fn p(x: f64, y: f64, z: f64) -> Point3 {
        Point3::new(x, y, z)
    }

    fn ramp() -> (Terrain, GeomParams, Discretization) {
        let t = generate::ramp(1.0).unwrap();
        let g = t.geometry_params().unwrap();
        let d = Discretization::new(&t, &g, 1.0).unwrap();
        (t, g, d)
    }

    #[test]
    fn verify_examples() {
        let t = generate::ramp(1.0).unwrap();
        let good = Path::new(vec![p(0.0, 0.0, 1.0), p(0.5, 0.5, 0.5), p(1.0, 1.0, 0.0)]);
        assert!(verify_descending(&t, &good).ok);
        let up = Path::new(vec![p(0.0, 1.0, 0.0), p(0.0, 0.0, 1.0)]);
        assert!(matches!(
            verify_descending(&t, &up).first_violation,
            Some(PathViolation::Ascending { segment: 0, .. })
        ));
        // A straight chord from A to D leaves the surface.
        let jump = Path::new(vec![p(0.0, 0.0, 1.0), p(1.0, 1.0, 0.0)]);
        assert!(matches!(
            verify_descending(&t, &jump).first_violation,
            Some(PathViolation::NotInFace { segment: 0 })
        ));
    }

    #[test]
    fn lower_bounds() {
        assert!((euclid_lower_bound(&p(0.0, 0.0, 1.0), &p(1.0, 1.0, 0.0)) - 3f64.sqrt()).abs() < 1e-15);
        assert_eq!(euclid_lower_bound(&p(1.0, 2.0, 3.0), &p(1.0, 2.0, 3.0)), 0.0);
        assert!((euclid_lower_bound(&p(0.0, 0.0, 1.0), &p(0.0, 1.0, 0.0)) - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn snap_fixed_point() {
        let (t, _, d) = ramp();
        let bc = d.edge_nodes(1);
        let path = Path::new(vec![p(0.0, 0.0, 1.0), d.node(bc[10]).pos, p(1.0, 1.0, 0.0)]);
        let s = snap_path(&t, &d, &path).unwrap();
        assert!(s.displacement.iter().all(|&x| x == 0.0));
        assert_eq!(s.snapped.points, path.points);
    }

    #[test]
    fn snap_midpoint_of_bc() {
        let (t, g, d) = ramp();
        let path = Path::new(vec![p(0.0, 0.0, 1.0), p(0.5, 0.5, 0.5), p(1.0, 1.0, 0.0)]);
        let s = snap_path(&t, &d, &path).unwrap();
        let q = s.snapped.points[1];
        assert!(q.z >= 0.5);
        assert!(s.displacement[1] <= d.delta() * g.sec_theta + 1e-12);
        // The plane just above 0.5 is j = 17.
        assert_eq!(q.z, 17.0 * d.delta());
        assert!(verify_descending(&t, &s.snapped).ok);
        let graph = DescendGraph::new(&t, &d);
        assert!(s.prefix_in_graph(&graph));
    }

    #[test]
    fn snap_rejects_face_interior_nodes() {
        let (t, _, d) = ramp();
        let c = 1.0 / 3.0;
        let path = Path::new(vec![p(0.0, 0.0, 1.0), p(c, c, 2.0 * c), p(1.0, 1.0, 0.0)]);
        assert!(matches!(snap_path(&t, &d, &path), Err(Error::MalformedPath(_))));
    }

    #[test]
    fn two_face_ramp() {
        let t = generate::ramp(1.0).unwrap();
        let path = two_face_exact(&t, &p(0.0, 0.0, 1.0), &p(1.0, 1.0, 0.0), 1)
            .unwrap()
            .unwrap();
        assert!((path.length - 3f64.sqrt()).abs() < 1e-15);
        let c = path.points[1];
        assert!((c - p(0.5, 0.5, 0.5)).norm() < 1e-15);
        assert!(verify_descending(&t, &path).ok);
    }

    #[test]
    fn two_face_same_face_and_ascending() {
        let t = generate::ramp(1.0).unwrap();
        let c = 1.0 / 3.0;
        let v = p(c, c, 2.0 * c);
        let same = two_face_exact(&t, &p(0.0, 0.0, 1.0), &v, 1).unwrap().unwrap();
        assert_eq!(same.points.len(), 2);
        // C up to B across BC is ascending.
        assert!(two_face_exact(&t, &p(0.0, 1.0, 0.0), &p(1.0, 0.0, 1.0), 1)
            .unwrap()
            .is_none());
        // D -> A crosses BC but climbs.
        assert!(two_face_exact(&t, &p(1.0, 1.0, 0.0), &p(0.0, 0.0, 1.0), 1)
            .unwrap()
            .is_none());
        assert!(matches!(
            two_face_exact(&t, &p(0.0, 0.0, 1.0), &p(1.0, 1.0, 0.0), 0),
            Err(Error::FacesNotAdjacent(0))
        ));
    }

    #[test]
    fn refine_ramp() {
        let t = generate::ramp(1.0).unwrap();
        let table = refine_study(&t, 0, &[p(1.0, 1.0, 0.0)], &[1.0, 0.5, 0.1], Solver::Bushwhack).unwrap();
        assert!(table.violations().is_empty());
        for len in table.lengths[0].iter().flatten() {
            assert!(*len >= 3f64.sqrt() - 1e-9);
        }
    }

    #[test]
    fn refine_single_face_target() {
        let t = generate::ramp(1.0).unwrap();
        let c = 1.0 / 3.0;
        let v = p(c, c, 2.0 * c);
        let table = refine_study(&t, 0, &[v], &[1.0, 0.5, 0.25], Solver::Dijkstra).unwrap();
        for len in table.lengths[0].iter() {
            assert_eq!(*len, Some((v - p(0.0, 0.0, 1.0)).norm()));
        }
    }

    #[test]
    fn sampled_walks_descend_and_snap() {
        use rand::SeedableRng;
        let t = generate::random_grid(3, 5).unwrap();
        let g = t.geometry_params().unwrap();
        let coarse = Discretization::new(&t, &g, 0.5).unwrap();
        let fine = Discretization::new(&t, &g, 0.5 / 16.0).unwrap();
        let fg = DescendGraph::new(&t, &fine);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let walk = sample_descending_walk(&fg, t.highest_vertex(), 6, &mut rng);
            let path = Path::new(walk.iter().map(|&x| fine.node(x).pos).collect());
            assert!(verify_descending(&t, &path).ok);
            let s = snap_path(&t, &coarse, &path).unwrap();
            assert!(verify_descending(&t, &s.snapped).ok);
            let bound = coarse.delta() * g.sec_theta + 1e-12;
            assert!(s.displacement.iter().all(|&x| x <= bound));
        }
    }

    #[test]
    fn refine_rejects_unsorted() {
        let t = generate::ramp(1.0).unwrap();
        assert!(refine_study(&t, 0, &[], &[0.5, 1.0], Solver::Dijkstra).is_err());
    }
}
