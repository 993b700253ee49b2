//! Triangulated terrain: loading, validation, adjacency, point location and
//! the geometric parameters that drive the discretization.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom;
use crate::{EdgeId, FaceId, Point3, VertexId};

/// Relative tolerance used for point location and face membership.
pub const LOCATE_REL_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct Edge {
    /// Endpoints with `v[0] < v[1]`. Edge parameters run from `v[0]` to `v[1]`.
    pub v: [VertexId; 2],
    pub faces: Vec<FaceId>,
}

/// An indexed triangle mesh whose xy-projection is a planar subdivision.
#[derive(Debug, Clone)]
pub struct Terrain {
    vertices: Vec<Point3>,
    triangles: Vec<[VertexId; 3]>,
    edges: Vec<Edge>,
    /// `face_edges[f][k]` joins `triangles[f][k]` and `triangles[f][(k + 1) % 3]`.
    face_edges: Vec<[EdgeId; 3]>,
    vertex_edges: Vec<Vec<EdgeId>>,
    vertex_faces: Vec<Vec<FaceId>>,
    source: Option<VertexId>,
    diag: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct TerrainJson {
    vertices: Vec<[f64; 3]>,
    triangles: Vec<[usize; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    source: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Off,
}

impl Terrain {
    /// Builds a terrain and its adjacency. Validation is a separate step.
    pub fn new(vertices: Vec<Point3>, triangles: Vec<[VertexId; 3]>) -> Result<Self> {
        for (i, v) in vertices.iter().enumerate() {
            if !(v.x.is_finite() && v.y.is_finite() && v.z.is_finite()) {
                return Err(Error::NonFinite(i));
            }
        }
        for (f, tri) in triangles.iter().enumerate() {
            for &i in tri {
                if i >= vertices.len() {
                    return Err(Error::IndexOutOfRange {
                        triangle: f,
                        index: i,
                        vertex_count: vertices.len(),
                    });
                }
            }
        }

        let mut edges: Vec<Edge> = Vec::new();
        let mut lookup: HashMap<(VertexId, VertexId), EdgeId> = HashMap::new();
        let mut face_edges = Vec::with_capacity(triangles.len());
        let mut vertex_edges = vec![Vec::new(); vertices.len()];
        let mut vertex_faces = vec![Vec::new(); vertices.len()];
        for (f, tri) in triangles.iter().enumerate() {
            let mut fe = [0; 3];
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                let key = (a.min(b), a.max(b));
                let id = *lookup.entry(key).or_insert_with(|| {
                    edges.push(Edge {
                        v: [key.0, key.1],
                        faces: Vec::new(),
                    });
                    vertex_edges[key.0].push(edges.len() - 1);
                    vertex_edges[key.1].push(edges.len() - 1);
                    edges.len() - 1
                });
                edges[id].faces.push(f);
                fe[k] = id;
            }
            face_edges.push(fe);
            for &v in tri {
                if !vertex_faces[v].contains(&f) {
                    vertex_faces[v].push(f);
                }
            }
        }

        let diag = bbox_diagonal(&vertices);
        Ok(Self {
            vertices,
            triangles,
            edges,
            face_edges,
            vertex_edges,
            vertex_faces,
            source: None,
            diag,
        })
    }

    pub fn with_source(mut self, source: Option<VertexId>) -> Result<Self> {
        if let Some(s) = source {
            if s >= self.vertices.len() {
                return Err(Error::InvalidParameter(format!(
                    "source vertex {s} out of range"
                )));
            }
        }
        self.source = source;
        Ok(self)
    }

    pub fn load(data: &[u8], format: Format) -> Result<Self> {
        match format {
            Format::Json => Self::from_json(data),
            Format::Off => Self::from_off(data),
        }
    }

    pub fn from_json(data: &[u8]) -> Result<Self> {
        let raw: TerrainJson = serde_json::from_slice(data).map_err(|e| Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        let vertices = raw
            .vertices
            .iter()
            .map(|v| Point3::new(v[0], v[1], v[2]))
            .collect();
        Self::new(vertices, raw.triangles)?.with_source(raw.source)
    }

    pub fn from_off(data: &[u8]) -> Result<Self> {
        let text = std::str::from_utf8(data).map_err(|e| Error::Parse {
            line: 1,
            column: 1,
            message: e.to_string(),
        })?;
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        let err = |line: usize, message: String| Error::Parse {
            line,
            column: 1,
            message,
        };

        let (line, header) = lines.next().ok_or_else(|| err(1, "empty input".into()))?;
        let mut counts_line = None;
        if header != "OFF" {
            match header.strip_prefix("OFF") {
                Some(rest) if !rest.trim().is_empty() => counts_line = Some((line, rest.trim())),
                _ => return Err(err(line, format!("expected OFF header, found {header:?}"))),
            }
        }
        let (line, counts) = match counts_line {
            Some(c) => c,
            None => lines
                .next()
                .ok_or_else(|| err(line, "missing element counts".into()))?,
        };
        let counts: Vec<usize> = parse_fields(counts, line)?;
        if counts.len() < 2 {
            return Err(err(line, "expected vertex and face counts".into()));
        }
        let (nv, nf) = (counts[0], counts[1]);

        let mut vertices = Vec::with_capacity(nv);
        for _ in 0..nv {
            let (line, l) = lines
                .next()
                .ok_or_else(|| err(line, "unexpected end of vertex list".into()))?;
            let xyz: Vec<f64> = parse_fields(l, line)?;
            if xyz.len() < 3 {
                return Err(err(line, "vertex needs 3 coordinates".into()));
            }
            vertices.push(Point3::new(xyz[0], xyz[1], xyz[2]));
        }
        let mut triangles = Vec::with_capacity(nf);
        for _ in 0..nf {
            let (line, l) = lines
                .next()
                .ok_or_else(|| err(line, "unexpected end of face list".into()))?;
            let idx: Vec<usize> = parse_fields(l, line)?;
            if idx.first() != Some(&3) || idx.len() < 4 {
                return Err(err(line, "only triangular faces are supported".into()));
            }
            triangles.push([idx[1], idx[2], idx[3]]);
        }
        Self::new(vertices, triangles)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(TerrainJson {
            vertices: self.vertices.iter().map(|p| [p.x, p.y, p.z]).collect(),
            triangles: self.triangles.clone(),
            source: self.source,
        })
        .expect("terrain serializes")
    }

    pub fn to_off(&self) -> String {
        let mut out = format!("OFF\n{} {} 0\n", self.vertices.len(), self.triangles.len());
        for p in &self.vertices {
            out.push_str(&format!("{:.17e} {:.17e} {:.17e}\n", p.x, p.y, p.z));
        }
        for t in &self.triangles {
            out.push_str(&format!("3 {} {} {}\n", t[0], t[1], t[2]));
        }
        out
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn face_count(&self) -> usize {
        self.triangles.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertices(&self) -> &[Point3] {
        &self.vertices
    }

    pub fn vertex(&self, v: VertexId) -> &Point3 {
        &self.vertices[v]
    }

    pub fn triangles(&self) -> &[[VertexId; 3]] {
        &self.triangles
    }

    pub fn triangle(&self, f: FaceId) -> [VertexId; 3] {
        self.triangles[f]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: EdgeId) -> &Edge {
        &self.edges[e]
    }

    pub fn face_edges(&self, f: FaceId) -> [EdgeId; 3] {
        self.face_edges[f]
    }

    pub fn vertex_edges(&self, v: VertexId) -> &[EdgeId] {
        &self.vertex_edges[v]
    }

    pub fn vertex_faces(&self, v: VertexId) -> &[FaceId] {
        &self.vertex_faces[v]
    }

    pub fn source(&self) -> Option<VertexId> {
        self.source
    }

    /// Length of the bounding-box diagonal.
    pub fn diagonal(&self) -> f64 {
        self.diag
    }

    /// Absolute location tolerance, `1e-9` times the bounding-box diagonal.
    pub fn tolerance(&self) -> f64 {
        LOCATE_REL_TOL * self.diag
    }

    pub fn edge_between(&self, a: VertexId, b: VertexId) -> Option<EdgeId> {
        self.vertex_edges[a]
            .iter()
            .copied()
            .find(|&e| self.edges[e].v.contains(&b))
    }

    pub fn edge_points(&self, e: EdgeId) -> (&Point3, &Point3) {
        let [a, b] = self.edges[e].v;
        (&self.vertices[a], &self.vertices[b])
    }

    pub fn edge_length(&self, e: EdgeId) -> f64 {
        let (a, b) = self.edge_points(e);
        (b - a).norm()
    }

    /// An edge is level when both endpoint heights are exactly equal.
    pub fn is_level(&self, e: EdgeId) -> bool {
        let (a, b) = self.edge_points(e);
        a.z == b.z
    }

    pub fn face_points(&self, f: FaceId) -> [&Point3; 3] {
        let t = self.triangles[f];
        [&self.vertices[t[0]], &self.vertices[t[1]], &self.vertices[t[2]]]
    }

    /// The vertex of face `f` that is not an endpoint of edge `e`.
    pub fn opposite_vertex(&self, f: FaceId, e: EdgeId) -> VertexId {
        let [a, b] = self.edges[e].v;
        self.triangles[f]
            .into_iter()
            .find(|&v| v != a && v != b)
            .expect("edge belongs to face")
    }

    /// Index of the highest vertex, lowest index on ties.
    pub fn highest_vertex(&self) -> VertexId {
        let mut best = 0;
        for (i, p) in self.vertices.iter().enumerate() {
            if p.z > self.vertices[best].z {
                best = i;
            }
        }
        best
    }

    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();

        for (f, tri) in self.triangles.iter().enumerate() {
            let [a, b, c] = tri.map(|i| &self.vertices[i]);
            let scale = (b - a)
                .norm()
                .max((c - b).norm())
                .max((a - c).norm());
            let area3 = geom::triangle_area(a, b, c);
            let area2 = 0.5 * geom::orient2d(a, b, c).abs();
            let eps = 1e-12 * scale * scale;
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] || area3 <= eps || area2 <= eps
            {
                violations.push(Violation::DegenerateTriangle(f));
            }
        }

        for (e, edge) in self.edges.iter().enumerate() {
            if edge.faces.len() > 2 {
                violations.push(Violation::NonManifoldEdge {
                    edge: e,
                    faces: edge.faces.clone(),
                });
            }
        }

        // Sweep over x-sorted bounding boxes for projected overlaps.
        let tol = 1e-12 * self.diag;
        let boxes: Vec<(f64, f64)> = self
            .triangles
            .iter()
            .map(|t| {
                let xs = t.map(|i| self.vertices[i].x);
                (xs[0].min(xs[1]).min(xs[2]), xs[0].max(xs[1]).max(xs[2]))
            })
            .collect();
        let mut order: Vec<FaceId> = (0..self.triangles.len()).collect();
        order.sort_by(|&a, &b| boxes[a].0.total_cmp(&boxes[b].0).then(a.cmp(&b)));
        for (i, &f) in order.iter().enumerate() {
            for &g in &order[i + 1..] {
                if boxes[g].0 >= boxes[f].1 - tol {
                    break;
                }
                if geom::triangles_overlap_xy(self.face_points(f), self.face_points(g), tol) {
                    violations.push(Violation::Overlap(f.min(g), f.max(g)));
                }
            }
        }
        violations.sort();
        ValidationReport { violations }
    }

    pub fn geometry_params(&self) -> Result<GeomParams> {
        if self.vertices.len() < 3 {
            return Err(Error::TooFewVertices(self.vertices.len()));
        }
        let mut longest: f64 = 0.0;
        let mut sec_theta: f64 = 1.0;
        for e in 0..self.edges.len() {
            let (a, b) = self.edge_points(e);
            let len = (b - a).norm();
            longest = longest.max(len);
            let dz = (b.z - a.z).abs();
            if dz != 0.0 {
                sec_theta = sec_theta.max(len / dz);
            }
        }
        let mut min_height = f64::INFINITY;
        for (f, tri) in self.triangles.iter().enumerate() {
            let [a, b, c] = tri.map(|i| &self.vertices[i]);
            if geom::triangle_area(a, b, c) == 0.0 {
                return Err(Error::DegenerateFace(f));
            }
            for (p, q, r) in [(a, b, c), (b, c, a), (c, a, b)] {
                min_height = min_height.min(geom::point_segment(p, q, r).0);
            }
        }
        if min_height.is_nan() || min_height <= 0.0 || longest.is_nan() || longest <= 0.0 {
            return Err(Error::DegenerateFace(0));
        }
        let cos_theta = 1.0 / sec_theta;
        Ok(GeomParams {
            longest_edge: longest,
            min_height,
            theta: cos_theta.clamp(-1.0, 1.0).acos(),
            sec_theta,
            cos_theta,
            x: longest / min_height * sec_theta,
        })
    }

    /// Classifies `p` as a vertex, an edge-interior point, a face-interior
    /// point, or off the surface. Vertices win over edges and edges over faces
    /// whenever `p` is within [`Terrain::tolerance`] of several.
    pub fn locate(&self, p: &Point3) -> Location {
        let tol = self.tolerance();

        let mut best: Option<(f64, VertexId)> = None;
        for (i, v) in self.vertices.iter().enumerate() {
            let d = (p - v).norm();
            if d <= tol && best.is_none_or(|(bd, _)| d < bd) {
                best = Some((d, i));
            }
        }
        if let Some((_, v)) = best {
            return Location::Vertex(v);
        }

        let mut best: Option<(f64, EdgeId, f64)> = None;
        for e in 0..self.edges.len() {
            let (a, b) = self.edge_points(e);
            let (d, t) = geom::point_segment(p, a, b);
            if d <= tol && t > 0.0 && t < 1.0 && best.is_none_or(|(bd, _, _)| d < bd) {
                best = Some((d, e, t));
            }
        }
        if let Some((_, edge, t)) = best {
            return Location::Edge { edge, t };
        }

        let mut best: Option<(f64, FaceId, [f64; 3])> = None;
        for f in 0..self.triangles.len() {
            let [a, b, c] = self.face_points(f);
            let Some(w) = geom::barycentric_xy(p, a, b, c) else {
                continue;
            };
            let min_w = w[0].min(w[1]).min(w[2]);
            if min_w < -1e-12 {
                continue;
            }
            let z = w[0] * a.z + w[1] * b.z + w[2] * c.z;
            if (z - p.z).abs() <= tol && best.is_none_or(|(bw, _, _)| min_w > bw) {
                best = Some((min_w, f, w));
            }
        }
        match best {
            Some((_, face, bary)) => Location::Face { face, bary },
            None => Location::OffSurface,
        }
    }

    /// Surface point above `(x, y)`, if that xy position is covered.
    pub fn surface_point(&self, x: f64, y: f64) -> Option<Point3> {
        let q = Point3::new(x, y, 0.0);
        let mut best: Option<(f64, Point3)> = None;
        for f in 0..self.triangles.len() {
            let [a, b, c] = self.face_points(f);
            let Some(w) = geom::barycentric_xy(&q, a, b, c) else {
                continue;
            };
            let min_w = w[0].min(w[1]).min(w[2]);
            if min_w >= -1e-12 && best.is_none_or(|(bw, _)| min_w > bw) {
                let z = w[0] * a.z + w[1] * b.z + w[2] * c.z;
                best = Some((min_w, Point3::new(x, y, z)));
            }
        }
        best.map(|(_, p)| p)
    }

    /// The point a location describes.
    pub fn point_at(&self, loc: &Location) -> Option<Point3> {
        match *loc {
            Location::Vertex(v) => Some(self.vertices[v]),
            Location::Edge { edge, t } => {
                let (a, b) = self.edge_points(edge);
                Some(a + (b - a) * t)
            }
            Location::Face { face, bary } => {
                let [a, b, c] = self.face_points(face);
                Some(Point3::from(
                    a.coords * bary[0] + b.coords * bary[1] + c.coords * bary[2],
                ))
            }
            Location::OffSurface => None,
        }
    }

    /// Faces whose closed triangle contains the location.
    pub fn faces_at(&self, loc: &Location) -> Vec<FaceId> {
        match *loc {
            Location::Vertex(v) => self.vertex_faces[v].clone(),
            Location::Edge { edge, .. } => self.edges[edge].faces.clone(),
            Location::Face { face, .. } => vec![face],
            Location::OffSurface => Vec::new(),
        }
    }

    /// Is `p` within the location tolerance of the closed face `f`?
    pub fn face_contains(&self, f: FaceId, p: &Point3) -> bool {
        let [a, b, c] = self.face_points(f);
        geom::point_triangle_distance(p, a, b, c) <= self.tolerance()
    }

    /// Adds `p` as a vertex, splitting the face or edge that contains it.
    pub fn insert_source(&self, p: &Point3) -> Result<(Terrain, VertexId)> {
        let loc = self.locate(p);
        let mut vertices = self.vertices.clone();
        let mut triangles = self.triangles.clone();
        let q = vertices.len();
        match loc {
            Location::Vertex(v) => return Ok((self.clone().with_source(Some(v))?, v)),
            Location::OffSurface => {
                return Err(Error::OffSurface {
                    x: p.x,
                    y: p.y,
                    z: p.z,
                })
            }
            Location::Edge { edge, .. } => {
                vertices.push(self.point_at(&loc).expect("on surface"));
                let [a, b] = self.edges[edge].v;
                for &f in &self.edges[edge].faces {
                    let tri = self.triangles[f];
                    // Rotate so the split edge is (tri[0], tri[1]) in face order.
                    let k = (0..3)
                        .find(|&k| {
                            let (x, y) = (tri[k], tri[(k + 1) % 3]);
                            (x == a && y == b) || (x == b && y == a)
                        })
                        .expect("edge in face");
                    let (x, y, z) = (tri[k], tri[(k + 1) % 3], tri[(k + 2) % 3]);
                    triangles[f] = [x, q, z];
                    triangles.push([q, y, z]);
                }
            }
            Location::Face { face, .. } => {
                vertices.push(self.point_at(&loc).expect("on surface"));
                let [a, b, c] = self.triangles[face];
                triangles[face] = [a, b, q];
                triangles.push([b, c, q]);
                triangles.push([c, a, q]);
            }
        }
        let t = Terrain::new(vertices, triangles)?.with_source(Some(q))?;
        Ok((t, q))
    }

    /// Applies `f` to every vertex position, keeping the connectivity.
    pub fn map_vertices(&self, f: impl Fn(&Point3) -> Point3) -> Result<Terrain> {
        Terrain::new(self.vertices.iter().map(f).collect(), self.triangles.clone())?
            .with_source(self.source)
    }
}

fn parse_fields<T: std::str::FromStr>(line: &str, line_no: usize) -> Result<Vec<T>>
where
    T::Err: fmt::Display,
{
    line.split_whitespace()
        .map(|tok| {
            tok.parse::<T>().map_err(|e| Error::Parse {
                line: line_no,
                column: line.find(tok).unwrap_or(0) + 1,
                message: format!("{tok:?}: {e}"),
            })
        })
        .collect()
}

fn bbox_diagonal(vertices: &[Point3]) -> f64 {
    if vertices.is_empty() {
        return 0.0;
    }
    let mut lo = vertices[0];
    let mut hi = vertices[0];
    for v in vertices {
        lo = lo.inf(v);
        hi = hi.sup(v);
    }
    (hi - lo).norm()
}

/// The quantities `L`, `h`, `theta` and `X = (L / h) sec(theta)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GeomParams {
    /// Longest edge length.
    pub longest_edge: f64,
    /// Smallest distance from a vertex to a non-incident edge of one of its faces.
    pub min_height: f64,
    /// Largest angle between a non-level edge and the vertical, in radians.
    pub theta: f64,
    pub sec_theta: f64,
    pub cos_theta: f64,
    pub x: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Location {
    Vertex(VertexId),
    /// Interior of an edge, `t` measured from the lower-index endpoint.
    Edge { edge: EdgeId, t: f64 },
    /// Interior of a face, barycentric weights in triangle vertex order.
    Face { face: FaceId, bary: [f64; 3] },
    OffSurface,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Violation {
    DegenerateTriangle(FaceId),
    /// Two faces whose xy-projections overlap with positive area.
    Overlap(FaceId, FaceId),
    NonManifoldEdge { edge: EdgeId, faces: Vec<FaceId> },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DegenerateTriangle(t) => write!(f, "triangle {t} is degenerate"),
            Violation::Overlap(a, b) => write!(f, "triangles {a} and {b} overlap in projection"),
            Violation::NonManifoldEdge { edge, faces } => {
                write!(f, "edge {edge} borders {} faces", faces.len())
            }
        }
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate;

    const RAMP: &str = r#"{"vertices": [[0,0,1],[1,0,1],[0,1,0],[1,1,0]],
                           "triangles": [[0,1,2],[1,3,2]]}"#;

    #[test]
    fn smallest_mesh() {
        let t = Terrain::from_json(br#"{"vertices":[[0,0,0],[1,0,0],[0,1,0]],"triangles":[[0,1,2]]}"#)
            .unwrap();
        assert_eq!(t.edge_count(), 3);
        assert_eq!(t.face_count(), 1);
    }

    #[test]
    fn ramp_counts_and_edge_order() {
        let t = Terrain::from_json(RAMP.as_bytes()).unwrap();
        assert_eq!(t.edge_count(), 5);
        assert_eq!(t.face_count(), 2);
        let ends: Vec<_> = t.edges().iter().map(|e| e.v).collect();
        assert_eq!(ends, vec![[0, 1], [1, 2], [0, 2], [1, 3], [2, 3]]);
        assert!(t.validate().is_valid());
    }

    #[test]
    fn index_out_of_range() {
        let r = Terrain::from_json(br#"{"vertices":[[0,0,0],[1,0,0],[0,1,0]],"triangles":[[0,1,9]]}"#);
        assert!(matches!(r, Err(Error::IndexOutOfRange { index: 9, vertex_count: 3, .. })));
    }

    #[test]
    fn json_parse_error_has_position() {
        let r = Terrain::from_json(b"{\"vertices\": [[0,0,0],\n [1,0,]]}");
        match r {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn off_round_trip_and_errors() {
        let t = generate::ramp(1.0).unwrap();
        let back = Terrain::from_off(t.to_off().as_bytes()).unwrap();
        assert_eq!(back.vertices(), t.vertices());
        assert_eq!(back.triangles(), t.triangles());

        let quad = b"OFF\n4 1 0\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n4 0 1 2 3\n";
        assert!(matches!(Terrain::from_off(quad), Err(Error::Parse { line: 7, .. })));
        let bad = b"OFF\n3 1 0\n0 0 0\n1 x 0\n0 1 0\n3 0 1 2\n";
        assert!(matches!(Terrain::from_off(bad), Err(Error::Parse { line: 4, .. })));
    }

    #[test]
    fn stacked_triangles_overlap() {
        let t = Terrain::new(
            vec![
                Point3::new(0.0, 0.0, 0.0),
                Point3::new(1.0, 0.0, 0.0),
                Point3::new(0.0, 1.0, 0.0),
                Point3::new(0.0, 0.0, 1.0),
                Point3::new(1.0, 0.0, 1.0),
                Point3::new(0.0, 1.0, 1.0),
            ],
            vec![[0, 1, 2], [3, 4, 5]],
        )
        .unwrap();
        assert_eq!(t.validate().violations, vec![Violation::Overlap(0, 1)]);
    }

    #[test]
    fn zero_area_triangle_is_degenerate() {
        let t = Terrain::new(
            vec![
                Point3::new(0.0, 0.0, 0.0),
                Point3::new(1.0, 0.0, 0.0),
                Point3::new(2.0, 0.0, 0.0),
            ],
            vec![[0, 1, 2]],
        )
        .unwrap();
        assert!(t
            .validate()
            .violations
            .contains(&Violation::DegenerateTriangle(0)));
        assert!(matches!(t.geometry_params(), Err(Error::DegenerateFace(0))));
    }

    #[test]
    fn non_finite_rejected() {
        let r = Terrain::new(
            vec![
                Point3::new(0.0, 0.0, f64::NAN),
                Point3::new(1.0, 0.0, 0.0),
                Point3::new(0.0, 1.0, 0.0),
            ],
            vec![[0, 1, 2]],
        );
        assert!(matches!(r, Err(Error::NonFinite(0))));
    }

    #[test]
    fn ramp_params() {
        let p = generate::ramp(1.0).unwrap().geometry_params().unwrap();
        assert!((p.longest_edge - 3f64.sqrt()).abs() < 1e-15);
        assert!((p.min_height - (2.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!((p.theta - 0.955_316_618_124_509_3).abs() < 1e-12);
        assert!((p.sec_theta - 3f64.sqrt()).abs() < 1e-15);
        assert!((p.x - 3.0 * 1.5f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn horizontal_triangle_params() {
        let p = generate::horizontal_triangle(1.0).unwrap().geometry_params().unwrap();
        assert_eq!(p.longest_edge, 1.0);
        assert_eq!(p.theta, 0.0);
        assert_eq!(p.sec_theta, 1.0);
        assert!((p.min_height - 3f64.sqrt() / 2.0).abs() < 1e-15);
        assert!((p.x - 2.0 / 3f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn scaled_params() {
        let t = generate::ramp(1.0).unwrap();
        let s = t.map_vertices(|p| Point3::from(p.coords * 2.0)).unwrap();
        let (a, b) = (t.geometry_params().unwrap(), s.geometry_params().unwrap());
        assert!((b.longest_edge - 2.0 * a.longest_edge).abs() < 1e-14);
        assert!((b.min_height - 2.0 * a.min_height).abs() < 1e-14);
        assert!((b.theta - a.theta).abs() < 1e-14);
        assert!((b.x - a.x).abs() < 1e-12);
    }

    #[test]
    fn locate_ramp_points() {
        let t = generate::ramp(1.0).unwrap();
        assert_eq!(t.locate(&Point3::new(1.0, 0.0, 1.0)), Location::Vertex(1));
        match t.locate(&Point3::new(0.5, 0.5, 0.5)) {
            Location::Edge { edge, t: s } => {
                assert_eq!(t.edge(edge).v, [1, 2]);
                assert!((s - 0.5).abs() < 1e-15);
            }
            other => panic!("unexpected {other:?}"),
        }
        let c = 1.0 / 3.0;
        match t.locate(&Point3::new(c, c, 2.0 * c)) {
            Location::Face { face, bary } => {
                assert_eq!(face, 0);
                for w in bary {
                    assert!((w - c).abs() < 1e-12);
                }
            }
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(t.locate(&Point3::new(2.0, 2.0, 5.0)), Location::OffSurface);
        assert_eq!(t.locate(&Point3::new(0.2, 0.2, 5.0)), Location::OffSurface);
    }

    #[test]
    fn insert_source_cases() {
        let t = generate::ramp(1.0).unwrap();
        let (same, id) = t.insert_source(&Point3::new(0.0, 0.0, 1.0)).unwrap();
        assert_eq!(id, 0);
        assert_eq!(same.face_count(), 2);

        let c = 1.0 / 3.0;
        let (split, id) = t.insert_source(&Point3::new(c, c, 2.0 * c)).unwrap();
        assert_eq!(id, 4);
        assert_eq!(split.vertex_count(), 5);
        assert_eq!(split.face_count(), 4);
        assert!(split.validate().is_valid());
        assert_eq!(split.source(), Some(4));

        let (split, id) = t.insert_source(&Point3::new(0.5, 0.5, 0.5)).unwrap();
        assert_eq!(id, 4);
        assert_eq!(split.face_count(), 4);
        assert!(split.validate().is_valid());

        assert!(matches!(
            t.insert_source(&Point3::new(2.0, 2.0, 5.0)),
            Err(Error::OffSurface { .. })
        ));
    }

    #[test]
    fn insert_on_boundary_edge_splits_one_face() {
        let t = generate::ramp(1.0).unwrap();
        let (split, _) = t.insert_source(&Point3::new(0.5, 0.0, 1.0)).unwrap();
        assert_eq!(split.face_count(), 3);
        assert!(split.validate().is_valid());
    }
}
