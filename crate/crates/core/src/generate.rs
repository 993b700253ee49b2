//! Deterministic terrain families used by tests, benchmarks and the CLI.
//!
//! Every generator validates its output and sets the source to the highest
//! vertex unless noted otherwise.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geom::orient2d;
use crate::terrain::Terrain;
use crate::{Point3, VertexId};

fn p(x: f64, y: f64, z: f64) -> Point3 {
    Point3::new(x, y, z)
}

fn finish(vertices: Vec<Point3>, triangles: Vec<[VertexId; 3]>) -> Result<Terrain> {
    let t = Terrain::new(vertices, triangles)?;
    let report = t.validate();
    if let Some(v) = report.violations.first() {
        return Err(Error::InvalidParameter(format!("generated terrain is invalid: {v}")));
    }
    let top = t.highest_vertex();
    t.with_source(Some(top))
}

fn positive(name: &str, x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be positive, got {x}")))
    }
}

/// Two faces over the unit square: A(0,0,1) B(1,0,1) C(0,1,0) D(1,1,0).
pub fn ramp(scale: f64) -> Result<Terrain> {
    positive("scale", scale)?;
    let s = scale;
    finish(
        vec![p(0.0, 0.0, s), p(s, 0.0, s), p(0.0, s, 0.0), p(s, s, 0.0)],
        vec![[0, 1, 2], [1, 3, 2]],
    )
}

/// Equilateral triangle with the given side at z = 0.
pub fn horizontal_triangle(side: f64) -> Result<Terrain> {
    positive("side", side)?;
    let h = side * 3f64.sqrt() / 2.0;
    finish(
        vec![p(0.0, 0.0, 0.0), p(side, 0.0, 0.0), p(side / 2.0, h, 0.0)],
        vec![[0, 1, 2]],
    )
}

/// Two long thin faces sharing a sloped edge of length about `aspect`, so
/// that `L / h >= aspect`.
pub fn skinny(aspect: f64) -> Result<Terrain> {
    if !(aspect.is_finite() && aspect >= 1.0) {
        return Err(Error::InvalidParameter(format!("aspect must be >= 1, got {aspect}")));
    }
    let a = aspect;
    let z = |x: f64| 0.5 * (a - x);
    finish(
        vec![
            p(0.0, 0.0, z(0.0)),
            p(a, 0.0, z(a)),
            p(a / 2.0, -1.0, z(a / 2.0)),
            p(a / 2.0, 1.0, z(a / 2.0)),
        ],
        vec![[0, 2, 1], [0, 1, 3]],
    )
}

/// A face ABC whose edge AB is level and whose apex C rises by `tan(tilt)`,
/// surrounded by faces whose lower vertices are pushed well down so the
/// neighbours are not themselves skinny.
pub fn nearlevel(tilt: f64) -> Result<Terrain> {
    if !(tilt > 0.0 && tilt < std::f64::consts::FRAC_PI_2) {
        return Err(Error::InvalidParameter(format!("tilt must be in (0, pi/2), got {tilt}")));
    }
    let zc = 1.0 + tilt.tan();
    finish(
        vec![
            p(0.0, 0.0, 1.0),       // A
            p(1.0, 0.0, 1.0),       // B
            p(0.5, 1.0, zc),        // C
            p(0.5, -1.2, 0.4),      // D
            p(2.0, 0.8, 0.6),       // E
            p(-1.0, 0.8, 0.6),      // F
            p(0.5, 2.2, zc + 0.3),  // S
        ],
        vec![
            [0, 1, 2],
            [0, 3, 1],
            [1, 3, 4],
            [1, 4, 2],
            [2, 4, 6],
            [2, 6, 5],
            [0, 2, 5],
            [0, 5, 3],
        ],
    )
}

/// `n x n` jittered grid with unit spacing. Each cell is split along the
/// diagonal that satisfies the empty-circle test; heights are quantised to
/// quarter steps and follow a random bump, which keeps slopes moderate.
pub fn random_grid(n: usize, seed: u64) -> Result<Terrain> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("grid size must be >= 2, got {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = (n - 1) as f64;
    let (cx, cy) = (rng.gen_range(0.3..0.7) * m, rng.gen_range(0.3..0.7) * m);
    let rmax = m * std::f64::consts::SQRT_2;
    let mut vertices = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            let x = i as f64 + rng.gen_range(-0.15..0.15);
            let y = j as f64 + rng.gen_range(-0.15..0.15);
            let r = ((x - cx).powi(2) + (y - cy).powi(2)).sqrt();
            let bump = 3.0 * (1.0 - r / rmax) + rng.gen_range(-0.6..0.6);
            let level = bump.round().clamp(0.0, 3.0);
            vertices.push(p(x, y, 0.25 * level));
        }
    }
    let id = |i: usize, j: usize| j * n + i;
    let mut triangles = Vec::with_capacity(2 * (n - 1) * (n - 1));
    for j in 0..n - 1 {
        for i in 0..n - 1 {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            if in_circle(&vertices[a], &vertices[b], &vertices[c], &vertices[d]) {
                triangles.push([a, b, d]);
                triangles.push([b, c, d]);
            } else {
                triangles.push([a, b, c]);
                triangles.push([a, c, d]);
            }
        }
    }
    finish(vertices, triangles)
}

/// Whether `d` lies strictly inside the xy circumcircle of ccw `a, b, c`.
fn in_circle(a: &Point3, b: &Point3, c: &Point3, d: &Point3) -> bool {
    let row = |q: &Point3| {
        let (x, y) = (q.x - d.x, q.y - d.y);
        [x, y, x * x + y * y]
    };
    let m = nalgebra::Matrix3::from_rows(&[row(a).into(), row(b).into(), row(c).into()]);
    debug_assert!(orient2d(a, b, c) > 0.0);
    m.determinant() > 0.0
}

/// A centre vertex strictly below its ring; the source is the centre, from
/// which nothing else can be reached.
pub fn pit() -> Result<Terrain> {
    let t = finish(
        vec![
            p(0.0, 0.0, 0.0),
            p(1.0, 0.0, 1.0),
            p(0.0, 1.0, 1.0),
            p(-1.0, 0.0, 1.0),
            p(0.0, -1.0, 1.0),
        ],
        vec![[0, 1, 2], [0, 2, 3], [0, 3, 4], [0, 4, 1]],
    )?;
    t.with_source(Some(0))
}

/// Four faces threaded by the isoline z = 0.5 from S = vertex 0 to
/// V = vertex 5; that isoline is the only descending path between them.
/// Edge crossing heights are chosen so that evenly spaced Steiner points
/// miss z = 0.5 on every crossed edge.
pub fn isoline_strip() -> Result<Terrain> {
    let t = finish(
        vec![
            p(0.0, 0.5, 0.5), // S
            p(1.0, 0.0, 0.0), // B1
            p(1.0, 1.0, 1.2), // T1
            p(2.0, 0.0, 0.1), // B2
            p(2.0, 1.0, 0.9), // T2
            p(3.0, 0.5, 0.5), // V
        ],
        vec![[0, 1, 2], [1, 4, 2], [1, 3, 4], [3, 5, 4]],
    )?;
    t.with_source(Some(0))
}

/// The exact isoline path through [`isoline_strip`].
pub fn isoline_strip_path() -> Vec<Point3> {
    let on = |a: Point3, b: Point3| {
        let s = (0.5 - a.z) / (b.z - a.z);
        a + (b - a) * s
    };
    vec![
        p(0.0, 0.5, 0.5),
        on(p(1.0, 0.0, 0.0), p(1.0, 1.0, 1.2)),
        on(p(1.0, 0.0, 0.0), p(2.0, 1.0, 0.9)),
        on(p(2.0, 0.0, 0.1), p(2.0, 1.0, 0.9)),
        p(3.0, 0.5, 0.5),
    ]
}

/// A random pair of faces sharing the edge from vertex 0 to vertex 1, with a
/// high vertex 2 on one side and a low vertex 3 on the other.
pub fn two_face(seed: u64) -> Result<Terrain> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Height bands are separated so that no edge is close to level.
    let a = p(0.0, -rng.gen_range(0.5..1.5), rng.gen_range(0.6..0.8));
    let b = p(0.0, rng.gen_range(0.5..1.5), rng.gen_range(1.1..1.3));
    let hi = p(-rng.gen_range(0.5..1.5), rng.gen_range(-0.4..0.4), rng.gen_range(1.7..2.2));
    let lo = p(rng.gen_range(0.5..1.5), rng.gen_range(-0.4..0.4), rng.gen_range(0.0..0.35));
    finish(vec![a, b, hi, lo], vec![[0, 1, 2], [0, 3, 1]])
}

/// Uniformly random point of a uniformly random face.
pub fn random_surface_point<R: Rng + ?Sized>(t: &Terrain, rng: &mut R) -> Point3 {
    let f = rng.gen_range(0..t.face_count());
    let [a, b, c] = t.face_points(f);
    let (mut u, mut v) = (rng.gen::<f64>(), rng.gen::<f64>());
    if u + v > 1.0 {
        (u, v) = (1.0 - u, 1.0 - v);
    }
    a + (b - a) * u + (c - a) * v
}
