//! Small geometric kernels shared by the terrain, oracle and query code.

use crate::{Point3, Vector3};

/// Closest point on segment `ab` to `p`, as `(distance, parameter)` with the
/// parameter clamped to `[0, 1]`.
pub fn point_segment(p: &Point3, a: &Point3, b: &Point3) -> (f64, f64) {
    let ab = b - a;
    let len2 = ab.norm_squared();
    if len2 == 0.0 {
        return ((p - a).norm(), 0.0);
    }
    let t = ((p - a).dot(&ab) / len2).clamp(0.0, 1.0);
    let q = a + ab * t;
    ((p - q).norm(), t)
}

/// Twice the signed area of the xy-projection of `abc` (positive for CCW).
pub fn orient2d(a: &Point3, b: &Point3, c: &Point3) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

/// Barycentric coordinates of the xy-projection of `p` in the projection of `abc`.
pub fn barycentric_xy(p: &Point3, a: &Point3, b: &Point3, c: &Point3) -> Option<[f64; 3]> {
    let area = orient2d(a, b, c);
    if area == 0.0 {
        return None;
    }
    let wa = orient2d(p, b, c) / area;
    let wb = orient2d(a, p, c) / area;
    Some([wa, wb, 1.0 - wa - wb])
}

pub fn triangle_area(a: &Point3, b: &Point3, c: &Point3) -> f64 {
    0.5 * (b - a).cross(&(c - a)).norm()
}

/// Euclidean distance from `p` to the closed triangle `abc` in 3D.
pub fn point_triangle_distance(p: &Point3, a: &Point3, b: &Point3, c: &Point3) -> f64 {
    let n: Vector3 = (b - a).cross(&(c - a));
    let n2 = n.norm_squared();
    if n2 > 0.0 {
        // Project onto the plane and test containment with the 3D barycentrics.
        let d = (p - a).dot(&n) / n2;
        let q = p - n * d;
        let wa = (b - q).cross(&(c - q)).dot(&n) / n2;
        let wb = (c - q).cross(&(a - q)).dot(&n) / n2;
        let wc = 1.0 - wa - wb;
        if wa >= 0.0 && wb >= 0.0 && wc >= 0.0 {
            return (p - q).norm();
        }
    }
    point_segment(p, a, b)
        .0
        .min(point_segment(p, b, c).0)
        .min(point_segment(p, c, a).0)
}

/// Do the xy-projections of two triangles overlap with positive area?
///
/// Separating-axis test over the six edge normals; intervals that only touch
/// within `tol` count as separated.
pub fn triangles_overlap_xy(t1: [&Point3; 3], t2: [&Point3; 3], tol: f64) -> bool {
    for tri in [&t1, &t2] {
        for k in 0..3 {
            let a = tri[k];
            let b = tri[(k + 1) % 3];
            let (nx, ny) = (-(b.y - a.y), b.x - a.x);
            let norm = nx.hypot(ny);
            if norm == 0.0 {
                continue;
            }
            let proj = |p: &Point3| (p.x * nx + p.y * ny) / norm;
            let (mut lo1, mut hi1) = (f64::INFINITY, f64::NEG_INFINITY);
            let (mut lo2, mut hi2) = (f64::INFINITY, f64::NEG_INFINITY);
            for p in t1 {
                let v = proj(p);
                lo1 = lo1.min(v);
                hi1 = hi1.max(v);
            }
            for p in t2 {
                let v = proj(p);
                lo2 = lo2.min(v);
                hi2 = hi2.max(v);
            }
            if hi1 <= lo2 + tol || hi2 <= lo1 + tol {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: f64, y: f64, z: f64) -> Point3 {
        Point3::new(x, y, z)
    }

    #[test]
    fn segment_distance_clamps_to_endpoints() {
        let (d, t) = point_segment(&p(-1.0, 1.0, 0.0), &p(0.0, 0.0, 0.0), &p(2.0, 0.0, 0.0));
        assert_eq!(t, 0.0);
        assert!((d - 2f64.sqrt()).abs() < 1e-15);
        let (d, t) = point_segment(&p(1.0, 1.0, 0.0), &p(0.0, 0.0, 0.0), &p(2.0, 0.0, 0.0));
        assert_eq!(t, 0.5);
        assert_eq!(d, 1.0);
    }

    #[test]
    fn triangle_distance_inside_and_outside() {
        let (a, b, c) = (p(0.0, 0.0, 0.0), p(1.0, 0.0, 0.0), p(0.0, 1.0, 0.0));
        assert!((point_triangle_distance(&p(0.2, 0.2, 0.5), &a, &b, &c) - 0.5).abs() < 1e-15);
        assert!((point_triangle_distance(&p(2.0, 0.0, 0.0), &a, &b, &c) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn shared_edge_is_not_overlap() {
        let (a, b, c, d) = (p(0.0, 0.0, 0.0), p(1.0, 0.0, 0.0), p(0.0, 1.0, 0.0), p(1.0, 1.0, 0.0));
        assert!(!triangles_overlap_xy([&a, &b, &c], [&b, &d, &c], 1e-12));
        assert!(triangles_overlap_xy([&a, &b, &c], [&a, &b, &c], 1e-12));
    }
}
