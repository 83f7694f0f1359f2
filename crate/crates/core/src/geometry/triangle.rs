//! Ray/triangle intersection and point/triangle distance kernels.
//!
//! Every query path in the crate (brute force and accelerated) runs the same
//! [`Triangle::intersect`] so that accelerated results match brute force bit for bit.

use super::{Aabb, Vec3};

/// Barycentric tolerance under which a hit is considered to graze an edge or vertex.
pub const GRAZE_TOLERANCE: f64 = 1e-9;

/// Precomputed triangle used by the intersection kernel.
#[derive(Debug, Clone, Copy)]
pub struct Triangle {
    pub v0: Vec3,
    pub e1: Vec3,
    pub e2: Vec3,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriangleHit {
    pub t: f64,
    pub u: f64,
    pub v: f64,
}

impl TriangleHit {
    /// True when the hit lies within [`GRAZE_TOLERANCE`] of an edge or vertex.
    pub fn grazes_edge(&self) -> bool {
        self.u < GRAZE_TOLERANCE || self.v < GRAZE_TOLERANCE || 1.0 - self.u - self.v < GRAZE_TOLERANCE
    }
}

impl Triangle {
    pub fn new(a: Vec3, b: Vec3, c: Vec3) -> Self {
        Triangle {
            v0: a,
            e1: b - a,
            e2: c - a,
        }
    }

    pub fn vertices(&self) -> [Vec3; 3] {
        [self.v0, self.v0 + self.e1, self.v0 + self.e2]
    }

    pub fn bounds(&self) -> Aabb {
        let mut b = Aabb::empty();
        for v in self.vertices() {
            b.grow(v);
        }
        b
    }

    pub fn centroid(&self) -> Vec3 {
        self.v0 + (self.e1 + self.e2) / 3.0
    }

    pub fn area(&self) -> f64 {
        0.5 * self.e1.cross(self.e2).norm()
    }

    /// Möller–Trumbore. Edges are inclusive; rays parallel to the plane never hit.
    #[inline]
    pub fn intersect(&self, origin: Vec3, dir: Vec3) -> Option<TriangleHit> {
        let p = dir.cross(self.e2);
        let det = self.e1.dot(p);
        if det.abs() < 1e-14 {
            return None;
        }
        let inv_det = 1.0 / det;
        let s = origin - self.v0;
        let u = s.dot(p) * inv_det;
        if !(0.0..=1.0).contains(&u) {
            return None;
        }
        let q = s.cross(self.e1);
        let v = dir.dot(q) * inv_det;
        if v < 0.0 || u + v > 1.0 {
            return None;
        }
        let t = self.e2.dot(q) * inv_det;
        Some(TriangleHit { t, u, v })
    }

    /// Closest point on the triangle to `p` (Ericson, Real-Time Collision Detection 5.1.5).
    pub fn closest_point(&self, p: Vec3) -> Vec3 {
        let a = self.v0;
        let b = self.v0 + self.e1;
        let c = self.v0 + self.e2;
        let ab = self.e1;
        let ac = self.e2;
        let ap = p - a;
        let d1 = ab.dot(ap);
        let d2 = ac.dot(ap);
        if d1 <= 0.0 && d2 <= 0.0 {
            return a;
        }
        let bp = p - b;
        let d3 = ab.dot(bp);
        let d4 = ac.dot(bp);
        if d3 >= 0.0 && d4 <= d3 {
            return b;
        }
        let vc = d1 * d4 - d3 * d2;
        if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
            let v = d1 / (d1 - d3);
            return a + ab * v;
        }
        let cp = p - c;
        let d5 = ab.dot(cp);
        let d6 = ac.dot(cp);
        if d6 >= 0.0 && d5 <= d6 {
            return c;
        }
        let vb = d5 * d2 - d1 * d6;
        if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
            let w = d2 / (d2 - d6);
            return a + ac * w;
        }
        let va = d3 * d6 - d5 * d4;
        if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
            let w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
            return b + (c - b) * w;
        }
        let denom = 1.0 / (va + vb + vc);
        let v = vb * denom;
        let w = vc * denom;
        a + ab * v + ac * w
    }

    pub fn distance_to(&self, p: Vec3) -> f64 {
        self.closest_point(p).distance(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_tri() -> Triangle {
        Triangle::new(Vec3::ZERO, Vec3::X, Vec3::Y)
    }

    #[test]
    fn perpendicular_hit() {
        let hit = unit_tri().intersect(Vec3::new(0.25, 0.25, 2.0), -Vec3::Z).unwrap();
        assert!((hit.t - 2.0).abs() < 1e-15);
        assert!(!hit.grazes_edge());
    }

    #[test]
    fn parallel_ray_misses() {
        assert!(unit_tri().intersect(Vec3::new(-1.0, 0.25, 0.0), Vec3::X).is_none());
    }

    #[test]
    fn edge_hit_flags_grazing() {
        let hit = unit_tri().intersect(Vec3::new(0.5, 0.0, 1.0), -Vec3::Z).unwrap();
        assert!(hit.grazes_edge());
    }

    #[test]
    fn closest_point_regions() {
        let t = unit_tri();
        assert_eq!(t.closest_point(Vec3::new(-1.0, -1.0, 0.0)), Vec3::ZERO);
        assert!((t.distance_to(Vec3::new(0.2, 0.2, 3.0)) - 3.0).abs() < 1e-12);
        let p = t.closest_point(Vec3::new(1.0, 1.0, 0.0));
        assert!((p - Vec3::new(0.5, 0.5, 0.0)).norm() < 1e-12);
        assert!((t.distance_to(Vec3::new(0.5, -2.0, 0.0)) - 2.0).abs() < 1e-12);
    }
}
