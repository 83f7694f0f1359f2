use serde::{Deserialize, Serialize};

use super::Vec3;

/// Axis-aligned box, used both for scene areas and inside the acceleration structures.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb {
    pub fn new(min: Vec3, max: Vec3) -> Self {
        Aabb { min, max }
    }

    /// The inverted box; growing it by any point yields that point.
    pub fn empty() -> Self {
        Aabb {
            min: Vec3::splat(f64::INFINITY),
            max: Vec3::splat(f64::NEG_INFINITY),
        }
    }

    pub fn unit() -> Self {
        Aabb::new(Vec3::ZERO, Vec3::splat(1.0))
    }

    pub fn is_valid(&self) -> bool {
        self.min.is_finite()
            && self.max.is_finite()
            && self.min.x <= self.max.x
            && self.min.y <= self.max.y
            && self.min.z <= self.max.z
    }

    pub fn grow(&mut self, p: Vec3) {
        self.min = self.min.min(p);
        self.max = self.max.max(p);
    }

    pub fn union(&self, o: &Aabb) -> Aabb {
        Aabb::new(self.min.min(o.min), self.max.max(o.max))
    }

    pub fn extent(&self) -> Vec3 {
        self.max - self.min
    }

    pub fn center(&self) -> Vec3 {
        (self.min + self.max) * 0.5
    }

    pub fn diagonal(&self) -> f64 {
        self.extent().norm()
    }

    /// Closed containment test.
    pub fn contains(&self, p: Vec3) -> bool {
        p.x >= self.min.x
            && p.x <= self.max.x
            && p.y >= self.min.y
            && p.y <= self.max.y
            && p.z >= self.min.z
            && p.z <= self.max.z
    }

    pub fn contains_box(&self, o: &Aabb) -> bool {
        self.contains(o.min) && self.contains(o.max)
    }

    /// Footprint in the horizontal plane, m².
    pub fn horizontal_area(&self) -> f64 {
        let e = self.extent();
        e.x * e.y
    }

    pub fn longest_axis(&self) -> usize {
        let e = self.extent();
        if e.x >= e.y && e.x >= e.z {
            0
        } else if e.y >= e.z {
            1
        } else {
            2
        }
    }

    pub fn padded(&self, pad: f64) -> Aabb {
        Aabb::new(self.min - Vec3::splat(pad), self.max + Vec3::splat(pad))
    }

    /// Slab test. Returns the parametric entry distance if the ray overlaps the
    /// box within `[t_min, t_max]`.
    #[inline]
    pub fn ray_entry(&self, origin: Vec3, inv_dir: Vec3, t_min: f64, t_max: f64) -> Option<f64> {
        let mut lo = t_min;
        let mut hi = t_max;
        for axis in 0..3 {
            let inv = inv_dir[axis];
            let mut t0 = (self.min[axis] - origin[axis]) * inv;
            let mut t1 = (self.max[axis] - origin[axis]) * inv;
            if t0.is_nan() || t1.is_nan() {
                // 0 * inf: origin lies on the slab plane of a parallel ray.
                if origin[axis] < self.min[axis] || origin[axis] > self.max[axis] {
                    return None;
                }
                continue;
            }
            if t0 > t1 {
                std::mem::swap(&mut t0, &mut t1);
            }
            lo = lo.max(t0);
            hi = hi.min(t1);
            if lo > hi {
                return None;
            }
        }
        Some(lo)
    }
}
