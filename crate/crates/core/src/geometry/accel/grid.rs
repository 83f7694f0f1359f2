use super::{pad_for, Accelerator, Ray};
use crate::geometry::{Aabb, Triangle, Vec3};

/// Uniform voxel grid walked with a 3D DDA (Amanatides and Woo).
#[derive(Debug)]
pub struct UniformGrid {
    bounds: Aabb,
    dims: [usize; 3],
    cell: Vec3,
    cells: Vec<Vec<u32>>,
}

impl UniformGrid {
    pub fn build(tris: &[Triangle]) -> Self {
        let mut bounds = Aabb::empty();
        for t in tris {
            bounds = bounds.union(&t.bounds());
        }
        if tris.is_empty() {
            return UniformGrid {
                bounds: Aabb::new(Vec3::ZERO, Vec3::ZERO),
                dims: [0; 3],
                cell: Vec3::ZERO,
                cells: Vec::new(),
            };
        }
        let bounds = bounds.padded(pad_for(bounds.extent()) + 1e-6);
        let ext = bounds.extent();
        // Roughly two triangles per cell for an isotropic scene.
        let volume = ext.x * ext.y * ext.z;
        let k = (2.0 * tris.len() as f64 / volume).cbrt();
        let mut dims = [1usize; 3];
        for axis in 0..3 {
            dims[axis] = ((ext[axis] * k).round() as usize).clamp(1, 128);
        }
        let cell = Vec3::new(ext.x / dims[0] as f64, ext.y / dims[1] as f64, ext.z / dims[2] as f64);
        let mut grid = UniformGrid {
            bounds,
            dims,
            cell,
            cells: vec![Vec::new(); dims[0] * dims[1] * dims[2]],
        };
        for (i, t) in tris.iter().enumerate() {
            let b = t.bounds().padded(pad_for(ext));
            let lo = grid.cell_of(b.min);
            let hi = grid.cell_of(b.max);
            for z in lo[2]..=hi[2] {
                for y in lo[1]..=hi[1] {
                    for x in lo[0]..=hi[0] {
                        let c = grid.flat([x, y, z]);
                        grid.cells[c].push(i as u32);
                    }
                }
            }
        }
        grid
    }

    fn cell_of(&self, p: Vec3) -> [usize; 3] {
        let mut c = [0usize; 3];
        for axis in 0..3 {
            let f = ((p[axis] - self.bounds.min[axis]) / self.cell[axis]).floor();
            c[axis] = (f.max(0.0) as usize).min(self.dims[axis] - 1);
        }
        c
    }

    fn flat(&self, c: [usize; 3]) -> usize {
        (c[2] * self.dims[1] + c[1]) * self.dims[0] + c[0]
    }
}

impl Accelerator for UniformGrid {
    fn name(&self) -> &'static str {
        "grid"
    }

    fn traverse(&self, ray: &Ray, t_max: f64, visit: &mut dyn FnMut(usize) -> f64) {
        if self.cells.is_empty() {
            return;
        }
        let Some(t_enter) = self.bounds.ray_entry(ray.origin, ray.inv_dir, 0.0, t_max) else {
            return;
        };
        let start = ray.origin + ray.dir * t_enter;
        let mut cell = self.cell_of(start);
        let mut step = [0i64; 3];
        let mut t_next = [f64::INFINITY; 3];
        let mut t_delta = [f64::INFINITY; 3];
        for axis in 0..3 {
            let d = ray.dir[axis];
            if d > 0.0 {
                step[axis] = 1;
                let boundary = self.bounds.min[axis] + (cell[axis] + 1) as f64 * self.cell[axis];
                t_next[axis] = (boundary - ray.origin[axis]) / d;
                t_delta[axis] = self.cell[axis] / d;
            } else if d < 0.0 {
                step[axis] = -1;
                let boundary = self.bounds.min[axis] + cell[axis] as f64 * self.cell[axis];
                t_next[axis] = (boundary - ray.origin[axis]) / d;
                t_delta[axis] = -self.cell[axis] / d;
            }
        }
        let mut limit = t_max;
        let mut t_cell = t_enter;
        loop {
            // Cells are padded only at the outer bounds, so walk one cell past
            // the current limit to cover hits that straddle a boundary.
            for &tri in &self.cells[self.flat(cell)] {
                limit = limit.min(visit(tri as usize));
            }
            if t_cell > limit + self.cell.norm() {
                return;
            }
            let axis = if t_next[0] <= t_next[1] && t_next[0] <= t_next[2] {
                0
            } else if t_next[1] <= t_next[2] {
                1
            } else {
                2
            };
            t_cell = t_next[axis];
            let next = cell[axis] as i64 + step[axis];
            if next < 0 || next >= self.dims[axis] as i64 {
                return;
            }
            cell[axis] = next as usize;
            t_next[axis] += t_delta[axis];
        }
    }
}
