use super::{Accelerator, Ray};
use crate::geometry::Triangle;

/// Reports every triangle. Reference structure for the others.
#[derive(Debug)]
pub struct BruteForce {
    count: usize,
}

impl BruteForce {
    pub fn build(tris: &[Triangle]) -> Self {
        BruteForce { count: tris.len() }
    }
}

impl Accelerator for BruteForce {
    fn name(&self) -> &'static str {
        "brute"
    }

    fn traverse(&self, _ray: &Ray, _t_max: f64, visit: &mut dyn FnMut(usize) -> f64) {
        for i in 0..self.count {
            visit(i);
        }
    }
}
