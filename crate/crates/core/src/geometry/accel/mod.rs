//! Ray query acceleration structures.
//!
//! An [`Accelerator`] only prunes: it reports candidate triangle indices and the
//! caller runs the exact intersection kernel on each. Any conforming structure
//! therefore returns exactly the brute-force answer.

mod brute;
mod bvh;
mod grid;

use std::fmt;
use std::sync::OnceLock;

pub use brute::BruteForce;
pub use bvh::Bvh;
pub use grid::UniformGrid;

use super::{Triangle, Vec3};
use crate::registry::Registry;

/// Name of the structure used when none is configured.
pub const DEFAULT_ACCELERATOR: &str = "bvh";

#[derive(Debug, Clone, Copy)]
pub struct Ray {
    pub origin: Vec3,
    pub dir: Vec3,
    pub inv_dir: Vec3,
}

impl Ray {
    pub fn new(origin: Vec3, dir: Vec3) -> Self {
        Ray {
            origin,
            dir,
            inv_dir: Vec3::new(1.0 / dir.x, 1.0 / dir.y, 1.0 / dir.z),
        }
    }
}

pub trait Accelerator: Send + Sync + fmt::Debug {
    fn name(&self) -> &'static str;

    /// Calls `visit` with the index of every triangle the ray may hit within
    /// `[0, t_max]`. `visit` returns the current upper bound on useful hit
    /// distances; subtrees entered strictly beyond it may be skipped. An index
    /// may be reported more than once.
    fn traverse(&self, ray: &Ray, t_max: f64, visit: &mut dyn FnMut(usize) -> f64);
}

pub type AcceleratorFactory = fn(&[Triangle]) -> Box<dyn Accelerator>;

/// Built-in acceleration structures: `brute`, `bvh`, `grid`.
pub fn registry() -> &'static Registry<AcceleratorFactory> {
    static REGISTRY: OnceLock<Registry<AcceleratorFactory>> = OnceLock::new();
    REGISTRY.get_or_init(|| {
        Registry::<AcceleratorFactory>::new("accelerator")
            .with("brute", |t| Box::new(BruteForce::build(t)) as Box<dyn Accelerator>)
            .with("bvh", |t| Box::new(Bvh::build(t)) as Box<dyn Accelerator>)
            .with("grid", |t| Box::new(UniformGrid::build(t)) as Box<dyn Accelerator>)
    })
}

/// Conservative padding applied to node bounds so rounding in the slab test
/// never culls a triangle the kernel would hit.
pub(crate) fn pad_for(extent: Vec3) -> f64 {
    1e-9 + 1e-12 * extent.x.abs().max(extent.y.abs()).max(extent.z.abs())
}
