//! Scene representation and deterministic ray casting.

mod aabb;
pub mod accel;
mod scene;
mod triangle;
mod vec3;

pub use aabb::Aabb;
pub use scene::{
    box_surfaces, quad_surfaces, GeometryError, RayHit, Scene, SceneBuilder, Solid, Surface, GRAZE_NUDGE, RAY_EPSILON,
};
pub use triangle::{Triangle, TriangleHit, GRAZE_TOLERANCE};
pub use vec3::Vec3;
