//! Scene geometry, GSCM initialisation and run-time channel synthesis.

// `!(x > y)` is used on purpose so NaN falls into the rejecting branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod config;
pub mod engine;
pub mod geometry;
pub mod gscm;
pub mod mobility;
pub mod pipeline;
pub mod registry;
pub mod rng;

pub use geometry::{Aabb, Scene, Vec3};
