//! GSCM initialisation: spawn, filter, associate and tabulate MPCs.

mod associate;
mod filter;
mod fit;
mod lut;
mod params;
pub mod spawn;
mod spawn_file;

use thiserror::Error;

pub use associate::{associate_surfaces, nearest_surface};
pub use filter::{filter_mpcs, grid_pitch, observation_grid};
pub use fit::fit_mpc_parameters;
pub use lut::{build_lut, VisibilityLut};
pub(crate) use params::{check_finite, check_non_negative, check_positive};
pub use params::{GscmParams, Mpc, MpcSet, ParamViolation};
pub use spawn::{spawn_mpcs, SpawnDistribution};
pub use spawn_file::{decode_spawn, load_spawn, save_spawn, SPAWN_MAGIC, SPAWN_VERSION};

use crate::geometry::Scene;
use crate::registry::UnknownStrategy;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GscmError {
    #[error("MPC set was built for scene {found:016x}, not {expected:016x}")]
    SceneMismatch { expected: u64, found: u64 },
    #[error(transparent)]
    UnknownStrategy(#[from] UnknownStrategy),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("all sample angles are identical")]
    DegenerateFit,
    #[error("need at least 2 samples, got {0}")]
    InsufficientSamples(usize),
    #[error("sample (angle {angle}, gain {gain}) is out of range")]
    InvalidSample { angle: f64, gain: f64 },
    #[error("not a spawn file (bad magic)")]
    BadMagic,
    #[error("unsupported spawn file version {0}")]
    VersionUnsupported(u16),
    #[error("spawn file is truncated")]
    Truncated,
    #[error("spawn file has {0} trailing bytes")]
    TrailingBytes(usize),
    #[error("spawn record {index}: {reason}")]
    InvalidRecord { index: usize, reason: String },
}

/// Counts recorded while running the full initialisation pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SpawnReport {
    pub spawned: [usize; 3],
    pub kept: [usize; 3],
}

/// spawn → filter → associate.
pub fn initialise(scene: &Scene, params: &GscmParams) -> Result<(MpcSet, SpawnReport), GscmError> {
    let spawned = spawn_mpcs(scene, params)?;
    let before = spawned.counts_per_order();
    let filtered = filter_mpcs(scene, spawned, params)?;
    let set = if filtered.is_empty() {
        filtered
    } else {
        associate_surfaces(scene, filtered, params)
    };
    let report = SpawnReport {
        spawned: before,
        kept: set.counts_per_order(),
    };
    Ok((set, report))
}
