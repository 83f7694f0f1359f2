use std::sync::OnceLock;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Normal, Poisson};
use rayon::prelude::*;

use super::{GscmError, GscmParams, Mpc, MpcSet};
use crate::geometry::{Scene, Triangle, Vec3};
use crate::registry::Registry;
use crate::rng::StreamKey;

pub const DEFAULT_DISTRIBUTION: &str = "uniform";

/// Spawned MPCs sit this far off their surface, along its normal, so that
/// ray queries never start exactly on a face.
pub const SURFACE_OFFSET: f64 = 1e-5;

/// Where on a surface MPC positions are drawn.
pub trait SpawnDistribution: Send + Sync {
    fn name(&self) -> &'static str;
    fn sample(&self, tri: &Triangle, rng: &mut ChaCha8Rng) -> Vec3;
}

/// Uniform by area over the triangle.
#[derive(Debug, Default)]
pub struct UniformOnTriangle;

impl SpawnDistribution for UniformOnTriangle {
    fn name(&self) -> &'static str {
        "uniform"
    }

    fn sample(&self, tri: &Triangle, rng: &mut ChaCha8Rng) -> Vec3 {
        let r1: f64 = rng.random::<f64>().sqrt();
        let r2: f64 = rng.random();
        tri.v0 + tri.e1 * (r1 * (1.0 - r2)) + tri.e2 * (r1 * r2)
    }
}

pub type DistributionFactory = fn() -> Box<dyn SpawnDistribution>;

pub fn registry() -> &'static Registry<DistributionFactory> {
    static REGISTRY: OnceLock<Registry<DistributionFactory>> = OnceLock::new();
    REGISTRY.get_or_init(|| {
        Registry::new("spawn distribution")
            .with("uniform", || Box::new(UniformOnTriangle) as Box<dyn SpawnDistribution>)
    })
}

/// Stream key for the draws of one (surface, order) cell.
pub fn spawn_stream(spawn_seed: u64, surface_index: usize, order: u8) -> StreamKey {
    StreamKey::new(spawn_seed)
        .with(0x5350_4157) // "SPAW"
        .with(surface_index as u64)
        .with(u64::from(order))
}

/// Tilts `normal` by `angle` about a tangent axis at azimuth `azimuth`.
pub(crate) fn jitter_normal(normal: Vec3, azimuth: f64, angle: f64) -> Vec3 {
    if angle == 0.0 {
        return normal;
    }
    let t1 = normal.any_orthogonal();
    let t2 = normal.cross(t1);
    let axis = t1 * azimuth.cos() + t2 * azimuth.sin();
    normal.rotate_about(axis, angle).normalized()
}

/// Draws the jittered normal; always consumes two variates.
pub(crate) fn draw_normal(normal: Vec3, sigma: f64, rng: &mut ChaCha8Rng) -> Vec3 {
    let azimuth: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let z: f64 = rng.sample(rand_distr::StandardNormal);
    jitter_normal(normal, azimuth, (z * sigma).abs())
}

/// Poisson count for one (surface, order) cell, the first draw of its stream.
pub fn draw_count(lambda: f64, rng: &mut ChaCha8Rng) -> usize {
    if lambda <= 0.0 {
        return 0;
    }
    Poisson::new(lambda).expect("positive finite rate").sample(rng) as usize
}

/// Spawns the three order populations over every surface.
///
/// Each (surface, order) cell draws from its own keyed stream, so the result
/// does not depend on how cells are scheduled.
pub fn spawn_mpcs(scene: &Scene, params: &GscmParams) -> Result<MpcSet, GscmError> {
    let distribution = (registry().get(&params.distribution)?)();
    let g0_db = Normal::new(params.g0_log_mean, params.g0_log_sigma)
        .map_err(|e| GscmError::InvalidParams(format!("g0 distribution: {e}")))?;
    let xi_dist = if params.xi_mean > 0.0 {
        Some(Exp::new(1.0 / params.xi_mean).map_err(|e| GscmError::InvalidParams(format!("xi distribution: {e}")))?)
    } else {
        None
    };
    let active = scene.active_area();

    let cells: Vec<(usize, u8)> = (0..scene.surfaces().len())
        .flat_map(|s| (1..=3u8).map(move |k| (s, k)))
        .collect();
    let spawned: Vec<Vec<Mpc>> = cells
        .par_iter()
        .map(|&(s, order)| {
            let surface = &scene.surfaces()[s];
            let tri = surface.triangle();
            let density = params.density_per_order[(order - 1) as usize];
            let mut rng = spawn_stream(params.spawn_seed, s, order).rng();
            let count = draw_count(density * tri.area(), &mut rng);
            let mut out = Vec::with_capacity(count);
            for _ in 0..count {
                let on_surface = distribution.sample(&tri, &mut rng);
                let normal = draw_normal(surface.normal, params.normal_jitter_sigma, &mut rng);
                let g0 = 10f64.powf(g0_db.sample(&mut rng) / 10.0);
                let xi = xi_dist.map_or(0.0, |d| d.sample(&mut rng));
                let position = on_surface + surface.normal * SURFACE_OFFSET;
                if !active.contains(position) {
                    continue;
                }
                out.push(Mpc {
                    id: 0,
                    order_population: order,
                    position,
                    normal,
                    g0,
                    xi,
                    surface_index: s as u32,
                });
            }
            out
        })
        .collect();

    let set = MpcSet {
        mpcs: spawned.into_iter().flatten().collect(),
        spawn_seed: params.spawn_seed,
        scene_hash: scene.content_hash(),
    };
    Ok(set.redensify())
}
