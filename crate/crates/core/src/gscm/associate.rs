use rayon::prelude::*;

use super::spawn::draw_normal;
use super::{GscmParams, MpcSet};
use crate::geometry::Scene;
use crate::rng::StreamKey;

/// Distances closer than this are treated as ties.
const TIE_TOLERANCE: f64 = 1e-12;

/// Index of the surface nearest to `p` and its distance; ties go to the lowest index.
pub fn nearest_surface(scene: &Scene, p: crate::geometry::Vec3) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for i in 0..scene.surfaces().len() {
        let d = scene.triangle(i).distance_to(p);
        if best.is_none_or(|(_, bd)| d < bd - TIE_TOLERANCE) {
            best = Some((i, d));
        }
    }
    best
}

/// Points each MPC at its nearest surface and adopts that surface's normal.
///
/// MPCs already associated with their nearest surface keep their normal. A
/// re-associated MPC takes the new surface normal, re-jittered from a stream
/// keyed by its id when `normal_jitter_sigma > 0`.
pub fn associate_surfaces(scene: &Scene, set: MpcSet, params: &GscmParams) -> MpcSet {
    let mpcs = set
        .mpcs
        .into_par_iter()
        .map(|mut m| {
            let Some((index, _)) = nearest_surface(scene, m.position) else {
                return m;
            };
            if index as u32 != m.surface_index {
                let normal = scene.surfaces()[index].normal;
                m.surface_index = index as u32;
                m.normal = if params.normal_jitter_sigma > 0.0 {
                    let key = StreamKey::new(params.spawn_seed)
                        .with(0x4153_534F)
                        .with(u64::from(m.id));
                    draw_normal(normal, params.normal_jitter_sigma, &mut key.rng())
                } else {
                    normal
                };
            }
            m
        })
        .collect();
    MpcSet { mpcs, ..set }
}
