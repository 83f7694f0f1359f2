use rayon::prelude::*;

use super::{GscmError, GscmParams, MpcSet};
use crate::geometry::{Aabb, Scene, Vec3};

/// Pitch of the observation grid over a traversable area: max(1 m, diagonal / 50).
pub fn grid_pitch(area: &Aabb) -> f64 {
    (area.diagonal() / 50.0).max(1.0)
}

/// Regular sample grid over `area` at [`grid_pitch`], nodes inside solids excluded.
pub fn observation_grid(scene: &Scene) -> Vec<Vec3> {
    let area = scene.traversable_area();
    let pitch = grid_pitch(&area);
    let ext = area.extent();
    let n = |e: f64| (e / pitch + 1e-9).floor() as usize + 1;
    let (nx, ny, nz) = (n(ext.x), n(ext.y), n(ext.z));
    let mut nodes = Vec::with_capacity(nx * ny * nz);
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                nodes.push(area.min + Vec3::new(i as f64, j as f64, k as f64) * pitch);
            }
        }
    }
    nodes.retain(|&p| !scene.point_inside_solid(p));
    nodes
}

/// True iff `p` is visible from at least one node within `range`.
pub(crate) fn observed(scene: &Scene, nodes: &[Vec3], p: Vec3, range: f64) -> bool {
    let mut near: Vec<(f64, usize)> = nodes
        .iter()
        .enumerate()
        .map(|(i, n)| (n.distance(p), i))
        .filter(|&(d, _)| d <= range)
        .collect();
    // Nearest nodes first; they are the likeliest to be unobstructed.
    near.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    near.iter().any(|&(_, i)| scene.segment_visible(nodes[i], p))
}

/// Drops MPCs inside solids or unobservable from the traversable grid, then
/// re-densifies ids.
pub fn filter_mpcs(scene: &Scene, set: MpcSet, params: &GscmParams) -> Result<MpcSet, GscmError> {
    if set.scene_hash != scene.content_hash() {
        return Err(GscmError::SceneMismatch {
            expected: scene.content_hash(),
            found: set.scene_hash,
        });
    }
    let nodes = observation_grid(scene);
    let keep: Vec<bool> = set
        .mpcs
        .par_iter()
        .map(|m| {
            scene.active_area().contains(m.position)
                && !scene.point_inside_solid(m.position)
                && observed(scene, &nodes, m.position, params.observation_distance)
        })
        .collect();
    let mpcs = set
        .mpcs
        .into_iter()
        .zip(keep)
        .filter_map(|(m, k)| k.then_some(m))
        .collect();
    Ok(MpcSet { mpcs, ..set }.redensify())
}
