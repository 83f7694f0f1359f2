use rand::Rng;
use thiserror::Error;

use super::ScenarioConfig;
use crate::channel::{Entity, EntityKind};
use crate::geometry::{Scene, Vec3};
use crate::rng::StreamKey;

pub const MAX_PLACEMENT_REJECTIONS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MaterializeError {
    #[error("could not place {kind:?} #{index} outside solids after {MAX_PLACEMENT_REJECTIONS} attempts")]
    PlacementExhausted { kind: EntityKind, index: usize },
    #[error("entity {id} at {position:?} lies outside the active area")]
    OutsideActiveArea { id: u32, position: Vec3 },
    #[error("scenario yields no {0:?}")]
    Empty(EntityKind),
}

fn strictly_inside(area: &crate::Aabb, p: Vec3) -> bool {
    (0..3).all(|a| p[a] > area.min[a] && p[a] < area.max[a])
}

/// Explicit entities verbatim, then density-driven ones drawn uniformly over
/// the traversable area (rejecting points inside solids) from the scenario seed.
///
/// Density-placed entities get ids after the largest explicit id, BSs first.
pub fn materialize_entities(cfg: &ScenarioConfig, scene: &Scene) -> Result<Vec<Entity>, MaterializeError> {
    let active = scene.active_area();
    let mut out = Vec::new();
    for (kind, list) in [(EntityKind::Bs, &cfg.bs_list), (EntityKind::Ue, &cfg.ue_list)] {
        for spec in list {
            let ok = match kind {
                EntityKind::Bs => active.contains(spec.position),
                EntityKind::Ue => strictly_inside(&active, spec.position),
            };
            if !ok {
                return Err(MaterializeError::OutsideActiveArea {
                    id: spec.id,
                    position: spec.position,
                });
            }
            out.push(Entity {
                id: spec.id,
                kind,
                position: spec.position,
                velocity: spec.velocity,
                antenna_offsets: spec.antenna_offsets.clone(),
            });
        }
    }
    let mut next_id = out.iter().map(|e| e.id + 1).max().unwrap_or(0);
    let area = scene.traversable_area();
    for (kind, density, offsets) in [
        (EntityKind::Bs, cfg.bs_density, &cfg.bs_antenna_offsets),
        (EntityKind::Ue, cfg.ue_density, &cfg.ue_antenna_offsets),
    ] {
        let count = (density * area.horizontal_area()).round() as usize;
        for index in 0..count {
            let mut rng = StreamKey::new(cfg.scenario_seed)
                .with(0x504C_4143) // "PLAC"
                .with(u64::from(kind.code()))
                .with(index as u64)
                .rng();
            let mut placed = None;
            for _ in 0..MAX_PLACEMENT_REJECTIONS {
                let p = Vec3::new(
                    sample_axis(&mut rng, area.min.x, area.max.x),
                    sample_axis(&mut rng, area.min.y, area.max.y),
                    sample_axis(&mut rng, area.min.z, area.max.z),
                );
                if !scene.point_inside_solid(p) {
                    placed = Some(p);
                    break;
                }
            }
            let position = placed.ok_or(MaterializeError::PlacementExhausted { kind, index })?;
            out.push(Entity {
                id: next_id,
                kind,
                position,
                velocity: Vec3::ZERO,
                antenna_offsets: offsets.clone(),
            });
            next_id += 1;
        }
    }
    for kind in [EntityKind::Bs, EntityKind::Ue] {
        if !out.iter().any(|e| e.kind == kind) {
            return Err(MaterializeError::Empty(kind));
        }
    }
    Ok(out)
}

fn sample_axis<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    let u: f64 = rng.random();
    lo + (hi - lo) * u
}
