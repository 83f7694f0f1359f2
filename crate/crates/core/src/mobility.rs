//! Entity mobility models, selected by name from the scenario document.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{Entity, EntityKind};
use crate::geometry::{Scene, Vec3};
use crate::gscm::ParamViolation;
use crate::registry::{Registry, UnknownStrategy};
use crate::rng::StreamKey;

/// Mobility section of the scenario document, tagged by `model`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "model", rename_all = "snake_case", deny_unknown_fields)]
pub enum MobilityConfig {
    /// Entities stay where they are.
    #[default]
    None,
    /// UEs move at their configured velocity.
    ConstantVelocity,
    /// UEs walk between uniformly drawn waypoints in the traversable area.
    RandomWaypoint {
        /// m/s.
        speed_min: f64,
        /// m/s.
        speed_max: f64,
        /// Seconds spent at each waypoint.
        pause: f64,
    },
    /// Positions arrive from the system simulator only.
    External,
}

impl MobilityConfig {
    pub fn name(&self) -> &'static str {
        match self {
            MobilityConfig::None => "none",
            MobilityConfig::ConstantVelocity => "constant_velocity",
            MobilityConfig::RandomWaypoint { .. } => "random_waypoint",
            MobilityConfig::External => "external",
        }
    }

    pub fn violations(&self) -> Vec<ParamViolation> {
        let mut out = Vec::new();
        if let MobilityConfig::RandomWaypoint {
            speed_min,
            speed_max,
            pause,
        } = *self
        {
            if !(speed_min.is_finite() && speed_min > 0.0) {
                out.push(ParamViolation::new("mobility.speed_min", "must be > 0"));
            }
            if !(speed_max.is_finite() && speed_max >= speed_min) {
                out.push(ParamViolation::new("mobility.speed_max", "must be >= speed_min"));
            }
            if !(pause.is_finite() && pause >= 0.0) {
                out.push(ParamViolation::new("mobility.pause", "must be >= 0"));
            }
        }
        out
    }
}

pub trait MobilityModel: Send + Sync {
    fn name(&self) -> &'static str;

    /// Moves `entities` from time `from` to `to` (seconds) and sets their velocities.
    fn advance(&mut self, entities: &mut [Entity], from: f64, to: f64, scene: &Scene);
}

pub type MobilityFactory = fn(&MobilityConfig, u64) -> Box<dyn MobilityModel>;

pub fn registry() -> &'static Registry<MobilityFactory> {
    static REGISTRY: OnceLock<Registry<MobilityFactory>> = OnceLock::new();
    REGISTRY.get_or_init(|| {
        Registry::<MobilityFactory>::new("mobility model")
            .with("none", |_, _| Box::new(Stationary("none")) as Box<dyn MobilityModel>)
            .with("external", |_, _| {
                Box::new(Stationary("external")) as Box<dyn MobilityModel>
            })
            .with("constant_velocity", |_, _| {
                Box::new(ConstantVelocity) as Box<dyn MobilityModel>
            })
            .with("random_waypoint", |cfg, seed| match *cfg {
                MobilityConfig::RandomWaypoint {
                    speed_min,
                    speed_max,
                    pause,
                } => Box::new(RandomWaypoint::new(speed_min, speed_max, pause, seed)) as Box<dyn MobilityModel>,
                _ => Box::new(RandomWaypoint::new(1.0, 1.0, 0.0, seed)),
            })
    })
}

pub fn create(cfg: &MobilityConfig, seed: u64) -> Result<Box<dyn MobilityModel>, UnknownStrategy> {
    Ok((registry().get(cfg.name())?)(cfg, seed))
}

pub struct Stationary(&'static str);

impl MobilityModel for Stationary {
    fn name(&self) -> &'static str {
        self.0
    }

    fn advance(&mut self, _entities: &mut [Entity], _from: f64, _to: f64, _scene: &Scene) {}
}

pub struct ConstantVelocity;

impl MobilityModel for ConstantVelocity {
    fn name(&self) -> &'static str {
        "constant_velocity"
    }

    fn advance(&mut self, entities: &mut [Entity], from: f64, to: f64, _scene: &Scene) {
        let dt = to - from;
        for e in entities.iter_mut().filter(|e| e.kind == EntityKind::Ue) {
            e.position += e.velocity * dt;
        }
    }
}

#[derive(Debug, Clone)]
struct Walker {
    target: Vec3,
    speed: f64,
    pause_left: f64,
    leg: u64,
}

pub struct RandomWaypoint {
    speed_min: f64,
    speed_max: f64,
    pause: f64,
    seed: u64,
    walkers: BTreeMap<u32, Walker>,
}

impl RandomWaypoint {
    pub fn new(speed_min: f64, speed_max: f64, pause: f64, seed: u64) -> Self {
        RandomWaypoint {
            speed_min,
            speed_max,
            pause,
            seed,
            walkers: BTreeMap::new(),
        }
    }

    fn leg(&self, id: u32, leg: u64, from: Vec3, scene: &Scene) -> Walker {
        let mut rng = StreamKey::new(self.seed)
            .with(0x5750_4E54) // "WPNT"
            .with(u64::from(id))
            .with(leg)
            .rng();
        let area = scene.traversable_area();
        let mut target = from;
        for _ in 0..100 {
            let u: [f64; 3] = [rng.random(), rng.random(), rng.random()];
            let p = Vec3::new(
                area.min.x + (area.max.x - area.min.x) * u[0],
                area.min.y + (area.max.y - area.min.y) * u[1],
                area.min.z + (area.max.z - area.min.z) * u[2],
            )
            .min(area.max);
            if !scene.point_inside_solid(p) {
                target = p;
                break;
            }
        }
        let speed = if self.speed_max > self.speed_min {
            rng.random_range(self.speed_min..=self.speed_max)
        } else {
            self.speed_min
        };
        Walker {
            target,
            speed,
            pause_left: 0.0,
            leg,
        }
    }
}

impl MobilityModel for RandomWaypoint {
    fn name(&self) -> &'static str {
        "random_waypoint"
    }

    fn advance(&mut self, entities: &mut [Entity], from: f64, to: f64, scene: &Scene) {
        for e in entities.iter_mut().filter(|e| e.kind == EntityKind::Ue) {
            let mut w = match self.walkers.remove(&e.id) {
                Some(w) => w,
                None => self.leg(e.id, 0, e.position, scene),
            };
            let mut remaining = to - from;
            let mut velocity = Vec3::ZERO;
            // Bounded so a degenerate area cannot spin forever.
            for _ in 0..10_000 {
                if remaining <= 0.0 {
                    break;
                }
                if w.pause_left > 0.0 {
                    let t = w.pause_left.min(remaining);
                    w.pause_left -= t;
                    remaining -= t;
                    velocity = Vec3::ZERO;
                    continue;
                }
                let to_target = w.target - e.position;
                let dist = to_target.norm();
                let reach = w.speed * remaining;
                if dist > reach {
                    let dir = to_target / dist;
                    e.position += dir * reach;
                    velocity = dir * w.speed;
                    remaining = 0.0;
                } else {
                    e.position = w.target;
                    remaining -= if w.speed > 0.0 { dist / w.speed } else { remaining };
                    let next = self.leg(e.id, w.leg + 1, e.position, scene);
                    w = Walker {
                        pause_left: self.pause,
                        ..next
                    };
                    velocity = Vec3::ZERO;
                }
            }
            e.velocity = velocity;
            self.walkers.insert(e.id, w);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Aabb;

    fn open_scene() -> Scene {
        let area = Aabb::new(Vec3::new(0.0, 0.0, 1.5), Vec3::new(100.0, 100.0, 1.5));
        Scene::build(vec![], vec![], area, area).unwrap()
    }

    #[test]
    fn waypoint_walk_stays_in_area_and_is_deterministic() {
        let scene = open_scene();
        let cfg = MobilityConfig::RandomWaypoint {
            speed_min: 1.0,
            speed_max: 3.0,
            pause: 0.5,
        };
        let run = || {
            let mut model = create(&cfg, 9).unwrap();
            let mut es = vec![Entity::new(1, EntityKind::Ue, Vec3::new(50.0, 50.0, 1.5))];
            let mut trace = Vec::new();
            for k in 0..200 {
                model.advance(&mut es, k as f64 * 0.5, (k + 1) as f64 * 0.5, &scene);
                assert!(scene.traversable_area().contains(es[0].position));
                assert!(es[0].velocity.norm() <= 3.0 + 1e-12);
                trace.push(es[0].position);
            }
            trace
        };
        let a = run();
        assert_eq!(a, run());
        assert!(a.first() != a.last());
    }

    #[test]
    fn constant_velocity_moves_ues_only() {
        let scene = open_scene();
        let mut model = create(&MobilityConfig::ConstantVelocity, 0).unwrap();
        let mut es = vec![
            Entity::new(0, EntityKind::Bs, Vec3::new(1.0, 1.0, 1.5)).with_velocity(Vec3::X),
            Entity::new(1, EntityKind::Ue, Vec3::new(1.0, 1.0, 1.5)).with_velocity(Vec3::X * 2.0),
        ];
        model.advance(&mut es, 0.0, 2.0, &scene);
        assert_eq!(es[0].position, Vec3::new(1.0, 1.0, 1.5));
        assert_eq!(es[1].position, Vec3::new(5.0, 1.0, 1.5));
    }
}
