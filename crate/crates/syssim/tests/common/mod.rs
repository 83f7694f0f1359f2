#![allow(dead_code)]

use std::sync::Arc;

use lusim_core::channel::{Entity, EntityKind, RadioParams};
use lusim_core::engine::Engine;
use lusim_core::geometry::{Aabb, SceneBuilder, Vec3};
use lusim_core::gscm::{GscmParams, Mpc, MpcSet};
use lusim_core::mobility::{self, MobilityConfig};

/// One building, six MPCs, three BSs and two UEs.
pub fn small_engine(bins: usize) -> Engine {
    let area = Aabb::new(Vec3::new(-50.0, -50.0, 0.0), Vec3::new(50.0, 50.0, 20.0));
    let mut b = SceneBuilder::new();
    b.add_box(Vec3::new(-2.0, 5.0, 0.0), Vec3::new(2.0, 9.0, 10.0), "c");
    let scene = Arc::new(b.build(area, area).unwrap());
    let mpcs = MpcSet {
        mpcs: (0..6)
            .map(|i| Mpc {
                id: i,
                order_population: 1,
                position: Vec3::new(-30.0 + 10.0 * i as f64, 20.0, 3.0),
                normal: -Vec3::Y,
                g0: 1e-3,
                xi: 1.0,
                surface_index: 0,
            })
            .collect(),
        spawn_seed: 3,
        scene_hash: scene.content_hash(),
    };
    let entities = vec![
        Entity::new(0, EntityKind::Bs, Vec3::new(0.0, 0.0, 5.0))
            .with_antennas(vec![Vec3::ZERO, Vec3::new(0.05, 0.0, 0.0)]),
        Entity::new(3, EntityKind::Bs, Vec3::new(25.0, -5.0, 5.0)),
        Entity::new(4, EntityKind::Bs, Vec3::new(-25.0, -5.0, 5.0)),
        Entity::new(1, EntityKind::Ue, Vec3::new(10.0, 0.0, 1.5)).with_velocity(Vec3::new(0.0, 2.0, 0.0)),
        Entity::new(2, EntityKind::Ue, Vec3::new(-10.0, 0.0, 1.5)),
    ];
    let gscm = GscmParams {
        max_link_length: 100.0,
        ..GscmParams::default()
    };
    let radio = RadioParams {
        max_path_length: 100.0,
        fft_bins: bins,
        ..RadioParams::default()
    };
    let mobility = mobility::create(&MobilityConfig::ConstantVelocity, 1).unwrap();
    Engine::new(scene, mpcs, gscm, radio, entities, mobility).unwrap()
}
