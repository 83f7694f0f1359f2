use std::path::{Path, PathBuf};

use lusim_core::config::{
    load_configs, materialize_entities, parse_gscm_config, parse_radio_config, parse_scenario_config, parse_scene_file,
    validate_cross, MaterializeError, Severity,
};
use lusim_core::geometry::{Aabb, SceneBuilder, Vec3};
use lusim_core::mobility::MobilityConfig;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

fn golden(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn text(name: &str) -> String {
    std::fs::read_to_string(golden(name)).unwrap()
}

#[test]
fn golden_trio_is_clean() {
    let set = load_configs(&golden("gscm.json"), &golden("radio.json"), &golden("scenario.json")).unwrap();
    assert!(set.cross_check().is_empty(), "{:?}", set.cross_check());
    let doc = parse_scene_file(&std::fs::read_to_string(set.scene_path()).unwrap()).unwrap();
    let scene = doc.build(&set.gscm.accelerator).unwrap();
    assert_eq!(scene.solids().len(), 10);
    let entities = materialize_entities(&set.scenario, &scene).unwrap();
    assert_eq!(entities.len(), 12);
}

#[test]
fn parse_print_parse_is_a_fixpoint() {
    let g = parse_gscm_config(&text("gscm.json")).unwrap();
    assert_eq!(parse_gscm_config(&serde_json::to_string(&g).unwrap()).unwrap(), g);
    let r = parse_radio_config(&text("radio.json")).unwrap();
    assert_eq!(parse_radio_config(&serde_json::to_string(&r).unwrap()).unwrap(), r);
    let s = parse_scenario_config(&text("scenario.json")).unwrap();
    assert_eq!(parse_scenario_config(&serde_json::to_string(&s).unwrap()).unwrap(), s);
    let d = parse_scene_file(&text("scene.json")).unwrap();
    assert_eq!(parse_scene_file(&serde_json::to_string(&d).unwrap()).unwrap(), d);
}

fn with(base: &str, key: &str, value: Value) -> String {
    let mut v: Value = serde_json::from_str(base).unwrap();
    v[key] = value;
    v.to_string()
}

fn without(base: &str, key: &str) -> String {
    let mut v: Value = serde_json::from_str(base).unwrap();
    v.as_object_mut().unwrap().remove(key);
    v.to_string()
}

#[test]
fn gscm_examples() {
    let base = text("gscm.json");
    let e = parse_gscm_config(&with(&base, "density_per_order", json!([0.1, 0.2]))).unwrap_err();
    assert_eq!(e.path, "density_per_order");
    let e = parse_gscm_config(&with(&base, "gamma_shape_chi", json!(0.0))).unwrap_err();
    assert_eq!(e.path, "gamma_shape_chi");
    assert!(e.message.contains("must be > 0"));
    let e = parse_gscm_config(&with(&base, "colour", json!(1))).unwrap_err();
    assert_eq!(e.path, "colour");
    let e = parse_gscm_config(&with(&base, "distribution", json!("gaussian"))).unwrap_err();
    assert_eq!(e.path, "distribution");
    let defaults = parse_gscm_config(&without(&without(&base, "mpc_radius"), "normal_jitter_sigma")).unwrap();
    assert_eq!(defaults.mpc_radius, 0.1);
    assert_eq!(defaults.normal_jitter_sigma, 0.0);
    let e = parse_gscm_config(&without(&base, "spawn_seed")).unwrap_err();
    assert!(e.message.contains("spawn_seed"));
    assert_eq!(e.to_string(), format!("gscm: {}", e.message));
}

#[test]
fn radio_examples() {
    let base = text("radio.json");
    let ok = with(
        &with(&with(&base, "fft_bins", json!(1024)), "bandwidth", json!(100e6)),
        "carrier_frequency",
        json!(6e9),
    );
    assert!(parse_radio_config(&ok).is_ok());
    assert_eq!(
        parse_radio_config(&with(&base, "fft_bins", json!(1000)))
            .unwrap_err()
            .path,
        "fft_bins"
    );
    assert_eq!(
        parse_radio_config(&with(&base, "fft_bins", json!(1))).unwrap_err().path,
        "fft_bins"
    );
    assert_eq!(
        parse_radio_config(&with(&base, "bandwidth", json!(4e9)))
            .unwrap_err()
            .path,
        "bandwidth"
    );
    assert_eq!(
        parse_radio_config(&with(&base, "max_bounce_order", json!(4)))
            .unwrap_err()
            .path,
        "max_bounce_order"
    );
}

#[test]
fn scenario_examples() {
    let base = text("scenario.json");
    let both = parse_scenario_config(&with(&base, "ue_density", json!(0.01))).unwrap();
    assert_eq!(both.bs_list.len(), 4);
    assert_eq!(both.ue_density, 0.01);
    let e = parse_scenario_config(&without(&base, "channel_log_path")).unwrap_err();
    assert_eq!(e.path, "channel_log_path");
    let no_log = with(&without(&base, "channel_log_path"), "channel_logging", json!(false));
    assert!(parse_scenario_config(&no_log).is_ok());
    assert_eq!(
        parse_scenario_config(&with(&base, "duration", json!(-1.0)))
            .unwrap_err()
            .path,
        "duration"
    );
    let e = parse_scenario_config(&with(
        &base,
        "mobility",
        json!({"model": "random_waypoint", "speed_min": 2.0, "speed_max": 1.0, "pause": 0.0}),
    ))
    .unwrap_err();
    assert_eq!(e.path, "mobility.speed_max");
    let e = parse_scenario_config(&with(&base, "mobility", json!({"model": "teleport"}))).unwrap_err();
    assert_eq!(e.path, "mobility.model");
    let mut v: Value = serde_json::from_str(&base).unwrap();
    v["ue_list"][2]["velocity"] = json!([1.0, "fast", 0.0]);
    let e = parse_scenario_config(&v.to_string()).unwrap_err();
    assert_eq!(e.path, "ue_list[2].velocity[1]");
    let mut v: Value = serde_json::from_str(&base).unwrap();
    v["ue_list"][1]["id"] = json!(0);
    assert_eq!(parse_scenario_config(&v.to_string()).unwrap_err().path, "ue_list[1].id");
}

#[test]
fn cross_validation_examples() {
    let g = parse_gscm_config(&text("gscm.json")).unwrap();
    let r = parse_radio_config(&text("radio.json")).unwrap();
    let s = parse_scenario_config(&text("scenario.json")).unwrap();
    assert!(validate_cross(&g, &r, &s).is_empty());

    let long = lusim_core::channel::RadioParams {
        max_path_length: g.max_link_length + 1.0,
        ..r.clone()
    };
    let d = validate_cross(&g, &long, &s);
    let err = d.iter().find(|d| d.severity == Severity::Error).unwrap();
    assert_eq!(err.error.path, "max_path_length");
    assert!(err.error.message.contains("max_link_length"));

    let slow = lusim_core::config::ScenarioConfig {
        step: g.fading_coherence_tau * 2.0,
        duration: 10.0,
        ..s.clone()
    };
    let d = validate_cross(&g, &r, &slow);
    assert_eq!(d.len(), 1);
    assert_eq!(d[0].severity, Severity::Warning);
    assert_eq!(d[0].error.path, "step");
}

/// Independent restatement of every documented invariant.
fn gscm_ok(v: &lusim_core::gscm::GscmParams) -> bool {
    v.density_per_order.iter().all(|d| d.is_finite() && *d >= 0.0)
        && v.gamma_shape_chi > 0.0
        && v.gamma_shape_chi.is_finite()
        && v.observation_distance > 0.0
        && v.observation_distance.is_finite()
        && v.mpc_radius >= 0.0
        && v.fading_coherence_tau > 0.0
        && v.normal_jitter_sigma >= 0.0
        && v.g0_log_sigma >= 0.0
        && v.xi_mean >= 0.0
}

fn radio_ok(v: &lusim_core::channel::RadioParams) -> bool {
    v.fft_bins >= 2
        && v.fft_bins.is_power_of_two()
        && v.bandwidth > 0.0
        && v.bandwidth < v.carrier_frequency
        && v.carrier_frequency.is_finite()
        && v.max_path_length > 0.0
        && v.max_path_length.is_finite()
        && (1..=3).contains(&v.max_bounce_order)
        && v.reference_distance > 0.0
}

fn scenario_ok(v: &lusim_core::config::ScenarioConfig) -> bool {
    v.bs_density >= 0.0
        && v.ue_density >= 0.0
        && v.step > 0.0
        && v.duration >= v.step
        && v.duration.is_finite()
        && (!v.bs_list.is_empty() || v.bs_density > 0.0)
        && (!v.ue_list.is_empty() || v.ue_density > 0.0)
        && (!v.channel_logging || v.channel_log_path.is_some())
}

fn mutate(v: &mut Value, rng: &mut ChaCha8Rng) {
    match v {
        Value::Object(map) => {
            let keys: Vec<String> = map.keys().cloned().collect();
            if keys.is_empty() || rng.random_bool(0.1) {
                map.insert("unexpected".into(), json!(1));
                return;
            }
            let k = &keys[rng.random_range(0..keys.len())];
            if rng.random_bool(0.15) {
                map.remove(k);
            } else {
                mutate(map.get_mut(k).unwrap(), rng);
            }
        }
        Value::Array(items) if !items.is_empty() && rng.random_bool(0.8) => {
            let i = rng.random_range(0..items.len());
            if rng.random_bool(0.2) {
                items.remove(i);
            } else {
                mutate(&mut items[i], rng);
            }
        }
        _ => {
            let choices = [
                json!(0),
                json!(-1.0),
                json!(1e308),
                json!(-0.5),
                json!(1000),
                json!(3),
                json!("text"),
                json!(null),
                json!(true),
                json!([]),
                json!({}),
            ];
            *v = choices[rng.random_range(0..choices.len())].clone();
        }
    }
}

#[test]
fn mutated_documents_never_yield_invalid_objects() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let docs = [text("gscm.json"), text("radio.json"), text("scenario.json")];
    let mut accepted = 0;
    for round in 0..3000 {
        let which = round % 3;
        let mut v: Value = serde_json::from_str(&docs[which]).unwrap();
        for _ in 0..rng.random_range(1..4) {
            mutate(&mut v, &mut rng);
        }
        let t = v.to_string();
        let ok = match which {
            0 => parse_gscm_config(&t).map(|p| assert!(gscm_ok(&p), "{t}")).is_ok(),
            1 => parse_radio_config(&t).map(|p| assert!(radio_ok(&p), "{t}")).is_ok(),
            _ => parse_scenario_config(&t)
                .map(|p| assert!(scenario_ok(&p), "{t}"))
                .is_ok(),
        };
        accepted += ok as usize;
    }
    // Some mutations are benign (e.g. a changed coordinate); most are not.
    assert!(accepted > 0 && accepted < 3000);
}

fn open_scene(trav: Aabb) -> lusim_core::Scene {
    SceneBuilder::new()
        .build(
            Aabb::new(Vec3::new(-100.0, -100.0, 0.0), Vec3::new(100.0, 100.0, 30.0)),
            trav,
        )
        .unwrap()
}

#[test]
fn materialize_examples() {
    let base = text("scenario.json");
    let one_ue = r#"{"scene_path": "s.json", "bs_list": [{"id": 3, "position": [0, 0, 10]}],
        "ue_list": [{"id": 9, "position": [5, 5, 1.5], "velocity": [1, 0, 0]}],
        "channel_logging": false, "duration": 1, "step": 0.1, "scenario_seed": 1}"#;
    let cfg = parse_scenario_config(one_ue).unwrap();
    let trav = Aabb::new(Vec3::new(-50.0, -50.0, 1.5), Vec3::new(50.0, 50.0, 1.5));
    let scene = open_scene(trav);
    let es = materialize_entities(&cfg, &scene).unwrap();
    assert_eq!(es.len(), 2);
    assert_eq!(es[1].id, 9);
    assert_eq!(es[1].velocity, Vec3::X);

    // 1000 m² at 0.01 /m²: ten UEs, identical across runs and equal to a replay.
    let dense = with(&with(&base, "ue_list", json!([])), "ue_density", json!(0.01));
    let cfg = parse_scenario_config(&dense).unwrap();
    let trav = Aabb::new(Vec3::new(0.0, 0.0, 1.5), Vec3::new(40.0, 25.0, 1.5));
    let mut b = SceneBuilder::new();
    b.add_box(Vec3::new(10.0, 10.0, 0.0), Vec3::new(20.0, 20.0, 10.0), "c");
    let scene = b
        .build(
            Aabb::new(Vec3::new(-100.0, -100.0, 0.0), Vec3::new(100.0, 100.0, 30.0)),
            trav,
        )
        .unwrap();
    let a = materialize_entities(&cfg, &scene).unwrap();
    let b2 = materialize_entities(&cfg, &scene).unwrap();
    assert_eq!(a, b2);
    let ues: Vec<_> = a
        .iter()
        .filter(|e| e.kind == lusim_core::channel::EntityKind::Ue)
        .collect();
    assert_eq!(ues.len(), 10);
    for (i, u) in ues.iter().enumerate() {
        assert!(trav.contains(u.position) && !scene.point_inside_solid(u.position));
        assert_eq!(u.id, 4 + i as u32);
    }
    let reseeded = lusim_core::config::ScenarioConfig {
        scenario_seed: cfg.scenario_seed + 1,
        ..cfg.clone()
    };
    assert_ne!(materialize_entities(&reseeded, &scene).unwrap(), a);

    // Traversable area entirely inside a solid.
    let trav = Aabb::new(Vec3::new(11.0, 11.0, 1.5), Vec3::new(19.0, 19.0, 1.5));
    let mut b = SceneBuilder::new();
    b.add_box(Vec3::new(10.0, 10.0, 0.0), Vec3::new(20.0, 20.0, 10.0), "c");
    let scene = b
        .build(
            Aabb::new(Vec3::new(-100.0, -100.0, 0.0), Vec3::new(100.0, 100.0, 30.0)),
            trav,
        )
        .unwrap();
    let dense = with(&with(&base, "ue_list", json!([])), "ue_density", json!(0.1));
    let cfg = parse_scenario_config(&dense).unwrap();
    assert!(matches!(
        materialize_entities(&cfg, &scene),
        Err(MaterializeError::PlacementExhausted { .. })
    ));
}

#[test]
fn scene_file_errors_carry_paths() {
    let base = text("scene.json");
    let mut v: Value = serde_json::from_str(&base).unwrap();
    v["solids"] = json!([{"vertices": [[0, 0, 0], [1, 0, 0], [0, 1, 0]], "indices": [[0, 1, 5]]}]);
    assert_eq!(
        parse_scene_file(&v.to_string()).unwrap_err().path,
        "solids[0].indices[0][2]"
    );
    let mut v: Value = serde_json::from_str(&base).unwrap();
    v["boxes"][3]["min"] = json!([0, 0]);
    assert_eq!(parse_scene_file(&v.to_string()).unwrap_err().path, "boxes[3].min");
    // An open mesh parses but fails the watertight check at build time.
    let mut v: Value = serde_json::from_str(&base).unwrap();
    v["solids"] = json!([{"vertices": [[0, 0, 0], [1, 0, 0], [0, 1, 0]], "indices": [[0, 1, 2]]}]);
    let doc = parse_scene_file(&v.to_string()).unwrap();
    assert!(doc.build("bvh").is_err());
}

#[test]
fn mobility_names_match_registry() {
    for cfg in [
        MobilityConfig::None,
        MobilityConfig::ConstantVelocity,
        MobilityConfig::External,
        MobilityConfig::RandomWaypoint {
            speed_min: 1.0,
            speed_max: 2.0,
            pause: 0.0,
        },
    ] {
        assert_eq!(lusim_core::mobility::create(&cfg, 1).unwrap().name(), cfg.name());
    }
}
