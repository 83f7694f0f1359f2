//! Glue from the three parsed documents to a running engine.

use std::path::Path;
use std::sync::Arc;

use thiserror::Error;

use crate::config::{load_scene_document, materialize_entities, ConfigError, ConfigSet, MaterializeError};
use crate::engine::{Engine, EngineError};
use crate::geometry::{GeometryError, Scene};
use crate::gscm::{initialise, load_spawn, GscmError, MpcSet, SpawnReport};
use crate::mobility;
use crate::registry::UnknownStrategy;

#[derive(Debug, Error)]
pub enum SetupError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("scene: {0}")]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Gscm(#[from] GscmError),
    #[error(transparent)]
    Materialize(#[from] MaterializeError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Strategy(#[from] UnknownStrategy),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Reads the scene named by the scenario and builds it with the configured accelerator.
pub fn load_scene(configs: &ConfigSet) -> Result<Scene, SetupError> {
    let doc = load_scene_document(&configs.scene_path())?;
    Ok(doc.build(&configs.gscm.accelerator)?)
}

/// Loads MPCs from a spawn file, or spawns them in memory when `spawn` is `None`.
pub fn load_or_spawn(
    configs: &ConfigSet,
    scene: &Scene,
    spawn: Option<&Path>,
) -> Result<(MpcSet, Option<SpawnReport>), SetupError> {
    match spawn {
        Some(path) => {
            let bytes = std::fs::read(path).map_err(|source| SetupError::Io {
                path: path.display().to_string(),
                source,
            })?;
            Ok((load_spawn(&bytes, scene)?, None))
        }
        None => {
            let (set, report) = initialise(scene, &configs.gscm)?;
            Ok((set, Some(report)))
        }
    }
}

/// Builds an engine at time 0 from configs, a scene and its MPCs.
pub fn build_engine(configs: &ConfigSet, scene: Arc<Scene>, mpcs: MpcSet) -> Result<Engine, SetupError> {
    let entities = materialize_entities(&configs.scenario, &scene)?;
    let mobility = mobility::create(&configs.scenario.mobility, configs.scenario.scenario_seed)?;
    Ok(Engine::new(
        scene,
        mpcs,
        configs.gscm.clone(),
        configs.radio.clone(),
        entities,
        mobility,
    )?)
}

/// Scene, MPCs and engine in one call.
pub fn prepare(configs: &ConfigSet, spawn: Option<&Path>) -> Result<(Engine, Option<SpawnReport>), SetupError> {
    let scene = Arc::new(load_scene(configs)?);
    let (mpcs, report) = load_or_spawn(configs, &scene, spawn)?;
    Ok((build_engine(configs, scene, mpcs)?, report))
}
