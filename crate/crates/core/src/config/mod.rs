//! Parsing and validation of the GSCM, radio and scenario documents and the scene file.

mod cross;
mod documents;
mod error;
mod materialize;
mod scene_file;

use std::path::{Path, PathBuf};

pub use cross::{validate_cross, Diagnostic, Severity};
pub use documents::{
    parse_gscm_config, parse_radio_config, parse_scenario_config, EntitySpec, ScenarioConfig, GSCM_FILE, RADIO_FILE,
    SCENARIO_FILE,
};
pub use error::ConfigError;
pub use materialize::{materialize_entities, MaterializeError, MAX_PLACEMENT_REJECTIONS};
pub use scene_file::{parse_scene_file, BoxSolid, FreeTriangle, MeshSolid, SceneDocument, Wall, SCENE_FILE};

use crate::channel::RadioParams;
use crate::gscm::GscmParams;

/// The three parsed documents plus the scenario's directory.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigSet {
    pub gscm: GscmParams,
    pub radio: RadioParams,
    pub scenario: ScenarioConfig,
    pub base_dir: PathBuf,
}

impl ConfigSet {
    /// Resolves a scenario-relative path.
    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn scene_path(&self) -> PathBuf {
        self.resolve(&self.scenario.scene_path)
    }

    /// Replaces every seed (spawn and scenario).
    pub fn override_seed(&mut self, seed: u64) {
        self.gscm.spawn_seed = seed;
        self.scenario.scenario_seed = seed;
    }

    /// Diagnostics from [`validate_cross`].
    pub fn cross_check(&self) -> Vec<Diagnostic> {
        validate_cross(&self.gscm, &self.radio, &self.scenario)
    }
}

fn read(path: &Path) -> Result<String, ConfigError> {
    std::fs::read_to_string(path)
        .map_err(|e| ConfigError::new(path.display().to_string(), "", format!("cannot read file: {e}")))
}

/// Reads and parses all three documents, collecting one error per failing file.
pub fn load_configs(gscm: &Path, radio: &Path, scenario: &Path) -> Result<ConfigSet, Vec<ConfigError>> {
    let label = |p: &Path| p.display().to_string();
    let g = read(gscm).and_then(|t| parse_gscm_config(&t).map_err(|e| e.with_file(label(gscm))));
    let r = read(radio).and_then(|t| parse_radio_config(&t).map_err(|e| e.with_file(label(radio))));
    let s = read(scenario).and_then(|t| parse_scenario_config(&t).map_err(|e| e.with_file(label(scenario))));
    match (g, r, s) {
        (Ok(gscm), Ok(radio), Ok(scenario_cfg)) => Ok(ConfigSet {
            gscm,
            radio,
            scenario: scenario_cfg,
            base_dir: scenario.parent().map(Path::to_path_buf).unwrap_or_default(),
        }),
        (g, r, s) => Err([g.err(), r.err(), s.err()].into_iter().flatten().collect()),
    }
}

/// Reads and parses a scene document from disk.
pub fn load_scene_document(path: &Path) -> Result<SceneDocument, ConfigError> {
    let text = read(path)?;
    parse_scene_file(&text).map_err(|e| e.with_file(path.display().to_string()))
}
