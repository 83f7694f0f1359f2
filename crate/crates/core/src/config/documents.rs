use std::collections::BTreeSet;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::error::{from_json, ConfigError};
use crate::channel::RadioParams;
use crate::geometry::Vec3;
use crate::gscm::{check_non_negative, check_positive, GscmParams, ParamViolation};
use crate::mobility::MobilityConfig;

pub const GSCM_FILE: &str = "gscm";
pub const RADIO_FILE: &str = "radio";
pub const SCENARIO_FILE: &str = "scenario";

fn first_violation(file: &str, v: Vec<ParamViolation>) -> Result<(), ConfigError> {
    match v.into_iter().next() {
        Some(v) => Err(ConfigError::from_violation(file, v)),
        None => Ok(()),
    }
}

/// Parses and validates the GSCM / MPC spawning document.
pub fn parse_gscm_config(text: &str) -> Result<GscmParams, ConfigError> {
    let params: GscmParams = from_json(text, GSCM_FILE)?;
    first_violation(GSCM_FILE, params.violations())?;
    Ok(params)
}

/// Parses and validates the radio / physical-parameter document.
pub fn parse_radio_config(text: &str) -> Result<RadioParams, ConfigError> {
    let params: RadioParams = from_json(text, RADIO_FILE)?;
    first_violation(RADIO_FILE, params.violations())?;
    Ok(params)
}

fn single_antenna() -> Vec<Vec3> {
    vec![Vec3::ZERO]
}

fn default_true() -> bool {
    true
}

/// An explicitly placed BS or UE.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntitySpec {
    pub id: u32,
    pub position: Vec3,
    #[serde(default)]
    pub velocity: Vec3,
    #[serde(default = "single_antenna")]
    pub antenna_offsets: Vec<Vec3>,
}

/// Scenario definition document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Scene document, relative to the scenario file's directory.
    pub scene_path: PathBuf,
    #[serde(default)]
    pub bs_list: Vec<EntitySpec>,
    /// Randomly placed base stations per m² of traversable area.
    #[serde(default)]
    pub bs_density: f64,
    #[serde(default)]
    pub ue_list: Vec<EntitySpec>,
    #[serde(default)]
    pub ue_density: f64,
    /// Element layout of density-placed base stations.
    #[serde(default = "single_antenna")]
    pub bs_antenna_offsets: Vec<Vec3>,
    /// Element layout of density-placed UEs.
    #[serde(default = "single_antenna")]
    pub ue_antenna_offsets: Vec<Vec3>,
    #[serde(default)]
    pub mobility: MobilityConfig,
    #[serde(default = "default_true")]
    pub channel_logging: bool,
    #[serde(default)]
    pub channel_log_path: Option<PathBuf>,
    /// JSON-lines output of the system simulator.
    #[serde(default)]
    pub results_path: Option<PathBuf>,
    /// Seconds.
    pub duration: f64,
    /// Seconds.
    pub step: f64,
    pub scenario_seed: u64,
}

impl ScenarioConfig {
    pub fn violations(&self) -> Vec<ParamViolation> {
        let mut out = Vec::new();
        check_non_negative(&mut out, "bs_density", self.bs_density);
        check_non_negative(&mut out, "ue_density", self.ue_density);
        check_positive(&mut out, "step", self.step);
        check_non_negative(&mut out, "duration", self.duration);
        if self.duration.is_finite() && self.step.is_finite() && self.step > 0.0 && self.duration < self.step {
            out.push(ParamViolation::new("duration", "must be >= step"));
        }
        if self.bs_list.is_empty() && !(self.bs_density > 0.0) {
            out.push(ParamViolation::new(
                "bs_list",
                "no base stations: give bs_list or bs_density > 0",
            ));
        }
        if self.ue_list.is_empty() && !(self.ue_density > 0.0) {
            out.push(ParamViolation::new("ue_list", "no UEs: give ue_list or ue_density > 0"));
        }
        let mut ids = BTreeSet::new();
        for (list, name) in [(&self.bs_list, "bs_list"), (&self.ue_list, "ue_list")] {
            for (i, e) in list.iter().enumerate() {
                if !ids.insert(e.id) {
                    out.push(ParamViolation::new(
                        format!("{name}[{i}].id"),
                        format!("duplicate entity id {}", e.id),
                    ));
                }
                if !e.position.is_finite() {
                    out.push(ParamViolation::new(format!("{name}[{i}].position"), "must be finite"));
                }
                if !e.velocity.is_finite() {
                    out.push(ParamViolation::new(format!("{name}[{i}].velocity"), "must be finite"));
                }
                if e.antenna_offsets.is_empty() {
                    out.push(ParamViolation::new(
                        format!("{name}[{i}].antenna_offsets"),
                        "need at least one antenna",
                    ));
                }
                if e.antenna_offsets.len() > usize::from(u16::MAX) {
                    out.push(ParamViolation::new(
                        format!("{name}[{i}].antenna_offsets"),
                        "too many antennas",
                    ));
                }
            }
        }
        for name in ["bs_antenna_offsets", "ue_antenna_offsets"] {
            let offsets = if name.starts_with("bs") {
                &self.bs_antenna_offsets
            } else {
                &self.ue_antenna_offsets
            };
            if offsets.is_empty() {
                out.push(ParamViolation::new(name, "need at least one antenna"));
            }
        }
        out.extend(self.mobility.violations());
        if self.channel_logging && self.channel_log_path.is_none() {
            out.push(ParamViolation::new(
                "channel_log_path",
                "required when channel_logging is enabled",
            ));
        }
        out
    }
}

/// Parses and validates the scenario document.
pub fn parse_scenario_config(text: &str) -> Result<ScenarioConfig, ConfigError> {
    let cfg: ScenarioConfig = from_json(text, SCENARIO_FILE)?;
    first_violation(SCENARIO_FILE, cfg.violations())?;
    Ok(cfg)
}
