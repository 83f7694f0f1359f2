use super::documents::{GSCM_FILE, RADIO_FILE, SCENARIO_FILE};
use super::{ConfigError, ScenarioConfig};
use crate::channel::RadioParams;
use crate::gscm::GscmParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub error: ConfigError,
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.severity {
            Severity::Warning => write!(f, "warning: {}", self.error),
            Severity::Error => write!(f, "error: {}", self.error),
        }
    }
}

/// Checks constraints that span documents.
pub fn validate_cross(gscm: &GscmParams, radio: &RadioParams, scenario: &ScenarioConfig) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    if radio.max_path_length > gscm.max_link_length {
        out.push(Diagnostic {
            severity: Severity::Error,
            error: ConfigError::new(
                RADIO_FILE,
                "max_path_length",
                format!(
                    "{} m exceeds {GSCM_FILE}: max_link_length = {} m; multi-bounce paths would be missed",
                    radio.max_path_length, gscm.max_link_length
                ),
            ),
        });
    }
    if scenario.step > gscm.fading_coherence_tau {
        out.push(Diagnostic {
            severity: Severity::Warning,
            error: ConfigError::new(
                SCENARIO_FILE,
                "step",
                format!(
                    "{} s is longer than {GSCM_FILE}: fading_coherence_tau = {} s; fading decorrelates between steps",
                    scenario.step, gscm.fading_coherence_tau
                ),
            ),
        });
    }
    if gscm.observation_distance < radio.max_path_length / 2.0 {
        out.push(Diagnostic {
            severity: Severity::Warning,
            error: ConfigError::new(
                GSCM_FILE,
                "observation_distance",
                format!(
                    "{} m is below half of {RADIO_FILE}: max_path_length; MPCs on valid paths may be filtered out",
                    gscm.observation_distance
                ),
            ),
        });
    }
    out
}
