use serde::{Deserialize, Serialize};

use super::spawn;
use crate::geometry::{accel, Vec3};

fn default_mpc_radius() -> f64 {
    0.1
}

fn default_distribution() -> String {
    spawn::DEFAULT_DISTRIBUTION.to_string()
}

fn default_accelerator() -> String {
    accel::DEFAULT_ACCELERATOR.to_string()
}

/// GSCM initialisation parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GscmParams {
    /// Mean MPCs per m² of surface for reflection orders 1, 2 and 3.
    pub density_per_order: [f64; 3],
    /// Std. deviation of the normal tilt, radians.
    #[serde(default)]
    pub normal_jitter_sigma: f64,
    /// Mean of the per-MPC power gain, dB.
    pub g0_log_mean: f64,
    /// Std. deviation of the per-MPC power gain, dB.
    pub g0_log_sigma: f64,
    /// Mean angular decay, 1/radian (exponentially distributed).
    pub xi_mean: f64,
    /// Shape of the Gamma shadow-fading marginal.
    pub gamma_shape_chi: f64,
    /// Exponential decorrelation time of shadow fading, seconds.
    pub fading_coherence_tau: f64,
    /// Max range of the filtering visibility tests, meters.
    pub observation_distance: f64,
    /// Longest MPC-to-MPC link stored in the visibility table, meters.
    pub max_link_length: f64,
    pub spawn_seed: u64,
    #[serde(default = "default_mpc_radius")]
    pub mpc_radius: f64,
    /// Spawn position distribution, selected by name.
    #[serde(default = "default_distribution")]
    pub distribution: String,
    /// Ray-query acceleration structure, selected by name.
    #[serde(default = "default_accelerator")]
    pub accelerator: String,
}

/// A violated parameter constraint: the offending field and why.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamViolation {
    pub field: String,
    pub message: String,
}

impl ParamViolation {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        ParamViolation {
            field: field.into(),
            message: message.into(),
        }
    }
}

pub(crate) fn check_finite(out: &mut Vec<ParamViolation>, field: &str, v: f64) -> bool {
    if v.is_finite() {
        true
    } else {
        out.push(ParamViolation::new(field, "must be finite"));
        false
    }
}

pub(crate) fn check_positive(out: &mut Vec<ParamViolation>, field: &str, v: f64) {
    if check_finite(out, field, v) && v <= 0.0 {
        out.push(ParamViolation::new(field, "must be > 0"));
    }
}

pub(crate) fn check_non_negative(out: &mut Vec<ParamViolation>, field: &str, v: f64) {
    if check_finite(out, field, v) && v < 0.0 {
        out.push(ParamViolation::new(field, "must be >= 0"));
    }
}

impl GscmParams {
    /// Every constraint violation, in field order.
    pub fn violations(&self) -> Vec<ParamViolation> {
        let mut out = Vec::new();
        for (k, d) in self.density_per_order.iter().enumerate() {
            check_non_negative(&mut out, &format!("density_per_order[{k}]"), *d);
        }
        check_non_negative(&mut out, "normal_jitter_sigma", self.normal_jitter_sigma);
        check_finite(&mut out, "g0_log_mean", self.g0_log_mean);
        check_non_negative(&mut out, "g0_log_sigma", self.g0_log_sigma);
        check_non_negative(&mut out, "xi_mean", self.xi_mean);
        check_positive(&mut out, "gamma_shape_chi", self.gamma_shape_chi);
        check_positive(&mut out, "fading_coherence_tau", self.fading_coherence_tau);
        check_positive(&mut out, "observation_distance", self.observation_distance);
        check_positive(&mut out, "max_link_length", self.max_link_length);
        check_non_negative(&mut out, "mpc_radius", self.mpc_radius);
        if !spawn::registry().contains(&self.distribution) {
            let names: Vec<_> = spawn::registry().names().collect();
            out.push(ParamViolation::new(
                "distribution",
                format!(
                    "unknown distribution `{}` (available: {})",
                    self.distribution,
                    names.join(", ")
                ),
            ));
        }
        if !accel::registry().contains(&self.accelerator) {
            let names: Vec<_> = accel::registry().names().collect();
            out.push(ParamViolation::new(
                "accelerator",
                format!(
                    "unknown accelerator `{}` (available: {})",
                    self.accelerator,
                    names.join(", ")
                ),
            ));
        }
        out
    }
}

impl Default for GscmParams {
    fn default() -> Self {
        GscmParams {
            density_per_order: [0.05, 0.02, 0.01],
            normal_jitter_sigma: 0.0,
            g0_log_mean: -30.0,
            g0_log_sigma: 4.0,
            xi_mean: 1.0,
            gamma_shape_chi: 2.0,
            fading_coherence_tau: 0.5,
            observation_distance: 200.0,
            max_link_length: 400.0,
            spawn_seed: 42,
            mpc_radius: default_mpc_radius(),
            distribution: default_distribution(),
            accelerator: default_accelerator(),
        }
    }
}

/// A stochastic scatterer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mpc {
    pub id: u32,
    /// Reflection-order population the MPC was spawned for (1, 2 or 3).
    pub order_population: u8,
    pub position: Vec3,
    pub normal: Vec3,
    /// Linear power gain.
    pub g0: f64,
    /// Angular decay, 1/radian.
    pub xi: f64,
    pub surface_index: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MpcSet {
    pub mpcs: Vec<Mpc>,
    pub spawn_seed: u64,
    pub scene_hash: u64,
}

impl MpcSet {
    pub fn len(&self) -> usize {
        self.mpcs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mpcs.is_empty()
    }

    pub fn get(&self, id: u32) -> &Mpc {
        &self.mpcs[id as usize]
    }

    /// MPC counts per order population.
    pub fn counts_per_order(&self) -> [usize; 3] {
        let mut c = [0; 3];
        for m in &self.mpcs {
            c[(m.order_population - 1) as usize] += 1;
        }
        c
    }

    /// Reassigns ids to `0..n` in current order.
    pub(crate) fn redensify(mut self) -> Self {
        for (i, m) in self.mpcs.iter_mut().enumerate() {
            m.id = i as u32;
        }
        self
    }
}
