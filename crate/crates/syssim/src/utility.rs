//! Per-UE utility functions, selected by name.

use std::sync::OnceLock;

use lusim_core::registry::{Registry, UnknownStrategy};
use serde::{Deserialize, Serialize};

pub trait Utility: Send + Sync {
    fn name(&self) -> &'static str;

    /// Utility of one UE at linear SNR `snr`.
    fn of_snr(&self, snr: f64) -> f64;

    /// Federation utility: the sum over its UEs.
    fn total(&self, snrs: &[f64]) -> f64 {
        snrs.iter().map(|&s| self.of_snr(s)).sum()
    }
}

/// `log(1 + SNR)`, natural log.
pub struct LogRate;

impl Utility for LogRate {
    fn name(&self) -> &'static str {
        "log_rate"
    }

    fn of_snr(&self, snr: f64) -> f64 {
        snr.ln_1p()
    }
}

pub struct Linear;

impl Utility for Linear {
    fn name(&self) -> &'static str {
        "linear"
    }

    fn of_snr(&self, snr: f64) -> f64 {
        snr
    }
}

/// Another utility multiplied by a positive constant.
pub struct Scaled {
    pub inner: Box<dyn Utility>,
    pub factor: f64,
}

impl Utility for Scaled {
    fn name(&self) -> &'static str {
        self.inner.name()
    }

    fn of_snr(&self, snr: f64) -> f64 {
        self.factor * self.inner.of_snr(snr)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UtilityConfig {
    #[serde(default = "default_utility")]
    pub name: String,
    /// Positive multiplier; does not change any allocation.
    #[serde(default = "one")]
    pub scale: f64,
}

fn default_utility() -> String {
    "log_rate".into()
}

fn one() -> f64 {
    1.0
}

impl Default for UtilityConfig {
    fn default() -> Self {
        UtilityConfig {
            name: default_utility(),
            scale: 1.0,
        }
    }
}

pub type UtilityFactory = fn() -> Box<dyn Utility>;

pub fn registry() -> &'static Registry<UtilityFactory> {
    static REGISTRY: OnceLock<Registry<UtilityFactory>> = OnceLock::new();
    REGISTRY.get_or_init(|| {
        Registry::<UtilityFactory>::new("utility function")
            .with("log_rate", || Box::new(LogRate) as Box<dyn Utility>)
            .with("linear", || Box::new(Linear) as Box<dyn Utility>)
    })
}

pub fn create(cfg: &UtilityConfig) -> Result<Box<dyn Utility>, UnknownStrategy> {
    let base = (registry().get(&cfg.name)?)();
    Ok(if cfg.scale == 1.0 {
        base
    } else {
        Box::new(Scaled {
            inner: base,
            factor: cfg.scale,
        })
    })
}
