//! Antenna energy accounting and wireless power transfer planning.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::federation::Federation;
use crate::snr::GainTable;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnergyModel {
    /// Watts drawn by an active antenna regardless of load.
    pub p_fixed_per_antenna: f64,
    /// Watts added at full transmit duty.
    pub p_tx_per_antenna: f64,
    /// Joules accumulated so far.
    #[serde(default)]
    pub energy_accumulator: f64,
}

impl Default for EnergyModel {
    fn default() -> Self {
        EnergyModel {
            p_fixed_per_antenna: 10.0,
            p_tx_per_antenna: 5.0,
            energy_accumulator: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EnergyError {
    #[error("negative or non-finite power in the energy model")]
    BadModel,
    #[error("cannot accumulate {0} J")]
    BadAmount(f64),
}

impl EnergyModel {
    pub fn validate(&self) -> Result<(), EnergyError> {
        let ok = |p: f64| p.is_finite() && p >= 0.0;
        if ok(self.p_fixed_per_antenna) && ok(self.p_tx_per_antenna) {
            Ok(())
        } else {
            Err(EnergyError::BadModel)
        }
    }

    /// Power of one antenna at transmit duty `tx_fraction`.
    pub fn antenna_power(&self, tx_fraction: f64) -> f64 {
        self.p_fixed_per_antenna + self.p_tx_per_antenna * tx_fraction
    }

    pub fn accumulate(&mut self, joules: f64) -> Result<f64, EnergyError> {
        if !(joules.is_finite() && joules >= 0.0) {
            return Err(EnergyError::BadAmount(joules));
        }
        self.energy_accumulator += joules;
        Ok(self.energy_accumulator)
    }
}

/// One antenna switched on over `[start, end)` at a constant transmit duty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Activation {
    pub antenna: u32,
    pub start: f64,
    pub end: f64,
    pub tx_fraction: f64,
}

/// `E = Σ (p_fixed + p_tx·tx_fraction)·duration` over activations clipped to `[t0, t1]`.
pub fn energy_report(model: &EnergyModel, activations: &[Activation], t0: f64, t1: f64) -> f64 {
    activations
        .iter()
        .map(|a| {
            let d = (a.end.min(t1) - a.start.max(t0)).max(0.0);
            model.antenna_power(a.tx_fraction) * d
        })
        .sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WptConfig {
    /// Rectifier efficiency η in (0, 1].
    pub rectifier_efficiency: f64,
    /// Radiated WPT power of every antenna, watts.
    pub wpt_power: f64,
    /// Per-antenna overrides of `wpt_power`.
    #[serde(default)]
    pub antenna_power: BTreeMap<u32, f64>,
}

impl Default for WptConfig {
    fn default() -> Self {
        WptConfig {
            rectifier_efficiency: 0.5,
            wpt_power: 1.0,
            antenna_power: BTreeMap::new(),
        }
    }
}

impl WptConfig {
    pub fn power_of(&self, antenna: u32) -> f64 {
        self.antenna_power.get(&antenna).copied().unwrap_or(self.wpt_power)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Device {
    pub id: u32,
    /// Joules to deliver.
    pub target: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChargePlan {
    /// Index into the candidate list.
    pub federation: usize,
    /// `(device, harvested watts)`.
    pub harvested: Vec<(u32, f64)>,
    /// Watts drawn by the federation while charging.
    pub consumed_power: f64,
    /// Seconds until the slowest device reaches its target.
    pub duration: f64,
    /// Harvested over consumed power.
    pub efficiency: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WptError {
    #[error("no candidate federations")]
    NoCandidates,
    #[error("rectifier efficiency {0} is outside (0, 1]")]
    BadEfficiency(f64),
    #[error("device {device} harvests no power from any candidate")]
    Unchargeable { device: u32 },
}

/// Harvested power `P_u = η · Σ_a p_wpt,a · ḡ_{a,u}` per device.
pub fn harvested_power(
    devices: &[Device],
    federation: &Federation,
    gains: &GainTable,
    cfg: &WptConfig,
) -> Vec<(u32, f64)> {
    devices
        .iter()
        .map(|d| {
            let p: f64 = federation
                .antenna_ids
                .iter()
                .map(|&a| cfg.power_of(a) * gains.get_or_zero(a, d.id))
                .sum();
            (d.id, cfg.rectifier_efficiency * p)
        })
        .collect()
}

/// Power drawn by `federation` while every antenna radiates its WPT power.
pub fn consumed_power(federation: &Federation, cfg: &WptConfig, model: &EnergyModel) -> f64 {
    federation
        .antenna_ids
        .iter()
        .map(|&a| model.p_fixed_per_antenna + cfg.power_of(a))
        .sum()
}

/// Picks the candidate maximizing harvested over consumed power.
///
/// Candidates leaving any device at zero harvested power are skipped; if all
/// are skipped the first such device is reported.
pub fn wpt_schedule(
    devices: &[Device],
    candidates: &[Federation],
    gains: &GainTable,
    cfg: &WptConfig,
    model: &EnergyModel,
) -> Result<ChargePlan, WptError> {
    if candidates.is_empty() {
        return Err(WptError::NoCandidates);
    }
    let eta = cfg.rectifier_efficiency;
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(WptError::BadEfficiency(eta));
    }
    let mut best: Option<ChargePlan> = None;
    let mut starved = None;
    for (i, f) in candidates.iter().enumerate() {
        let harvested = harvested_power(devices, f, gains, cfg);
        if let Some(&(id, _)) = harvested.iter().find(|(_, p)| *p <= 0.0) {
            starved.get_or_insert(id);
            continue;
        }
        let consumed = consumed_power(f, cfg, model);
        let total: f64 = harvested.iter().map(|(_, p)| p).sum();
        let efficiency = if consumed > 0.0 {
            total / consumed
        } else {
            f64::INFINITY
        };
        let duration = devices
            .iter()
            .zip(&harvested)
            .map(|(d, (_, p))| d.target / p)
            .fold(0.0, f64::max);
        if best.as_ref().is_none_or(|b| efficiency > b.efficiency) {
            best = Some(ChargePlan {
                federation: i,
                harvested,
                consumed_power: consumed,
                duration,
                efficiency,
            });
        }
    }
    best.ok_or(WptError::Unchargeable {
        device: starved.unwrap_or(0),
    })
}
