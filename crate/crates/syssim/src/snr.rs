//! Link-level abstraction from channel realizations to SNR.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("no channel between antenna {antenna} and UE {ue}")]
pub struct MissingChannel {
    pub antenna: u32,
    pub ue: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SnrParams {
    /// Watts.
    pub tx_power: f64,
    /// Watts.
    pub noise_power: f64,
}

impl Default for SnrParams {
    fn default() -> Self {
        SnrParams {
            tx_power: 1.0,
            noise_power: 1e-13,
        }
    }
}

/// Mean channel gain ḡ per `(antenna, ue)`: |H|² averaged over bins and element pairs.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GainTable {
    gains: BTreeMap<(u32, u32), f64>,
}

impl GainTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, antenna: u32, ue: u32, gain: f64) {
        self.gains.insert((antenna, ue), gain);
    }

    pub fn with(mut self, antenna: u32, ue: u32, gain: f64) -> Self {
        self.insert(antenna, ue, gain);
        self
    }

    pub fn get(&self, antenna: u32, ue: u32) -> Result<f64, MissingChannel> {
        self.gains
            .get(&(antenna, ue))
            .copied()
            .ok_or(MissingChannel { antenna, ue })
    }

    /// Gain, or 0 when the pair was never measured.
    pub fn get_or_zero(&self, antenna: u32, ue: u32) -> f64 {
        self.gains.get(&(antenna, ue)).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = ((u32, u32), f64)> + '_ {
        self.gains.iter().map(|(k, v)| (*k, *v))
    }

    pub fn len(&self) -> usize {
        self.gains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gains.is_empty()
    }
}

/// `SNR_u = P · Σ_a ḡ_{a,u} / N0`, summed over `antennas` as given (repeats count twice).
pub fn compute_snr(ue: u32, antennas: &[u32], gains: &GainTable, params: &SnrParams) -> Result<f64, MissingChannel> {
    let mut total = 0.0;
    for &a in antennas {
        total += gains.get(a, ue)?;
    }
    Ok(params.tx_power * total / params.noise_power)
}
