use serde::{Deserialize, Serialize};

use crate::gscm::{check_finite, check_positive, ParamViolation};

/// Speed of light, m/s (exact).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

fn default_reference_distance() -> f64 {
    1.0
}

/// Radio and physical-layer parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadioParams {
    /// Hz.
    pub carrier_frequency: f64,
    /// Hz.
    pub bandwidth: f64,
    /// Frequency bins per realization; a power of two ≥ 2.
    pub fft_bins: usize,
    /// W.
    pub tx_power: f64,
    /// W.
    pub noise_power: f64,
    /// Longest propagation path considered, meters.
    pub max_path_length: f64,
    pub pathloss_exponent: f64,
    /// Meters.
    #[serde(default = "default_reference_distance")]
    pub reference_distance: f64,
    /// 1..=3.
    pub max_bounce_order: u8,
}

impl RadioParams {
    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_frequency
    }

    pub fn bin_spacing(&self) -> f64 {
        self.bandwidth / self.fft_bins as f64
    }

    /// Baseband frequency of bin `n`, centred on the carrier.
    pub fn bin_frequency(&self, n: usize) -> f64 {
        (n as f64 - (self.fft_bins / 2) as f64) * self.bin_spacing()
    }

    pub fn violations(&self) -> Vec<ParamViolation> {
        let mut out = Vec::new();
        check_positive(&mut out, "carrier_frequency", self.carrier_frequency);
        check_positive(&mut out, "bandwidth", self.bandwidth);
        if self.bandwidth.is_finite() && self.carrier_frequency.is_finite() && self.bandwidth >= self.carrier_frequency
        {
            out.push(ParamViolation::new("bandwidth", "must be < carrier_frequency"));
        }
        if self.fft_bins < 2 || !self.fft_bins.is_power_of_two() {
            out.push(ParamViolation::new("fft_bins", "must be a power of two >= 2"));
        }
        check_positive(&mut out, "tx_power", self.tx_power);
        check_positive(&mut out, "noise_power", self.noise_power);
        check_positive(&mut out, "max_path_length", self.max_path_length);
        check_finite(&mut out, "pathloss_exponent", self.pathloss_exponent);
        check_positive(&mut out, "reference_distance", self.reference_distance);
        if !(1..=3).contains(&self.max_bounce_order) {
            out.push(ParamViolation::new("max_bounce_order", "must be in 1..=3"));
        }
        out
    }
}

impl Default for RadioParams {
    fn default() -> Self {
        RadioParams {
            carrier_frequency: 3.0e9,
            bandwidth: 100.0e6,
            fft_bins: 1024,
            tx_power: 1.0,
            noise_power: 1e-12,
            max_path_length: 300.0,
            pathloss_exponent: 2.0,
            reference_distance: 1.0,
            max_bounce_order: 2,
        }
    }
}
