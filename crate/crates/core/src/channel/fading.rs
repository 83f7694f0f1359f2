//! Gamma shadow fading with exponential latent autocorrelation.
//!
//! A standard-normal latent follows an AR(1) process with coefficient
//! `exp(−dt/τ)`; the fading multiplier is the Gamma(χ, 1/χ) quantile of the
//! latent's normal CDF. The marginal is therefore exactly Gamma with unit mean.

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;
use statrs::function::gamma::{gamma_lr, gamma_ur, ln_gamma};

use crate::rng::StreamKey;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FadingParams {
    /// Gamma shape χ.
    pub shape: f64,
    /// Coherence time τ, seconds.
    pub coherence_tau: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FadingState {
    /// Standard-normal latent of the Gaussian copula.
    pub latent: f64,
    /// Seconds.
    pub last_update: f64,
    pub shape: f64,
    /// Next unused position in the path's draw stream.
    pub draws: u64,
    /// Gamma multiplier for `latent`.
    pub multiplier: f64,
}

impl FadingState {
    /// Starts a path in the stationary distribution using draw 0 of `stream`.
    pub fn stationary(stream: StreamKey, shape: f64, time: f64) -> Self {
        let latent = stream.normal_at(0);
        FadingState {
            latent,
            last_update: time,
            shape,
            draws: 1,
            multiplier: gamma_multiplier(shape, latent),
        }
    }
}

/// Advances the latent by `dt` seconds and returns the new state with its multiplier.
/// `dt == 0` is the identity and consumes no draw.
pub fn update_fading(state: FadingState, dt: f64, params: &FadingParams, stream: StreamKey) -> (FadingState, f64) {
    if dt <= 0.0 {
        return (state, state.multiplier);
    }
    let rho = (-dt / params.coherence_tau).exp();
    let z = stream.normal_at(state.draws);
    let latent = rho * state.latent + (1.0 - rho * rho).sqrt() * z;
    let multiplier = gamma_multiplier(state.shape, latent);
    let next = FadingState {
        latent,
        last_update: state.last_update + dt,
        shape: state.shape,
        draws: state.draws + 1,
        multiplier,
    };
    (next, multiplier)
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// `GammaQuantile(shape = χ, scale = 1/χ; Φ(latent))`.
pub fn gamma_multiplier(shape: f64, latent: f64) -> f64 {
    gamma_quantile_from_normal(shape, latent) / shape
}

/// Quantile of the unit-scale Gamma(`shape`) at probability `Φ(z)`.
///
/// Halley iteration on the regularized incomplete gamma function, started
/// from the Wilson–Hilferty approximation. The upper tail is solved on the
/// complementary function so `z ≫ 0` keeps full relative precision.
pub fn gamma_quantile_from_normal(shape: f64, z: f64) -> f64 {
    let upper = z > 0.0;
    // Target probability in the tail being solved.
    let target = normal_cdf(-z.abs());
    if target <= 0.0 {
        return if upper { f64::INFINITY } else { 0.0 };
    }
    let ln_norm = ln_gamma(shape);
    let wh = 1.0 - 1.0 / (9.0 * shape) + z / (3.0 * shape.sqrt());
    let mut x = if wh > 0.0 { shape * wh * wh * wh } else { 0.0 };
    if !upper && (x <= 0.0 || shape < 1.0) {
        // Small-x series P(a, x) ≈ x^a / Γ(a + 1).
        let small = ((target.ln() + ln_gamma(shape + 1.0)) / shape).exp();
        if x <= 0.0 || small < x {
            x = small;
        }
    }
    if x <= 0.0 || !x.is_finite() {
        x = shape.max(1e-3);
    }
    for _ in 0..100 {
        let f = if upper {
            gamma_ur(shape, x) - target
        } else {
            gamma_lr(shape, x) - target
        };
        let ln_pdf = (shape - 1.0) * x.ln() - x - ln_norm;
        let pdf = ln_pdf.exp();
        if pdf <= 0.0 || !pdf.is_finite() {
            break;
        }
        // d/dx of the lower CDF is +pdf, of the upper CDF −pdf. Halley's
        // correction uses pdf'/pdf = (a − 1)/x − 1.
        let newton = if upper { -f / pdf } else { f / pdf };
        let curvature = (shape - 1.0) / x - 1.0;
        let denom = 1.0 - 0.5 * newton * curvature;
        let step = if denom > 0.5 { newton / denom } else { newton };
        let mut next = x - step;
        if next <= 0.0 {
            next = x * 0.5;
        } else if next > 4.0 * x + 10.0 {
            next = 4.0 * x + 10.0;
        }
        let done = (next - x).abs() <= 1e-14 * next.abs();
        x = next;
        if done {
            break;
        }
    }
    x
}
