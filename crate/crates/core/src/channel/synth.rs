use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{Entity, PathChain, RadioParams, SPEED_OF_LIGHT};
use crate::gscm::MpcSet;

/// Bins between exact re-evaluations of the per-bin phasor recurrence.
const REANCHOR_EVERY: usize = 32;

/// Paths advanced together through the bin loop.
const GROUP: usize = 4;

/// Per-path summary kept alongside a realization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSummary {
    pub hops: Vec<u32>,
    pub delay: f64,
    pub avg_gain: f64,
    pub fading: f64,
    pub doppler: f64,
}

impl PathSummary {
    pub fn hop_count(&self) -> usize {
        self.hops.len()
    }
}

/// Frequency response `H[rx][tx][bin]` of one link at one instant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelRealization {
    pub tx_id: u32,
    pub rx_id: u32,
    pub timestamp: f64,
    pub rx_antennas: usize,
    pub tx_antennas: usize,
    pub bins: usize,
    /// Row-major `[rx][tx][bin]`.
    pub h: Vec<Complex64>,
    pub paths: Vec<PathSummary>,
}

impl ChannelRealization {
    #[inline]
    pub fn index(&self, rx: usize, tx: usize, bin: usize) -> usize {
        (rx * self.tx_antennas + tx) * self.bins + bin
    }

    pub fn at(&self, rx: usize, tx: usize, bin: usize) -> Complex64 {
        self.h[self.index(rx, tx, bin)]
    }

    /// Frequency response of one element pair.
    pub fn response(&self, rx: usize, tx: usize) -> &[Complex64] {
        let start = self.index(rx, tx, 0);
        &self.h[start..start + self.bins]
    }

    /// Mean of |H|² over bins and element pairs.
    pub fn mean_power_gain(&self) -> f64 {
        if self.h.is_empty() {
            return 0.0;
        }
        self.h.iter().map(|c| c.norm_sqr()).sum::<f64>() / self.h.len() as f64
    }
}

/// `exp(−j·2π·frac(x))` with the integer part of `x` dropped first.
fn cis_turns(x: f64) -> Complex64 {
    let frac = x - x.floor();
    Complex64::from_polar(1.0, -std::f64::consts::TAU * frac)
}

/// Sums every path into the link's frequency response.
///
/// Per element pair the first and last segments are re-measured from element
/// positions; interior hops are shared. Path `l` contributes
/// `√(ḡ·X) · e^{−j2πd/λ} · e^{+j2πf_D t} · e^{−j2πf_n τ}` at bin `n`.
pub fn synthesize_channel(
    paths: &[PathChain],
    tx: &Entity,
    rx: &Entity,
    mpcs: &MpcSet,
    radio: &RadioParams,
    time: f64,
) -> ChannelRealization {
    let n_rx = rx.antenna_count();
    let n_tx = tx.antenna_count();
    let bins = radio.fft_bins;
    let lambda = radio.wavelength();
    let df = radio.bin_spacing();
    let f0 = radio.bin_frequency(0);
    let mut h = vec![Complex64::new(0.0, 0.0); n_rx * n_tx * bins];

    // Interior length and end points of every path, shared by all element pairs.
    let geometry: Vec<(f64, Option<(crate::Vec3, crate::Vec3)>)> = paths
        .iter()
        .map(|p| {
            if p.hops.is_empty() {
                (0.0, None)
            } else {
                let first = mpcs.get(p.hops[0]).position;
                let last = mpcs.get(*p.hops.last().expect("non-empty")).position;
                let interior = p
                    .hops
                    .windows(2)
                    .map(|w| mpcs.get(w[0]).position.distance(mpcs.get(w[1]).position))
                    .sum::<f64>();
                (interior, Some((first, last)))
            }
        })
        .collect();

    for q in 0..n_rx {
        let rx_el = rx.antenna_position(q);
        for p in 0..n_tx {
            let tx_el = tx.antenna_position(p);
            let base = (q * n_tx + p) * bins;
            let row = &mut h[base..base + bins];
            // Paths go through the bin loop in groups so their phasor
            // recurrences run side by side.
            let terms: Vec<(Complex64, f64)> = paths
                .iter()
                .zip(&geometry)
                .map(|(path, &(interior, ends))| {
                    let length = match ends {
                        None => tx_el.distance(rx_el),
                        Some((first, last)) => tx_el.distance(first) + interior + last.distance(rx_el),
                    };
                    let amplitude = (path.avg_gain * path.fading_state.multiplier).sqrt();
                    let a = cis_turns(length / lambda) * cis_turns(-path.doppler * time) * amplitude;
                    (a, length / SPEED_OF_LIGHT)
                })
                .collect();
            for group in terms.chunks(GROUP) {
                let mut amp = [Complex64::new(0.0, 0.0); GROUP];
                let mut tau = [0.0; GROUP];
                let mut step = [Complex64::new(1.0, 0.0); GROUP];
                for (g, &(a, t)) in group.iter().enumerate() {
                    amp[g] = a;
                    tau[g] = t;
                    step[g] = cis_turns(df * t);
                }
                for (c, chunk) in row.chunks_mut(REANCHOR_EVERY).enumerate() {
                    let f = f0 + (c * REANCHOR_EVERY) as f64 * df;
                    let mut w: [Complex64; GROUP] = std::array::from_fn(|g| amp[g] * cis_turns(f * tau[g]));
                    for slot in chunk {
                        let mut sum = Complex64::new(0.0, 0.0);
                        for g in 0..GROUP {
                            sum += w[g];
                            w[g] *= step[g];
                        }
                        *slot += sum;
                    }
                }
            }
        }
    }

    ChannelRealization {
        tx_id: tx.id,
        rx_id: rx.id,
        timestamp: time,
        rx_antennas: n_rx,
        tx_antennas: n_tx,
        bins,
        h,
        paths: paths
            .iter()
            .map(|p| PathSummary {
                hops: p.hops.clone(),
                delay: p.delay,
                avg_gain: p.avg_gain,
                fading: p.fading_state.multiplier,
                doppler: p.doppler,
            })
            .collect(),
    }
}
