use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fading::{FadingParams, FadingState};
use super::{Entity, RadioParams, SPEED_OF_LIGHT};
use crate::geometry::{Scene, Vec3};
use crate::gscm::{MpcSet, VisibilityLut};
use crate::rng::StreamKey;

/// An enumerated propagation path (LOS when `hops` is empty).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathChain {
    pub hops: Vec<u32>,
    /// Meters, between entity reference points.
    pub total_length: f64,
    /// Seconds; always `total_length / SPEED_OF_LIGHT`.
    pub delay: f64,
    /// Deviation from specular at each hop, radians.
    pub hop_angles: Vec<f64>,
    pub avg_gain: f64,
    pub fading_state: FadingState,
    /// Hz.
    pub doppler: f64,
}

impl PathChain {
    pub fn bounce_order(&self) -> usize {
        self.hops.len()
    }

    pub fn is_los(&self) -> bool {
        self.hops.is_empty()
    }

    /// Canonical output order: bounce count, then length, then hop ids.
    pub fn canonical_cmp(&self, other: &PathChain) -> Ordering {
        self.hops
            .len()
            .cmp(&other.hops.len())
            .then(self.total_length.total_cmp(&other.total_length))
            .then_with(|| self.hops.cmp(&other.hops))
    }
}

/// Stream key for a path's fading draws: `(spawn_seed, tx, rx, hops in path order)`.
pub fn path_stream(spawn_seed: u64, tx_id: u32, rx_id: u32, hops: &[u32]) -> StreamKey {
    let mut key = StreamKey::new(spawn_seed)
        .with(0x4641_4445) // "FADE"
        .with(u64::from(tx_id))
        .with(u64::from(rx_id))
        .with(hops.len() as u64);
    for &h in hops {
        key = key.with(u64::from(h));
    }
    key
}

/// Vertices of a chain: tx, hop positions, rx.
pub fn chain_points(hops: &[u32], mpcs: &MpcSet, tx: Vec3, rx: Vec3) -> Vec<Vec3> {
    let mut pts = Vec::with_capacity(hops.len() + 2);
    pts.push(tx);
    pts.extend(hops.iter().map(|&h| mpcs.get(h).position));
    pts.push(rx);
    pts
}

/// Angle between the outgoing segment and the specular reflection of the
/// incoming segment about each hop's normal.
pub fn hop_angles(points: &[Vec3], hops: &[u32], mpcs: &MpcSet) -> Vec<f64> {
    hops.iter()
        .enumerate()
        .map(|(k, &h)| {
            let incoming = (points[k + 1] - points[k]).normalized();
            let outgoing = (points[k + 2] - points[k + 1]).normalized();
            let specular = incoming.reflect(mpcs.get(h).normal);
            specular.dot(outgoing).clamp(-1.0, 1.0).acos()
        })
        .collect()
}

/// Mean path gain.
///
/// LOS: free-space `(λ / 4πd)²`. Bounced: `(d₀ / d)^n · Π g0ᵢ · exp(−ξᵢ θᵢ)`.
pub fn path_average_gain(chain: &PathChain, mpcs: &MpcSet, radio: &RadioParams) -> f64 {
    average_gain(&chain.hops, chain.total_length, &chain.hop_angles, mpcs, radio)
}

pub(crate) fn average_gain(hops: &[u32], total_length: f64, angles: &[f64], mpcs: &MpcSet, radio: &RadioParams) -> f64 {
    if hops.is_empty() {
        let a = radio.wavelength() / (4.0 * std::f64::consts::PI * total_length);
        return a * a;
    }
    let distance_law = (radio.reference_distance / total_length).powf(radio.pathloss_exponent);
    hops.iter().zip(angles).fold(distance_law, |g, (&h, &theta)| {
        let m = mpcs.get(h);
        g * m.g0 * (-m.xi * theta).exp()
    })
}

/// Doppler shift: `(v_tx · ê_first − v_rx · ê_last) / λ`, MPCs static.
pub fn doppler_shift(chain: &PathChain, mpcs: &MpcSet, tx: &Entity, rx: &Entity, radio: &RadioParams) -> f64 {
    let pts = chain_points(&chain.hops, mpcs, tx.position, rx.position);
    doppler_for_points(&pts, tx.velocity, rx.velocity, radio)
}

pub(crate) fn doppler_for_points(pts: &[Vec3], v_tx: Vec3, v_rx: Vec3, radio: &RadioParams) -> f64 {
    let n = pts.len();
    let first = (pts[1] - pts[0]).normalized();
    let last = (pts[n - 1] - pts[n - 2]).normalized();
    (v_tx.dot(first) + v_rx.dot(-last)) / radio.wavelength()
}

/// Borrowed view of everything path search needs.
#[derive(Clone, Copy)]
pub struct ChannelModel<'a> {
    pub scene: &'a Scene,
    pub mpcs: &'a MpcSet,
    pub lut: &'a VisibilityLut,
    pub radio: &'a RadioParams,
    pub fading: FadingParams,
}

impl<'a> ChannelModel<'a> {
    /// MPCs within `max_path_length` of `p` with an unobstructed segment to it,
    /// as a membership mask plus their distances.
    pub fn visible_from(&self, p: Vec3) -> Vec<Option<f64>> {
        let limit = self.radio.max_path_length;
        self.mpcs
            .mpcs
            .par_iter()
            .with_min_len(32)
            .map(|m| {
                let d = p.distance(m.position);
                (d <= limit && self.scene.segment_visible(p, m.position)).then_some(d)
            })
            .collect()
    }

    /// Every LOS and 1..=`max_bounce_order` bounce chain from `tx` to `rx`
    /// no longer than `max_path_length`, in canonical order. New chains carry
    /// a stationary fading state stamped at `time`.
    pub fn enumerate_paths(&self, tx: &Entity, rx: &Entity, time: f64) -> Vec<PathChain> {
        let vis_tx = self.visible_from(tx.position);
        let vis_rx = self.visible_from(rx.position);
        self.enumerate_with_visibility(tx, rx, &vis_tx, &vis_rx, time)
    }

    /// [`ChannelModel::enumerate_paths`] with precomputed endpoint visibility
    /// (as returned by [`ChannelModel::visible_from`]).
    pub fn enumerate_with_visibility(
        &self,
        tx: &Entity,
        rx: &Entity,
        vis_tx: &[Option<f64>],
        vis_rx: &[Option<f64>],
        time: f64,
    ) -> Vec<PathChain> {
        self.enumerate_with_fading(tx, rx, vis_tx, vis_rx, time, |_| None)
    }

    /// As [`ChannelModel::enumerate_with_visibility`], taking each chain's
    /// fading state from `fading` and falling back to a stationary start.
    pub fn enumerate_with_fading(
        &self,
        tx: &Entity,
        rx: &Entity,
        vis_tx: &[Option<f64>],
        vis_rx: &[Option<f64>],
        time: f64,
        mut fading: impl FnMut(&[u32]) -> Option<FadingState>,
    ) -> Vec<PathChain> {
        let limit = self.radio.max_path_length;
        let order = self.radio.max_bounce_order.min(3);
        let (ptx, prx) = (tx.position, rx.position);
        let positions: Vec<Vec3> = self.mpcs.mpcs.iter().map(|m| m.position).collect();
        // Triangle-inequality pruning with headroom for rounding.
        let prune = |partial: f64, at: Vec3| partial + at.distance(prx) > limit * (1.0 + 1e-12) + 1e-9;

        let mut found: Vec<(Vec<u32>, f64)> = Vec::new();
        let d_los = ptx.distance(prx);
        if d_los <= limit && self.scene.segment_visible(ptx, prx) {
            found.push((Vec::new(), d_los));
        }
        for (i, dti) in vis_tx.iter().enumerate() {
            let Some(d_ti) = *dti else { continue };
            let i32_ = i as u32;
            if order >= 1 {
                if let Some(d_ir) = vis_rx[i] {
                    let total = d_ti + d_ir;
                    if total <= limit {
                        found.push((vec![i32_], total));
                    }
                }
            }
            if order < 2 || prune(d_ti, positions[i]) {
                continue;
            }
            for &(j, d_ij) in self.lut.neighbors(i32_) {
                let partial = d_ti + d_ij;
                if partial > limit {
                    continue;
                }
                if let Some(d_jr) = vis_rx[j as usize] {
                    let total = partial + d_jr;
                    if total <= limit {
                        found.push((vec![i32_, j], total));
                    }
                }
                if order < 3 || prune(partial, positions[j as usize]) {
                    continue;
                }
                for &(k, d_jk) in self.lut.neighbors(j) {
                    if k == i32_ {
                        continue;
                    }
                    let partial3 = partial + d_jk;
                    if partial3 > limit {
                        continue;
                    }
                    if let Some(d_kr) = vis_rx[k as usize] {
                        let total = partial3 + d_kr;
                        if total <= limit {
                            found.push((vec![i32_, j, k], total));
                        }
                    }
                }
            }
        }

        let mut chains: Vec<PathChain> = found
            .into_iter()
            .map(|(hops, total_length)| {
                let state = fading(&hops);
                self.make_chain(tx, rx, hops, total_length, time, state)
            })
            .collect();
        chains.sort_by(PathChain::canonical_cmp);
        chains
    }

    fn make_chain(
        &self,
        tx: &Entity,
        rx: &Entity,
        hops: Vec<u32>,
        total_length: f64,
        time: f64,
        state: Option<FadingState>,
    ) -> PathChain {
        let pts = chain_points(&hops, self.mpcs, tx.position, rx.position);
        let angles = hop_angles(&pts, &hops, self.mpcs);
        let avg_gain = average_gain(&hops, total_length, &angles, self.mpcs, self.radio);
        let doppler = doppler_for_points(&pts, tx.velocity, rx.velocity, self.radio);
        let fading_state = state.unwrap_or_else(|| {
            let stream = path_stream(self.mpcs.spawn_seed, tx.id, rx.id, &hops);
            FadingState::stationary(stream, self.fading.shape, time)
        });
        PathChain {
            delay: total_length / SPEED_OF_LIGHT,
            fading_state,
            hops,
            total_length,
            hop_angles: angles,
            avg_gain,
            doppler,
        }
    }
}
