//! Greedy federation formation and per-federation antenna selection.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::snr::{GainTable, SnrParams};
use crate::utility::Utility;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Federation {
    pub antenna_ids: BTreeSet<u32>,
    pub ue_ids: BTreeSet<u32>,
    pub utility: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UeDemand {
    pub id: u32,
    /// Larger demand is served first.
    pub demand: f64,
}

/// SNRs of every UE in `ues` served by `antennas`; unmeasured pairs count as zero gain.
fn snrs(ues: &BTreeSet<u32>, antennas: &BTreeSet<u32>, gains: &GainTable, radio: &SnrParams) -> Vec<f64> {
    ues.iter()
        .map(|&u| {
            let g: f64 = antennas.iter().map(|&a| gains.get_or_zero(a, u)).sum();
            radio.tx_power * g / radio.noise_power
        })
        .collect()
}

pub fn federation_utility(
    ues: &BTreeSet<u32>,
    antennas: &BTreeSet<u32>,
    gains: &GainTable,
    radio: &SnrParams,
    utility: &dyn Utility,
) -> f64 {
    utility.total(&snrs(ues, antennas, gains, radio))
}

/// `a` beats `b` by more than a relative rounding margin. Relative, so a
/// positive rescaling of the utility leaves every comparison unchanged.
fn clearly_greater(a: f64, b: f64) -> bool {
    a > b + 1e-12 * a.abs().max(b.abs())
}

/// Greedy federation formation.
///
/// UEs are visited by descending demand (ties by id). Each UE takes its best
/// antenna; if another federation already holds it, the UE joins that
/// federation. Remaining antennas, by id, go to the federation with the
/// largest marginal utility gain, or stay idle if no gain is positive.
pub fn allocate_federations(
    ues: &[UeDemand],
    antennas: &[u32],
    gains: &GainTable,
    radio: &SnrParams,
    utility: &dyn Utility,
) -> Vec<Federation> {
    let mut antennas: Vec<u32> = antennas.to_vec();
    antennas.sort_unstable();
    antennas.dedup();
    let mut order: Vec<UeDemand> = ues.to_vec();
    order.sort_by(|a, b| b.demand.total_cmp(&a.demand).then(a.id.cmp(&b.id)));

    let mut feds: Vec<(BTreeSet<u32>, BTreeSet<u32>)> = Vec::new();
    let mut owner: Vec<Option<usize>> = vec![None; antennas.len()];
    for ue in &order {
        let mut best: Option<(usize, f64)> = None;
        for (i, &a) in antennas.iter().enumerate() {
            let g = gains.get_or_zero(a, ue.id);
            if best.is_none_or(|(_, bg)| g > bg) {
                best = Some((i, g));
            }
        }
        let Some((i, _)) = best else { continue };
        match owner[i] {
            Some(f) => {
                feds[f].1.insert(ue.id);
            }
            None => {
                owner[i] = Some(feds.len());
                feds.push(([antennas[i]].into(), [ue.id].into()));
            }
        }
    }

    let mut current: Vec<f64> = feds
        .iter()
        .map(|(a, u)| federation_utility(u, a, gains, radio, utility))
        .collect();
    for (i, &a) in antennas.iter().enumerate() {
        if owner[i].is_some() {
            continue;
        }
        let mut best: Option<(usize, f64, f64)> = None;
        for (f, (ants, us)) in feds.iter().enumerate() {
            let mut with = ants.clone();
            with.insert(a);
            let u = federation_utility(us, &with, gains, radio, utility);
            let gain = u - current[f];
            if best.is_none_or(|(_, bg, _)| clearly_greater(gain, bg)) {
                best = Some((f, gain, u));
            }
        }
        if let Some((f, gain, u)) = best {
            if gain > 0.0 {
                feds[f].0.insert(a);
                current[f] = u;
                owner[i] = Some(f);
            }
        }
    }

    feds.into_iter()
        .zip(current)
        .map(|((antenna_ids, ue_ids), utility)| Federation {
            antenna_ids,
            ue_ids,
            utility,
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AntennaSelection {
    /// Active antennas in activation order.
    pub active: Vec<u32>,
    /// Set when even the whole federation misses some target; all antennas are then active.
    pub infeasible: bool,
}

/// Federation antennas sorted by total contributed gain, descending (ties by id).
pub fn gain_order(federation: &Federation, gains: &GainTable) -> Vec<u32> {
    let mut ants: Vec<(u32, f64)> = federation
        .antenna_ids
        .iter()
        .map(|&a| (a, federation.ue_ids.iter().map(|&u| gains.get_or_zero(a, u)).sum()))
        .collect();
    ants.sort_by(|x, y| y.1.total_cmp(&x.1).then(x.0.cmp(&y.0)));
    ants.into_iter().map(|(a, _)| a).collect()
}

/// Whether `active` meets every UE's target. UEs without a target need nothing.
pub fn meets_targets(
    federation: &Federation,
    active: &[u32],
    targets: &dyn Fn(u32) -> f64,
    gains: &GainTable,
    radio: &SnrParams,
) -> bool {
    federation.ue_ids.iter().all(|&u| {
        let g: f64 = active.iter().map(|&a| gains.get_or_zero(a, u)).sum();
        radio.tx_power * g / radio.noise_power >= targets(u)
    })
}

/// Shortest non-empty gain-sorted prefix meeting every UE's SNR target.
pub fn select_active_antennas(
    federation: &Federation,
    targets: &dyn Fn(u32) -> f64,
    gains: &GainTable,
    radio: &SnrParams,
) -> AntennaSelection {
    let order = gain_order(federation, gains);
    for k in 1..=order.len() {
        if meets_targets(federation, &order[..k], targets, gains, radio) {
            return AntennaSelection {
                active: order[..k].to_vec(),
                infeasible: false,
            };
        }
    }
    AntennaSelection {
        active: order,
        infeasible: true,
    }
}
