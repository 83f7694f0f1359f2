//! The system-level simulation loop: periodic steps that re-form federations,
//! switch antennas and account energy, plus an optional WPT plan at start.

use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::backend::EngineBackend;
use crate::energy::{wpt_schedule, Device, EnergyModel, WptConfig};
use crate::federation::{allocate_federations, select_active_antennas, Federation, UeDemand};
use crate::kernel::{lockstep_violations, Kernel, KernelError};
use crate::results::{ResultEvent, ResultsWriter};
use crate::snr::{GainTable, SnrParams};
use crate::utility::{self, UtilityConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WptPolicy {
    pub config: WptConfig,
    pub devices: Vec<Device>,
}

/// Knobs of the system simulator. Every field has a default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SysPolicy {
    pub utility: UtilityConfig,
    /// Per-UE SNR target, dB.
    pub snr_target_db: f64,
    pub energy: EnergyModel,
    /// Seconds per hop for the latency figure.
    pub per_hop_delay: f64,
    pub wpt: Option<WptPolicy>,
}

impl Default for SysPolicy {
    fn default() -> Self {
        SysPolicy {
            utility: UtilityConfig::default(),
            snr_target_db: 10.0,
            energy: EnergyModel::default(),
            per_hop_delay: 1e-4,
            wpt: None,
        }
    }
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error("engine: {0}")]
    Engine(String),
    #[error(transparent)]
    Strategy(#[from] lusim_core::registry::UnknownStrategy),
    #[error("results: {0}")]
    Io(#[from] std::io::Error),
    #[error("invalid policy: {0}")]
    Policy(String),
    #[error("lockstep audit failed at {0} dispatches")]
    Lockstep(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimSummary {
    pub steps: usize,
    pub federation_changes: usize,
    pub total_joules: f64,
    pub infeasible_steps: usize,
    pub results_lines: u64,
}

enum Event {
    Step(u64),
    Wpt,
}

/// Runs `duration / step` steps against `backend` and streams results to `out`.
pub fn run_system<B: EngineBackend, W: Write>(
    backend: B,
    policy: &SysPolicy,
    radio: SnrParams,
    step: f64,
    duration: f64,
    out: W,
) -> Result<(SimSummary, B), SimError> {
    if !(step.is_finite() && step > 0.0 && duration.is_finite() && duration >= 0.0) {
        return Err(SimError::Policy(format!("step {step} / duration {duration}")));
    }
    policy.energy.validate().map_err(|e| SimError::Policy(e.to_string()))?;
    let utility = utility::create(&policy.utility)?;
    let target = 10f64.powf(policy.snr_target_db / 10.0);
    let mut writer = ResultsWriter::new(out);
    let mut kernel: Kernel<Event, B> = Kernel::new(backend);
    // Integer step counts keep times identical to the engine's batch run.
    let count = (duration / step + 1e-9).floor() as u64;
    for k in 0..=count {
        kernel.schedule(k as f64 * step, Event::Step(k))?;
    }
    if policy.wpt.is_some() {
        kernel.schedule(0.0, Event::Wpt)?;
    }

    let mut energy = policy.energy;
    let mut last: Option<Vec<Federation>> = None;
    let mut latest: Vec<Federation> = Vec::new();
    let mut gains = GainTable::new();
    let mut summary = SimSummary {
        steps: 0,
        federation_changes: 0,
        total_joules: 0.0,
        infeasible_steps: 0,
        results_lines: 0,
    };
    let mut failure: Option<SimError> = None;

    let mut handler = |kernel: &mut Kernel<Event, B>, time: f64, event: Event| -> Result<(), String> {
        let result: Result<(), SimError> = (|| {
            match event {
                Event::Step(k) => {
                    let entities = kernel.master().entities().map_err(SimError::Engine)?;
                    let bs: Vec<u32> = entities.iter().filter(|e| !e.is_ue).map(|e| e.id).collect();
                    let ues: Vec<UeDemand> = entities
                        .iter()
                        .filter(|e| e.is_ue)
                        .map(|e| UeDemand { id: e.id, demand: 1.0 })
                        .collect();
                    gains = GainTable::new();
                    for &a in &bs {
                        for u in &ues {
                            let g = kernel.master().channel_gain(a, u.id).map_err(SimError::Engine)?;
                            gains.insert(a, u.id, g);
                        }
                    }
                    let feds = allocate_federations(&ues, &bs, &gains, &radio, utility.as_ref());
                    if last.as_ref().map(|l| assignment(l)) != Some(assignment(&feds)) {
                        summary.federation_changes += 1;
                        writer.write(&ResultEvent::Federations {
                            time,
                            federations: feds.clone(),
                            latency: 2.0 * policy.per_hop_delay,
                        })?;
                    }
                    let mut active = Vec::new();
                    let mut infeasible = 0;
                    for f in &feds {
                        let sel = select_active_antennas(f, &|_| target, &gains, &radio);
                        infeasible += usize::from(sel.infeasible);
                        active.extend(sel.active);
                    }
                    active.sort_unstable();
                    summary.infeasible_steps += usize::from(infeasible > 0);
                    // Energy of the interval that starts now; the last step closes the run.
                    let span = if k < count { step } else { 0.0 };
                    let joules = active.len() as f64 * policy.energy.antenna_power(1.0) * span;
                    let total = energy.accumulate(joules).map_err(|e| SimError::Policy(e.to_string()))?;
                    writer.write(&ResultEvent::Energy {
                        time,
                        active_antennas: active,
                        infeasible_federations: infeasible,
                        step_joules: joules,
                        total_joules: total,
                    })?;
                    summary.steps += 1;
                    latest = feds.clone();
                    last = Some(feds);
                }
                Event::Wpt => {
                    let wpt = policy.wpt.as_ref().expect("scheduled only with a policy");
                    match wpt_schedule(&wpt.devices, &latest, &gains, &wpt.config, &policy.energy) {
                        Ok(plan) => writer.write(&ResultEvent::WptPlan { time, plan })?,
                        Err(e) => writer.write(&ResultEvent::WptUnavailable {
                            time,
                            reason: e.to_string(),
                        })?,
                    }
                }
            }
            Ok(())
        })();
        result.map_err(|e| {
            let text = e.to_string();
            failure = Some(e);
            text
        })
    };
    let outcome = kernel.run_until(duration + step * 1e-6, &mut handler);
    if let Err(e) = outcome {
        return Err(failure.take().unwrap_or(SimError::Kernel(e)));
    }
    let violations = lockstep_violations(kernel.trace()).len();
    if violations > 0 {
        return Err(SimError::Lockstep(violations));
    }
    summary.total_joules = energy.energy_accumulator;
    summary.results_lines = writer.lines();
    writer.into_inner()?;
    Ok((summary, kernel.into_master()))
}

fn assignment(feds: &[Federation]) -> Vec<(Vec<u32>, Vec<u32>)> {
    feds.iter()
        .map(|f| {
            (
                f.antenna_ids.iter().copied().collect(),
                f.ue_ids.iter().copied().collect(),
            )
        })
        .collect()
}
