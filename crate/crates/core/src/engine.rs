//! Engine state owned by one logical controller.
//!
//! Simulation time moves only through [`Engine::step_to`]. Each step applies
//! queued position updates, advances mobility, re-enumerates every BS→UE link
//! and advances the fading of every surviving path. Channel realizations are
//! synthesized on demand from the state of the last completed step.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use rayon::prelude::*;
use thiserror::Error;

use crate::channel::{
    path_stream, synthesize_channel, update_fading, ChannelModel, ChannelRealization, Entity, EntityKind, FadingParams,
    FadingState, PathChain, RadioParams,
};
use crate::geometry::{Scene, Vec3};
use crate::gscm::{build_lut, GscmParams, MpcSet, VisibilityLut};
use crate::mobility::MobilityModel;

/// Parameters that may change while the engine runs.
pub const RUNTIME_PARAMS: [&str; 4] = ["max_path_length", "tx_power", "noise_power", "fading_coherence_tau"];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error("time regression: engine is at {current} s, requested {requested} s")]
    TimeRegression { current: f64, requested: f64 },
    #[error("time {0} is not finite")]
    NonFiniteTime(f64),
    #[error("unknown entity {0}")]
    UnknownEntity(u32),
    #[error("no link from {0} to {1}")]
    UnknownLink(u32, u32),
    #[error("unknown runtime parameter `{0}`")]
    UnknownParam(String),
    #[error("invalid value {value} for `{key}`: {reason}")]
    InvalidParam { key: String, value: f64, reason: String },
    #[error("MPC set does not match the scene")]
    SceneMismatch,
    #[error("position or velocity is not finite")]
    NonFiniteState,
}

type LinkKey = (u32, u32);

/// Bounce count followed by up to three hop ids.
type HopKey = [u32; 4];

fn hop_key(hops: &[u32]) -> HopKey {
    let mut k = [hops.len() as u32, u32::MAX, u32::MAX, u32::MAX];
    k[1..=hops.len()].copy_from_slice(hops);
    k
}

pub struct Engine {
    scene: Arc<Scene>,
    mpcs: MpcSet,
    lut: VisibilityLut,
    gscm: GscmParams,
    radio: RadioParams,
    entities: Vec<Entity>,
    mobility: Box<dyn MobilityModel>,
    time: f64,
    time_changes: u64,
    pending: BTreeMap<u32, (Vec3, Vec3)>,
    links: BTreeMap<LinkKey, Vec<PathChain>>,
    fading: BTreeMap<LinkKey, HashMap<HopKey, FadingState>>,
    channels: HashMap<LinkKey, Arc<ChannelRealization>>,
}

impl Engine {
    /// Builds the visibility table and the state at time 0.
    pub fn new(
        scene: Arc<Scene>,
        mpcs: MpcSet,
        gscm: GscmParams,
        radio: RadioParams,
        mut entities: Vec<Entity>,
        mobility: Box<dyn MobilityModel>,
    ) -> Result<Engine, EngineError> {
        if mpcs.scene_hash != scene.content_hash() {
            return Err(EngineError::SceneMismatch);
        }
        entities.sort_by_key(|e| e.id);
        let lut = build_lut(&scene, &mpcs, gscm.max_link_length);
        let mut engine = Engine {
            scene,
            mpcs,
            lut,
            gscm,
            radio,
            entities,
            mobility,
            time: 0.0,
            time_changes: 0,
            pending: BTreeMap::new(),
            links: BTreeMap::new(),
            fading: BTreeMap::new(),
            channels: HashMap::new(),
        };
        engine.refresh();
        Ok(engine)
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    /// How many times simulation time has changed; only `step_to` increments it.
    pub fn time_changes(&self) -> u64 {
        self.time_changes
    }

    pub fn scene(&self) -> &Scene {
        &self.scene
    }

    pub fn mpcs(&self) -> &MpcSet {
        &self.mpcs
    }

    pub fn lut(&self) -> &VisibilityLut {
        &self.lut
    }

    pub fn radio(&self) -> &RadioParams {
        &self.radio
    }

    pub fn gscm(&self) -> &GscmParams {
        &self.gscm
    }

    pub fn entities(&self) -> &[Entity] {
        &self.entities
    }

    pub fn entity(&self, id: u32) -> Option<&Entity> {
        self.entities
            .binary_search_by_key(&id, |e| e.id)
            .ok()
            .map(|i| &self.entities[i])
    }

    /// Every (BS, UE) link, ascending.
    pub fn link_keys(&self) -> impl Iterator<Item = LinkKey> + '_ {
        self.links.keys().copied()
    }

    pub fn paths(&self, tx: u32, rx: u32) -> Result<&[PathChain], EngineError> {
        self.links
            .get(&(tx, rx))
            .map(Vec::as_slice)
            .ok_or(EngineError::UnknownLink(tx, rx))
    }

    fn fading_params(&self) -> FadingParams {
        FadingParams {
            shape: self.gscm.gamma_shape_chi,
            coherence_tau: self.gscm.fading_coherence_tau,
        }
    }

    /// Queues a position/velocity update applied at the next step.
    pub fn set_position(&mut self, id: u32, position: Vec3, velocity: Vec3) -> Result<(), EngineError> {
        if self.entity(id).is_none() {
            return Err(EngineError::UnknownEntity(id));
        }
        if !position.is_finite() || !velocity.is_finite() {
            return Err(EngineError::NonFiniteState);
        }
        self.pending.insert(id, (position, velocity));
        Ok(())
    }

    /// Changes one of [`RUNTIME_PARAMS`]; effects on paths appear at the next step.
    pub fn set_param(&mut self, key: &str, value: f64) -> Result<(), EngineError> {
        let invalid = |reason: &str| EngineError::InvalidParam {
            key: key.to_string(),
            value,
            reason: reason.to_string(),
        };
        if !(value.is_finite() && value > 0.0) {
            return Err(invalid("must be > 0"));
        }
        match key {
            "max_path_length" => {
                if value > self.lut.max_link_length() {
                    return Err(invalid("exceeds the visibility table's max_link_length"));
                }
                self.radio.max_path_length = value;
            }
            "tx_power" => self.radio.tx_power = value,
            "noise_power" => self.radio.noise_power = value,
            "fading_coherence_tau" => self.gscm.fading_coherence_tau = value,
            other => return Err(EngineError::UnknownParam(other.to_string())),
        }
        Ok(())
    }

    /// Advances simulation time to `t` (which may equal the current time).
    pub fn step_to(&mut self, t: f64) -> Result<(), EngineError> {
        if !t.is_finite() {
            return Err(EngineError::NonFiniteTime(t));
        }
        if t < self.time {
            return Err(EngineError::TimeRegression {
                current: self.time,
                requested: t,
            });
        }
        for (id, (p, v)) in std::mem::take(&mut self.pending) {
            if let Ok(i) = self.entities.binary_search_by_key(&id, |e| e.id) {
                self.entities[i].position = p;
                self.entities[i].velocity = v;
            }
        }
        self.mobility.advance(&mut self.entities, self.time, t, &self.scene);
        if t != self.time {
            self.time_changes += 1;
        }
        self.time = t;
        self.refresh();
        Ok(())
    }

    fn refresh(&mut self) {
        self.channels.clear();
        let model = ChannelModel {
            scene: &self.scene,
            mpcs: &self.mpcs,
            lut: &self.lut,
            radio: &self.radio,
            fading: self.fading_params(),
        };
        let visibility: HashMap<u32, Vec<Option<f64>>> = self
            .entities
            .par_iter()
            .map(|e| (e.id, model.visible_from(e.position)))
            .collect();
        let pairs: Vec<(&Entity, &Entity)> = self
            .entities
            .iter()
            .filter(|e| e.kind == EntityKind::Bs)
            .flat_map(|bs| {
                self.entities
                    .iter()
                    .filter(|e| e.kind == EntityKind::Ue)
                    .map(move |ue| (bs, ue))
            })
            .collect();
        let time = self.time;
        let seed = self.mpcs.spawn_seed;
        let params = model.fading;
        let mut old = std::mem::take(&mut self.fading);
        let jobs: Vec<(LinkKey, HashMap<HopKey, FadingState>)> = pairs
            .iter()
            .map(|(tx, rx)| ((tx.id, rx.id), old.remove(&(tx.id, rx.id)).unwrap_or_default()))
            .collect();
        let results: Vec<(LinkKey, Vec<PathChain>, HashMap<HopKey, FadingState>)> = pairs
            .par_iter()
            .zip(jobs)
            .map(|((tx, rx), (key, mut states))| {
                let chains =
                    model.enumerate_with_fading(tx, rx, &visibility[&tx.id], &visibility[&rx.id], time, |hops| {
                        states.get(&hop_key(hops)).map(|prev| {
                            let stream = path_stream(seed, tx.id, rx.id, hops);
                            update_fading(*prev, time - prev.last_update, &params, stream).0
                        })
                    });
                // Paths that vanished keep their state so fading resumes if they return.
                for chain in &chains {
                    states.insert(hop_key(&chain.hops), chain.fading_state);
                }
                (key, chains, states)
            })
            .collect();
        self.links.clear();
        for (key, chains, states) in results {
            self.links.insert(key, chains);
            self.fading.insert(key, states);
        }
    }

    /// Frequency response of link `tx → rx` at the last completed step.
    pub fn channel(&mut self, tx: u32, rx: u32) -> Result<Arc<ChannelRealization>, EngineError> {
        if let Some(h) = self.channels.get(&(tx, rx)) {
            return Ok(Arc::clone(h));
        }
        let paths = self.links.get(&(tx, rx)).ok_or(EngineError::UnknownLink(tx, rx))?;
        let tx_e = self.entity(tx).ok_or(EngineError::UnknownEntity(tx))?;
        let rx_e = self.entity(rx).ok_or(EngineError::UnknownEntity(rx))?;
        let h = Arc::new(synthesize_channel(
            paths,
            tx_e,
            rx_e,
            &self.mpcs,
            &self.radio,
            self.time,
        ));
        self.channels.insert((tx, rx), Arc::clone(&h));
        Ok(h)
    }

    /// Realizations for every link, synthesized in parallel, in link order.
    pub fn all_channels(&mut self) -> Vec<Arc<ChannelRealization>> {
        let keys: Vec<LinkKey> = self.links.keys().copied().collect();
        let missing: Vec<LinkKey> = keys
            .iter()
            .copied()
            .filter(|k| !self.channels.contains_key(k))
            .collect();
        let fresh: Vec<(LinkKey, ChannelRealization)> = missing
            .par_iter()
            .map(|&(tx, rx)| {
                let tx_e = self.entity(tx).expect("link endpoints exist");
                let rx_e = self.entity(rx).expect("link endpoints exist");
                let h = synthesize_channel(&self.links[&(tx, rx)], tx_e, rx_e, &self.mpcs, &self.radio, self.time);
                ((tx, rx), h)
            })
            .collect();
        for (k, h) in fresh {
            self.channels.insert(k, Arc::new(h));
        }
        keys.iter().map(|k| Arc::clone(&self.channels[k])).collect()
    }
}
