//! What the simulator needs from the engine, over the wire or in process.

use lusim_core::channel::EntityKind;
use lusim_core::engine::Engine;
use lusim_link::EngineClient;

use crate::kernel::TimeMaster;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntityInfo {
    pub id: u32,
    pub is_ue: bool,
    pub position: [f64; 3],
}

pub trait EngineBackend: TimeMaster {
    /// Mean |H|² of link `tx → rx` at the last confirmed step.
    fn channel_gain(&mut self, tx: u32, rx: u32) -> Result<f64, String>;

    fn entities(&mut self) -> Result<Vec<EntityInfo>, String>;
}

impl TimeMaster for EngineClient {
    fn step_to(&mut self, time: f64) -> Result<f64, String> {
        EngineClient::step_to(self, time).map_err(|e| e.to_string())
    }
}

impl EngineBackend for EngineClient {
    fn channel_gain(&mut self, tx: u32, rx: u32) -> Result<f64, String> {
        self.get_channel(tx, rx)
            .map(|h| h.mean_power_gain())
            .map_err(|e| e.to_string())
    }

    fn entities(&mut self) -> Result<Vec<EntityInfo>, String> {
        let states = self.get_positions().map_err(|e| e.to_string())?;
        Ok(states
            .into_iter()
            .map(|s| EntityInfo {
                id: s.id,
                is_ue: s.kind == EntityKind::Ue.code(),
                position: s.position,
            })
            .collect())
    }
}

impl TimeMaster for Engine {
    fn step_to(&mut self, time: f64) -> Result<f64, String> {
        Engine::step_to(self, time).map_err(|e| e.to_string())?;
        Ok(self.time())
    }
}

impl EngineBackend for Engine {
    fn channel_gain(&mut self, tx: u32, rx: u32) -> Result<f64, String> {
        self.channel(tx, rx)
            .map(|h| h.mean_power_gain())
            .map_err(|e| e.to_string())
    }

    fn entities(&mut self) -> Result<Vec<EntityInfo>, String> {
        Ok(Engine::entities(self)
            .iter()
            .map(|e| EntityInfo {
                id: e.id,
                is_ue: e.kind == EntityKind::Ue,
                position: [e.position.x, e.position.y, e.position.z],
            })
            .collect())
    }
}
