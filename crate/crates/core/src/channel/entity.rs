use serde::{Deserialize, Serialize};

use crate::geometry::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntityKind {
    Bs,
    Ue,
}

impl EntityKind {
    pub fn code(self) -> u8 {
        match self {
            EntityKind::Bs => 0,
            EntityKind::Ue => 1,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(EntityKind::Bs),
            1 => Some(EntityKind::Ue),
            _ => None,
        }
    }
}

/// A base station or user equipment with one or more isotropic antennas.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Entity {
    pub id: u32,
    pub kind: EntityKind,
    pub position: Vec3,
    pub velocity: Vec3,
    /// Element offsets from `position`, meters.
    pub antenna_offsets: Vec<Vec3>,
}

impl Entity {
    pub fn new(id: u32, kind: EntityKind, position: Vec3) -> Self {
        Entity {
            id,
            kind,
            position,
            velocity: Vec3::ZERO,
            antenna_offsets: vec![Vec3::ZERO],
        }
    }

    pub fn with_velocity(mut self, velocity: Vec3) -> Self {
        self.velocity = velocity;
        self
    }

    pub fn with_antennas(mut self, offsets: Vec<Vec3>) -> Self {
        self.antenna_offsets = offsets;
        self
    }

    pub fn antenna_count(&self) -> usize {
        self.antenna_offsets.len()
    }

    pub fn antenna_position(&self, element: usize) -> Vec3 {
        self.position + self.antenna_offsets[element]
    }
}
