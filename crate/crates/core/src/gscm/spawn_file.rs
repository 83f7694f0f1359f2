//! Binary spawn file.
//!
//! ```text
//! "LUMP" | u16 version=1 | u64 scene_hash | u64 spawn_seed | u32 count
//! count × ( u32 id | u8 order | 3×f64 position | 3×f64 normal | f64 g0 | f64 xi | u32 surface_index )
//! ```
//! All fields little-endian.

use super::{GscmError, Mpc, MpcSet};
use crate::geometry::{Scene, Vec3};

pub const SPAWN_MAGIC: &[u8; 4] = b"LUMP";
pub const SPAWN_VERSION: u16 = 1;
const HEADER_LEN: usize = 4 + 2 + 8 + 8 + 4;
const RECORD_LEN: usize = 4 + 1 + 24 + 24 + 8 + 8 + 4;

pub fn save_spawn(set: &MpcSet) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + RECORD_LEN * set.len());
    out.extend_from_slice(SPAWN_MAGIC);
    out.extend_from_slice(&SPAWN_VERSION.to_le_bytes());
    out.extend_from_slice(&set.scene_hash.to_le_bytes());
    out.extend_from_slice(&set.spawn_seed.to_le_bytes());
    out.extend_from_slice(&(set.len() as u32).to_le_bytes());
    for m in &set.mpcs {
        out.extend_from_slice(&m.id.to_le_bytes());
        out.push(m.order_population);
        for v in [m.position, m.normal] {
            for c in v.to_array() {
                out.extend_from_slice(&c.to_le_bytes());
            }
        }
        out.extend_from_slice(&m.g0.to_le_bytes());
        out.extend_from_slice(&m.xi.to_le_bytes());
        out.extend_from_slice(&m.surface_index.to_le_bytes());
    }
    out
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take<const N: usize>(&mut self) -> Result<[u8; N], GscmError> {
        let end = self
            .pos
            .checked_add(N)
            .filter(|&e| e <= self.buf.len())
            .ok_or(GscmError::Truncated)?;
        let out = self.buf[self.pos..end].try_into().expect("slice has length N");
        self.pos = end;
        Ok(out)
    }
    fn u8(&mut self) -> Result<u8, GscmError> {
        Ok(self.take::<1>()?[0])
    }
    fn u16(&mut self) -> Result<u16, GscmError> {
        Ok(u16::from_le_bytes(self.take()?))
    }
    fn u32(&mut self) -> Result<u32, GscmError> {
        Ok(u32::from_le_bytes(self.take()?))
    }
    fn u64(&mut self) -> Result<u64, GscmError> {
        Ok(u64::from_le_bytes(self.take()?))
    }
    fn f64(&mut self) -> Result<f64, GscmError> {
        Ok(f64::from_le_bytes(self.take()?))
    }
    fn vec3(&mut self) -> Result<Vec3, GscmError> {
        Ok(Vec3::new(self.f64()?, self.f64()?, self.f64()?))
    }
}

/// Decodes a spawn file and checks it was produced against `scene`.
pub fn load_spawn(bytes: &[u8], scene: &Scene) -> Result<MpcSet, GscmError> {
    let set = decode_spawn(bytes)?;
    if set.scene_hash != scene.content_hash() {
        return Err(GscmError::SceneMismatch {
            expected: scene.content_hash(),
            found: set.scene_hash,
        });
    }
    for m in &set.mpcs {
        if m.surface_index as usize >= scene.surfaces().len() {
            return Err(GscmError::InvalidRecord {
                index: m.id as usize,
                reason: format!("surface index {} out of range", m.surface_index),
            });
        }
    }
    Ok(set)
}

/// Decodes without a scene check.
pub fn decode_spawn(bytes: &[u8]) -> Result<MpcSet, GscmError> {
    if bytes.len() < 4 || &bytes[..4] != SPAWN_MAGIC {
        return Err(GscmError::BadMagic);
    }
    let mut c = Cursor { buf: bytes, pos: 4 };
    let version = c.u16()?;
    if version != SPAWN_VERSION {
        return Err(GscmError::VersionUnsupported(version));
    }
    let scene_hash = c.u64()?;
    let spawn_seed = c.u64()?;
    let count = c.u32()? as usize;
    let expected = HEADER_LEN + count * RECORD_LEN;
    if bytes.len() < expected {
        return Err(GscmError::Truncated);
    }
    if bytes.len() > expected {
        return Err(GscmError::TrailingBytes(bytes.len() - expected));
    }
    let mut mpcs = Vec::with_capacity(count);
    for index in 0..count {
        let m = Mpc {
            id: c.u32()?,
            order_population: c.u8()?,
            position: c.vec3()?,
            normal: c.vec3()?,
            g0: c.f64()?,
            xi: c.f64()?,
            surface_index: c.u32()?,
        };
        let reason = if m.id as usize != index {
            Some(format!("id {} out of sequence", m.id))
        } else if !(1..=3).contains(&m.order_population) {
            Some(format!("order {} not in 1..=3", m.order_population))
        } else if !(m.position.is_finite() && m.normal.is_finite() && m.g0 > 0.0 && m.xi >= 0.0) {
            Some("non-finite or out-of-range value".to_string())
        } else {
            None
        };
        if let Some(reason) = reason {
            return Err(GscmError::InvalidRecord { index, reason });
        }
        mpcs.push(m);
    }
    Ok(MpcSet {
        mpcs,
        spawn_seed,
        scene_hash,
    })
}
