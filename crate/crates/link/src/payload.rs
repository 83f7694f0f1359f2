//! Channel realization payload and its split across `ChannelData` datagrams.

use std::collections::{BTreeMap, VecDeque};

use lusim_core::channel::ChannelRealization;
use num_complex::Complex32;
use thiserror::Error;

/// Largest payload slice carried by one `ChannelData` datagram.
pub const CHUNK_PAYLOAD_MAX: usize = 59_000;

const PAYLOAD_HEADER_LEN: usize = 24;

/// Partial reassemblies kept before the oldest is abandoned.
const MAX_PENDING: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PayloadError {
    #[error("payload shorter than its 24-byte header")]
    Truncated,
    #[error("payload is {actual} bytes, header implies {expected}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("payload needs {0} chunks, more than a u16 can count")]
    TooManyChunks(usize),
    #[error("antenna count {0} does not fit a u16")]
    TooManyAntennas(usize),
}

/// `H[rx][tx][bin]` of one link as carried on the wire, in f32.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelDataPayload {
    pub tx_id: u32,
    pub rx_id: u32,
    pub timestamp: f64,
    pub rx_ant: u16,
    pub tx_ant: u16,
    pub n_bins: u32,
    pub values: Vec<Complex32>,
}

impl ChannelDataPayload {
    pub fn from_realization(h: &ChannelRealization) -> Result<Self, PayloadError> {
        let rx_ant = u16::try_from(h.rx_antennas).map_err(|_| PayloadError::TooManyAntennas(h.rx_antennas))?;
        let tx_ant = u16::try_from(h.tx_antennas).map_err(|_| PayloadError::TooManyAntennas(h.tx_antennas))?;
        Ok(ChannelDataPayload {
            tx_id: h.tx_id,
            rx_id: h.rx_id,
            timestamp: h.timestamp,
            rx_ant,
            tx_ant,
            n_bins: h.bins as u32,
            values: h.h.iter().map(|c| Complex32::new(c.re as f32, c.im as f32)).collect(),
        })
    }

    fn value_count(rx_ant: u16, tx_ant: u16, n_bins: u32) -> usize {
        rx_ant as usize * tx_ant as usize * n_bins as usize
    }

    pub fn encoded_len(&self) -> usize {
        PAYLOAD_HEADER_LEN + 8 * self.values.len()
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.encoded_len());
        out.extend_from_slice(&self.tx_id.to_le_bytes());
        out.extend_from_slice(&self.rx_id.to_le_bytes());
        out.extend_from_slice(&self.timestamp.to_le_bytes());
        out.extend_from_slice(&self.rx_ant.to_le_bytes());
        out.extend_from_slice(&self.tx_ant.to_le_bytes());
        out.extend_from_slice(&self.n_bins.to_le_bytes());
        for v in &self.values {
            out.extend_from_slice(&v.re.to_le_bytes());
            out.extend_from_slice(&v.im.to_le_bytes());
        }
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, PayloadError> {
        if bytes.len() < PAYLOAD_HEADER_LEN {
            return Err(PayloadError::Truncated);
        }
        let u32_at = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().expect("4 bytes"));
        let u16_at = |i: usize| u16::from_le_bytes([bytes[i], bytes[i + 1]]);
        let rx_ant = u16_at(16);
        let tx_ant = u16_at(18);
        let n_bins = u32_at(20);
        let expected = PAYLOAD_HEADER_LEN + 8 * Self::value_count(rx_ant, tx_ant, n_bins);
        if bytes.len() != expected {
            return Err(PayloadError::LengthMismatch {
                expected,
                actual: bytes.len(),
            });
        }
        let values = bytes[PAYLOAD_HEADER_LEN..]
            .chunks_exact(8)
            .map(|c| {
                Complex32::new(
                    f32::from_le_bytes(c[..4].try_into().expect("4 bytes")),
                    f32::from_le_bytes(c[4..].try_into().expect("4 bytes")),
                )
            })
            .collect();
        Ok(ChannelDataPayload {
            tx_id: u32_at(0),
            rx_id: u32_at(4),
            timestamp: f64::from_le_bytes(bytes[8..16].try_into().expect("8 bytes")),
            rx_ant,
            tx_ant,
            n_bins,
            values,
        })
    }

    pub fn at(&self, rx: usize, tx: usize, bin: usize) -> Complex32 {
        self.values[(rx * self.tx_ant as usize + tx) * self.n_bins as usize + bin]
    }

    /// Mean of |H|² over bins and element pairs.
    pub fn mean_power_gain(&self) -> f64 {
        if self.values.is_empty() {
            return 0.0;
        }
        self.values
            .iter()
            .map(|c| f64::from(c.re).powi(2) + f64::from(c.im).powi(2))
            .sum::<f64>()
            / self.values.len() as f64
    }
}

/// Splits `payload` into slices of at most [`CHUNK_PAYLOAD_MAX`] bytes.
/// An empty payload still produces one (empty) chunk.
pub fn chunk_payload(payload: &[u8]) -> Result<Vec<&[u8]>, PayloadError> {
    if payload.is_empty() {
        return Ok(vec![payload]);
    }
    let chunks: Vec<&[u8]> = payload.chunks(CHUNK_PAYLOAD_MAX).collect();
    if chunks.len() > u16::MAX as usize {
        return Err(PayloadError::TooManyChunks(chunks.len()));
    }
    Ok(chunks)
}

struct Partial {
    total: u16,
    parts: Vec<Option<Vec<u8>>>,
    received: usize,
}

/// Collects `ChannelData` chunks back into payloads.
///
/// Chunks of one reply carry consecutive sequence numbers, so
/// `seq − chunk_index` names the reply they belong to. Duplicates, including late ones
/// after completion, are ignored.
#[derive(Default)]
pub struct Reassembler {
    pending: BTreeMap<u32, Partial>,
    order: VecDeque<u32>,
    /// Recently completed replies, so late duplicates do not start a new one.
    completed: VecDeque<(u32, u16)>,
}

impl Reassembler {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns the whole payload once its last missing chunk arrives.
    pub fn offer(&mut self, seq: u32, chunk_index: u16, chunk_total: u16, payload: &[u8]) -> Option<Vec<u8>> {
        if chunk_total == 0 || chunk_index >= chunk_total {
            return None;
        }
        if chunk_total == 1 {
            return Some(payload.to_vec());
        }
        let group = seq.wrapping_sub(u32::from(chunk_index));
        if self.completed.contains(&(group, chunk_total)) {
            return None;
        }
        if self.pending.get(&group).is_some_and(|p| p.total != chunk_total) {
            self.pending.remove(&group);
            self.order.retain(|g| *g != group);
        }
        if !self.pending.contains_key(&group) {
            if self.order.len() >= MAX_PENDING {
                if let Some(old) = self.order.pop_front() {
                    self.pending.remove(&old);
                }
            }
            self.order.push_back(group);
            self.pending.insert(
                group,
                Partial {
                    total: chunk_total,
                    parts: vec![None; chunk_total as usize],
                    received: 0,
                },
            );
        }
        let partial = self.pending.get_mut(&group).expect("inserted above");
        let slot = &mut partial.parts[chunk_index as usize];
        if slot.is_none() {
            *slot = Some(payload.to_vec());
            partial.received += 1;
        }
        if partial.received < partial.total as usize {
            return None;
        }
        let done = self.pending.remove(&group).expect("present");
        self.order.retain(|g| *g != group);
        if self.completed.len() >= MAX_PENDING {
            self.completed.pop_front();
        }
        self.completed.push_back((group, chunk_total));
        Some(done.parts.into_iter().flatten().flatten().collect())
    }

    pub fn pending(&self) -> usize {
        self.pending.len()
    }
}
