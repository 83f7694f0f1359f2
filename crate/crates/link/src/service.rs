//! The engine side of the protocol.

use std::collections::{HashMap, VecDeque};
use std::io;
use std::net::{SocketAddr, UdpSocket};

use lusim_core::engine::{Engine, EngineError};
use lusim_core::Vec3;

use crate::codec::{decode, decode_header, encode, EntityState, Message, Packet};
use crate::payload::{chunk_payload, ChannelDataPayload};

/// Replies remembered for retransmission, keyed by `(sender, seq)`.
pub const REPLY_CACHE_CAPACITY: usize = 64;

type CacheEntry = ((SocketAddr, u32), Vec<Vec<u8>>);

/// `code` field of `Error` replies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u16)]
pub enum ErrorCode {
    Malformed = 1,
    TimeRegression = 2,
    UnknownEntity = 3,
    UnknownLink = 4,
    BadParam = 5,
    Unexpected = 6,
    InvalidValue = 7,
    /// A sequence number at or below one already handled and no longer cached.
    StaleSeq = 8,
    Internal = 9,
}

impl ErrorCode {
    pub fn from_code(code: u16) -> Option<ErrorCode> {
        use ErrorCode::*;
        [
            Malformed,
            TimeRegression,
            UnknownEntity,
            UnknownLink,
            BadParam,
            Unexpected,
            InvalidValue,
            StaleSeq,
            Internal,
        ]
        .into_iter()
        .find(|c| *c as u16 == code)
    }
}

fn engine_error_code(e: &EngineError) -> ErrorCode {
    match e {
        EngineError::TimeRegression { .. } => ErrorCode::TimeRegression,
        EngineError::UnknownEntity(_) => ErrorCode::UnknownEntity,
        EngineError::UnknownLink(..) => ErrorCode::UnknownLink,
        EngineError::UnknownParam(_) | EngineError::InvalidParam { .. } => ErrorCode::BadParam,
        EngineError::NonFiniteTime(_) | EngineError::NonFiniteState => ErrorCode::InvalidValue,
        EngineError::SceneMismatch => ErrorCode::Internal,
    }
}

fn error_text(e: &EngineError) -> String {
    match e {
        EngineError::TimeRegression { .. } => format!("time regression: {e}"),
        other => other.to_string(),
    }
}

/// Request handler owning the engine. Transport-free so it can be driven directly.
pub struct EngineService {
    engine: Engine,
    cache: VecDeque<CacheEntry>,
    last_seq: HashMap<SocketAddr, u32>,
    next_seq: u32,
    shut_down: bool,
}

impl EngineService {
    pub fn new(engine: Engine) -> Self {
        EngineService {
            engine,
            cache: VecDeque::with_capacity(REPLY_CACHE_CAPACITY),
            last_seq: HashMap::new(),
            next_seq: 1,
            shut_down: false,
        }
    }

    pub fn engine(&self) -> &Engine {
        &self.engine
    }

    pub fn into_engine(self) -> Engine {
        self.engine
    }

    pub fn is_shut_down(&self) -> bool {
        self.shut_down
    }

    fn seq(&mut self) -> u32 {
        let s = self.next_seq;
        self.next_seq = self.next_seq.wrapping_add(1);
        s
    }

    fn reply(&mut self, msg: Message) -> Vec<u8> {
        let seq = self.seq();
        encode(&Packet::new(seq, msg)).unwrap_or_else(|e| {
            let text = format!("reply could not be encoded: {e}");
            let fallback = Message::Error {
                of_seq: 0,
                code: ErrorCode::Internal as u16,
                text,
            };
            encode(&Packet::new(seq, fallback)).expect("short error encodes")
        })
    }

    fn error(&mut self, of_seq: u32, code: ErrorCode, text: impl Into<String>) -> Vec<u8> {
        let mut text: String = text.into();
        text.truncate(1000);
        self.reply(Message::Error {
            of_seq,
            code: code as u16,
            text,
        })
    }

    fn cached(&mut self, key: (SocketAddr, u32)) -> Option<Vec<Vec<u8>>> {
        let i = self.cache.iter().position(|(k, _)| *k == key)?;
        let entry = self.cache.remove(i).expect("index valid");
        let replies = entry.1.clone();
        self.cache.push_back(entry);
        Some(replies)
    }

    fn remember(&mut self, key: (SocketAddr, u32), replies: &[Vec<u8>]) {
        if self.cache.len() >= REPLY_CACHE_CAPACITY {
            self.cache.pop_front();
        }
        self.cache.push_back((key, replies.to_vec()));
    }

    /// Handles one datagram from `peer` and returns the datagrams to send back.
    pub fn handle(&mut self, peer: SocketAddr, datagram: &[u8]) -> Vec<Vec<u8>> {
        let packet = match decode(datagram) {
            Ok(p) => p,
            Err(e) => {
                let of_seq = decode_header(datagram).map(|h| h.seq).unwrap_or(0);
                return vec![self.error(of_seq, ErrorCode::Malformed, e.to_string())];
            }
        };
        let key = (peer, packet.seq);
        if matches!(packet.msg, Message::Hello) {
            // A Hello starts a new session for this sender.
            self.cache.retain(|((addr, _), _)| *addr != peer);
            self.last_seq.insert(peer, packet.seq);
            return vec![self.reply(Message::HelloAck)];
        }
        if let Some(replies) = self.cached(key) {
            return replies;
        }
        if let Some(&last) = self.last_seq.get(&peer) {
            if packet.seq <= last {
                return vec![self.error(packet.seq, ErrorCode::StaleSeq, "sequence number already handled")];
            }
        }
        let replies = self.dispatch(packet.seq, packet.msg);
        self.last_seq.insert(peer, packet.seq);
        self.remember(key, &replies);
        replies
    }

    fn dispatch(&mut self, seq: u32, msg: Message) -> Vec<Vec<u8>> {
        match msg {
            Message::StepTo { time } => match self.engine.step_to(time) {
                Ok(()) => vec![self.reply(Message::StepDone { time })],
                Err(e) => vec![self.error(seq, engine_error_code(&e), error_text(&e))],
            },
            Message::SetPosition {
                entity_id,
                position,
                velocity,
            } => {
                let p = Vec3::new(position[0], position[1], position[2]);
                let v = Vec3::new(velocity[0], velocity[1], velocity[2]);
                match self.engine.set_position(entity_id, p, v) {
                    Ok(()) => vec![self.reply(Message::Ack { of_seq: seq })],
                    Err(e) => vec![self.error(seq, engine_error_code(&e), error_text(&e))],
                }
            }
            Message::SetParam { key, value } => match self.engine.set_param(&key, value) {
                Ok(()) => vec![self.reply(Message::Ack { of_seq: seq })],
                Err(e) => vec![self.error(seq, engine_error_code(&e), error_text(&e))],
            },
            Message::GetChannel { tx_id, rx_id } => match self.engine.channel(tx_id, rx_id) {
                Ok(h) => self.channel_replies(seq, &h),
                Err(e) => vec![self.error(seq, engine_error_code(&e), error_text(&e))],
            },
            Message::GetPositions => {
                let states = self
                    .engine
                    .entities()
                    .iter()
                    .map(|e| EntityState {
                        id: e.id,
                        kind: e.kind.code(),
                        position: [e.position.x, e.position.y, e.position.z],
                        velocity: [e.velocity.x, e.velocity.y, e.velocity.z],
                    })
                    .collect();
                vec![self.reply(Message::Positions(states))]
            }
            Message::Shutdown => {
                self.shut_down = true;
                vec![self.reply(Message::Ack { of_seq: seq })]
            }
            other => {
                let text = format!("{:?} is not a request", other.msg_type());
                vec![self.error(seq, ErrorCode::Unexpected, text)]
            }
        }
    }

    fn channel_replies(&mut self, seq: u32, h: &lusim_core::channel::ChannelRealization) -> Vec<Vec<u8>> {
        let payload = match ChannelDataPayload::from_realization(h) {
            Ok(p) => p.encode(),
            Err(e) => return vec![self.error(seq, ErrorCode::Internal, e.to_string())],
        };
        let chunks = match chunk_payload(&payload) {
            Ok(c) => c,
            Err(e) => return vec![self.error(seq, ErrorCode::Internal, e.to_string())],
        };
        let total = chunks.len() as u16;
        chunks
            .into_iter()
            .enumerate()
            .map(|(i, chunk)| {
                self.reply(Message::ChannelData {
                    chunk_index: i as u16,
                    chunk_total: total,
                    payload: chunk.to_vec(),
                })
            })
            .collect()
    }
}

/// Serves requests on `socket` one at a time until a `Shutdown` is handled.
pub fn serve(service: &mut EngineService, socket: &UdpSocket) -> io::Result<()> {
    let mut buf = vec![0u8; 65_536];
    while !service.is_shut_down() {
        let (n, peer) = match socket.recv_from(&mut buf) {
            Ok(r) => r,
            Err(e) if matches!(e.kind(), io::ErrorKind::WouldBlock | io::ErrorKind::TimedOut) => continue,
            // ICMP port-unreachable from an earlier reply surfaces here on some platforms.
            Err(e) if e.kind() == io::ErrorKind::ConnectionReset => continue,
            Err(e) => return Err(e),
        };
        for reply in service.handle(peer, &buf[..n]) {
            if let Err(e) = socket.send_to(&reply, peer) {
                if e.kind() != io::ErrorKind::ConnectionReset {
                    return Err(e);
                }
            }
        }
    }
    Ok(())
}
