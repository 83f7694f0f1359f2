//! Datagram codec.
//!
//! Every datagram is a 16-byte little-endian header (`"LUSM"`, version,
//! message type, sequence number, body length) followed by the body. Decoding
//! is total: any byte string yields either a message or a typed error, and the
//! decoder never indexes past the buffer.

use thiserror::Error;

pub const MAGIC: [u8; 4] = *b"LUSM";
pub const VERSION: u16 = 1;
pub const HEADER_LEN: usize = 16;
/// Upper bound on a whole datagram, header included.
pub const MAX_DATAGRAM: usize = 60_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u16)]
pub enum MsgType {
    Hello = 1,
    HelloAck = 2,
    StepTo = 3,
    StepDone = 4,
    SetPosition = 5,
    GetChannel = 6,
    ChannelData = 7,
    GetPositions = 8,
    Positions = 9,
    SetParam = 10,
    Ack = 11,
    Error = 12,
    Shutdown = 13,
}

impl MsgType {
    pub fn from_code(code: u16) -> Option<MsgType> {
        use MsgType::*;
        Some(match code {
            1 => Hello,
            2 => HelloAck,
            3 => StepTo,
            4 => StepDone,
            5 => SetPosition,
            6 => GetChannel,
            7 => ChannelData,
            8 => GetPositions,
            9 => Positions,
            10 => SetParam,
            11 => Ack,
            12 => Error,
            13 => Shutdown,
            _ => return None,
        })
    }
}

/// One entity in a `Positions` reply.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntityState {
    pub id: u32,
    /// 0 = BS, 1 = UE.
    pub kind: u8,
    pub position: [f64; 3],
    pub velocity: [f64; 3],
}

const ENTITY_STATE_LEN: usize = 4 + 1 + 48;

#[derive(Debug, Clone, PartialEq)]
pub enum Message {
    Hello,
    HelloAck,
    /// Seconds.
    StepTo {
        time: f64,
    },
    StepDone {
        time: f64,
    },
    SetPosition {
        entity_id: u32,
        position: [f64; 3],
        velocity: [f64; 3],
    },
    GetChannel {
        tx_id: u32,
        rx_id: u32,
    },
    ChannelData {
        chunk_index: u16,
        chunk_total: u16,
        payload: Vec<u8>,
    },
    GetPositions,
    Positions(Vec<EntityState>),
    SetParam {
        key: String,
        value: f64,
    },
    Ack {
        of_seq: u32,
    },
    Error {
        of_seq: u32,
        code: u16,
        text: String,
    },
    Shutdown,
}

impl Message {
    pub fn msg_type(&self) -> MsgType {
        match self {
            Message::Hello => MsgType::Hello,
            Message::HelloAck => MsgType::HelloAck,
            Message::StepTo { .. } => MsgType::StepTo,
            Message::StepDone { .. } => MsgType::StepDone,
            Message::SetPosition { .. } => MsgType::SetPosition,
            Message::GetChannel { .. } => MsgType::GetChannel,
            Message::ChannelData { .. } => MsgType::ChannelData,
            Message::GetPositions => MsgType::GetPositions,
            Message::Positions(_) => MsgType::Positions,
            Message::SetParam { .. } => MsgType::SetParam,
            Message::Ack { .. } => MsgType::Ack,
            Message::Error { .. } => MsgType::Error,
            Message::Shutdown => MsgType::Shutdown,
        }
    }
}

/// A message with its sender-assigned sequence number.
#[derive(Debug, Clone, PartialEq)]
pub struct Packet {
    pub seq: u32,
    pub msg: Message,
}

impl Packet {
    pub fn new(seq: u32, msg: Message) -> Self {
        Packet { seq, msg }
    }
}

/// The fixed header, readable even when the body is malformed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Header {
    pub msg_type: u16,
    pub seq: u32,
    pub body_len: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecodeError {
    #[error("bad magic")]
    BadMagic,
    #[error("unsupported protocol version {0}")]
    BadVersion(u16),
    #[error("truncated: need {needed} bytes, have {available}")]
    Truncated { needed: usize, available: usize },
    #[error("body length {declared} does not match the {actual} bytes received")]
    BodyLenMismatch { declared: u32, actual: usize },
    #[error("datagram of {0} bytes exceeds the limit")]
    Oversize(usize),
    #[error("unknown message type {0}")]
    UnknownType(u16),
    #[error("malformed {msg_type:?} body: {reason}")]
    BadBody { msg_type: MsgType, reason: &'static str },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EncodeError {
    #[error("encoded datagram would be {0} bytes")]
    TooLarge(usize),
    #[error("string field of {0} bytes does not fit a u16 length")]
    FieldTooLong(usize),
}

/// Parses the header only; does not check the body.
pub fn decode_header(bytes: &[u8]) -> Result<Header, DecodeError> {
    if bytes.len() < HEADER_LEN {
        // Report a wrong magic before a short read when enough bytes exist to tell.
        if bytes.len() >= 4 && bytes[..4] != MAGIC {
            return Err(DecodeError::BadMagic);
        }
        return Err(DecodeError::Truncated {
            needed: HEADER_LEN,
            available: bytes.len(),
        });
    }
    if bytes[..4] != MAGIC {
        return Err(DecodeError::BadMagic);
    }
    let version = u16::from_le_bytes([bytes[4], bytes[5]]);
    if version != VERSION {
        return Err(DecodeError::BadVersion(version));
    }
    Ok(Header {
        msg_type: u16::from_le_bytes([bytes[6], bytes[7]]),
        seq: u32::from_le_bytes([bytes[8], bytes[9], bytes[10], bytes[11]]),
        body_len: u32::from_le_bytes([bytes[12], bytes[13], bytes[14], bytes[15]]),
    })
}

pub fn encode(packet: &Packet) -> Result<Vec<u8>, EncodeError> {
    let mut body = Vec::new();
    match &packet.msg {
        Message::Hello | Message::HelloAck | Message::GetPositions | Message::Shutdown => {}
        Message::StepTo { time } | Message::StepDone { time } => body.extend_from_slice(&time.to_le_bytes()),
        Message::SetPosition {
            entity_id,
            position,
            velocity,
        } => {
            body.extend_from_slice(&entity_id.to_le_bytes());
            for v in position.iter().chain(velocity) {
                body.extend_from_slice(&v.to_le_bytes());
            }
        }
        Message::GetChannel { tx_id, rx_id } => {
            body.extend_from_slice(&tx_id.to_le_bytes());
            body.extend_from_slice(&rx_id.to_le_bytes());
        }
        Message::ChannelData {
            chunk_index,
            chunk_total,
            payload,
        } => {
            body.extend_from_slice(&chunk_index.to_le_bytes());
            body.extend_from_slice(&chunk_total.to_le_bytes());
            body.extend_from_slice(payload);
        }
        Message::Positions(states) => {
            body.extend_from_slice(&(states.len() as u32).to_le_bytes());
            for s in states {
                body.extend_from_slice(&s.id.to_le_bytes());
                body.push(s.kind);
                for v in s.position.iter().chain(&s.velocity) {
                    body.extend_from_slice(&v.to_le_bytes());
                }
            }
        }
        Message::SetParam { key, value } => {
            put_str(&mut body, key)?;
            body.extend_from_slice(&value.to_le_bytes());
        }
        Message::Ack { of_seq } => body.extend_from_slice(&of_seq.to_le_bytes()),
        Message::Error { of_seq, code, text } => {
            body.extend_from_slice(&of_seq.to_le_bytes());
            body.extend_from_slice(&code.to_le_bytes());
            put_str(&mut body, text)?;
        }
    }
    let total = HEADER_LEN + body.len();
    if total > MAX_DATAGRAM {
        return Err(EncodeError::TooLarge(total));
    }
    let mut out = Vec::with_capacity(total);
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(packet.msg.msg_type() as u16).to_le_bytes());
    out.extend_from_slice(&packet.seq.to_le_bytes());
    out.extend_from_slice(&(body.len() as u32).to_le_bytes());
    out.extend_from_slice(&body);
    Ok(out)
}

fn put_str(body: &mut Vec<u8>, s: &str) -> Result<(), EncodeError> {
    let len = u16::try_from(s.len()).map_err(|_| EncodeError::FieldTooLong(s.len()))?;
    body.extend_from_slice(&len.to_le_bytes());
    body.extend_from_slice(s.as_bytes());
    Ok(())
}

/// Bounds-checked reader over a message body.
struct Body<'a> {
    bytes: &'a [u8],
    msg_type: MsgType,
}

impl<'a> Body<'a> {
    fn err(&self, reason: &'static str) -> DecodeError {
        DecodeError::BadBody {
            msg_type: self.msg_type,
            reason,
        }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], DecodeError> {
        if self.bytes.len() < n {
            return Err(self.err("body too short"));
        }
        let (head, rest) = self.bytes.split_at(n);
        self.bytes = rest;
        Ok(head)
    }

    fn u8(&mut self) -> Result<u8, DecodeError> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16, DecodeError> {
        let b = self.take(2)?;
        Ok(u16::from_le_bytes([b[0], b[1]]))
    }

    fn u32(&mut self) -> Result<u32, DecodeError> {
        let b = self.take(4)?;
        Ok(u32::from_le_bytes(b.try_into().expect("4 bytes")))
    }

    fn f64(&mut self) -> Result<f64, DecodeError> {
        let b = self.take(8)?;
        Ok(f64::from_le_bytes(b.try_into().expect("8 bytes")))
    }

    fn vec3(&mut self) -> Result<[f64; 3], DecodeError> {
        Ok([self.f64()?, self.f64()?, self.f64()?])
    }

    fn string(&mut self) -> Result<String, DecodeError> {
        let len = self.u16()? as usize;
        let raw = self.take(len)?;
        std::str::from_utf8(raw)
            .map(str::to_string)
            .map_err(|_| self.err("string is not UTF-8"))
    }

    fn finish(self) -> Result<(), DecodeError> {
        if self.bytes.is_empty() {
            Ok(())
        } else {
            Err(self.err("trailing bytes"))
        }
    }
}

pub fn decode(bytes: &[u8]) -> Result<Packet, DecodeError> {
    if bytes.len() > MAX_DATAGRAM {
        return Err(DecodeError::Oversize(bytes.len()));
    }
    let header = decode_header(bytes)?;
    let actual = bytes.len() - HEADER_LEN;
    if header.body_len as usize != actual {
        return Err(DecodeError::BodyLenMismatch {
            declared: header.body_len,
            actual,
        });
    }
    let msg_type = MsgType::from_code(header.msg_type).ok_or(DecodeError::UnknownType(header.msg_type))?;
    let mut b = Body {
        bytes: &bytes[HEADER_LEN..],
        msg_type,
    };
    let msg = match msg_type {
        MsgType::Hello => Message::Hello,
        MsgType::HelloAck => Message::HelloAck,
        MsgType::GetPositions => Message::GetPositions,
        MsgType::Shutdown => Message::Shutdown,
        MsgType::StepTo => Message::StepTo { time: b.f64()? },
        MsgType::StepDone => Message::StepDone { time: b.f64()? },
        MsgType::SetPosition => Message::SetPosition {
            entity_id: b.u32()?,
            position: b.vec3()?,
            velocity: b.vec3()?,
        },
        MsgType::GetChannel => Message::GetChannel {
            tx_id: b.u32()?,
            rx_id: b.u32()?,
        },
        MsgType::ChannelData => {
            let chunk_index = b.u16()?;
            let chunk_total = b.u16()?;
            if chunk_total == 0 || chunk_index >= chunk_total {
                return Err(b.err("chunk index out of range"));
            }
            let payload = b.take(b.bytes.len())?.to_vec();
            Message::ChannelData {
                chunk_index,
                chunk_total,
                payload,
            }
        }
        MsgType::Positions => {
            let count = b.u32()? as usize;
            if b.bytes.len() != count.saturating_mul(ENTITY_STATE_LEN) {
                return Err(b.err("entity count does not match body length"));
            }
            let mut states = Vec::with_capacity(count);
            for _ in 0..count {
                states.push(EntityState {
                    id: b.u32()?,
                    kind: b.u8()?,
                    position: b.vec3()?,
                    velocity: b.vec3()?,
                });
            }
            Message::Positions(states)
        }
        MsgType::SetParam => Message::SetParam {
            key: b.string()?,
            value: b.f64()?,
        },
        MsgType::Ack => Message::Ack { of_seq: b.u32()? },
        MsgType::Error => Message::Error {
            of_seq: b.u32()?,
            code: b.u16()?,
            text: b.string()?,
        },
    };
    b.finish()?;
    Ok(Packet { seq: header.seq, msg })
}
