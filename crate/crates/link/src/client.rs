//! Synchronous request/reply client for the engine protocol.

use std::io;
use std::net::{SocketAddr, UdpSocket};
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::codec::{decode, encode, EncodeError, EntityState, Message, Packet};
use crate::payload::{ChannelDataPayload, PayloadError, Reassembler};

#[derive(Debug, Error)]
pub enum ClientError {
    #[error("socket: {0}")]
    Io(#[from] io::Error),
    #[error("no reply after {attempts} attempts")]
    Timeout { attempts: u32 },
    #[error("engine replied error {code}: {text}")]
    Remote { code: u16, text: String },
    #[error(transparent)]
    Encode(#[from] EncodeError),
    #[error(transparent)]
    Payload(#[from] PayloadError),
}

impl ClientError {
    pub fn remote_code(&self) -> Option<u16> {
        match self {
            ClientError::Remote { code, .. } => Some(*code),
            _ => None,
        }
    }
}

enum Verdict<T> {
    Done(T),
    Ignore,
}

pub struct EngineClient {
    socket: UdpSocket,
    server: SocketAddr,
    next_seq: u32,
    timeout: Duration,
    attempts: u32,
    chunks: Reassembler,
    /// Datagrams received that did not complete the pending request.
    pub ignored: u64,
}

impl EngineClient {
    /// Binds an ephemeral local port and performs the Hello exchange.
    pub fn connect(server: SocketAddr) -> Result<Self, ClientError> {
        let local: SocketAddr = if server.is_ipv4() {
            ([0, 0, 0, 0], 0).into()
        } else {
            (std::net::Ipv6Addr::UNSPECIFIED, 0).into()
        };
        let socket = UdpSocket::bind(local)?;
        let mut client = EngineClient {
            socket,
            server,
            next_seq: 1,
            timeout: Duration::from_millis(250),
            attempts: 8,
            chunks: Reassembler::new(),
            ignored: 0,
        };
        client.hello()?;
        Ok(client)
    }

    /// Per-attempt reply timeout and the number of sends before giving up.
    pub fn with_retries(mut self, timeout: Duration, attempts: u32) -> Self {
        self.timeout = timeout;
        self.attempts = attempts.max(1);
        self
    }

    pub fn server(&self) -> SocketAddr {
        self.server
    }

    pub fn local_addr(&self) -> io::Result<SocketAddr> {
        self.socket.local_addr()
    }

    fn exchange<T>(
        &mut self,
        msg: Message,
        mut accept: impl FnMut(&mut Self, u32, Packet) -> Result<Verdict<T>, ClientError>,
    ) -> Result<T, ClientError> {
        let seq = self.next_seq;
        self.next_seq = self.next_seq.wrapping_add(1);
        let bytes = encode(&Packet::new(seq, msg))?;
        let mut buf = vec![0u8; 65_536];
        for _ in 0..self.attempts {
            self.socket.send_to(&bytes, self.server)?;
            let deadline = Instant::now() + self.timeout;
            loop {
                let left = deadline.saturating_duration_since(Instant::now());
                if left.is_zero() {
                    break;
                }
                self.socket.set_read_timeout(Some(left))?;
                let (n, from) = match self.socket.recv_from(&mut buf) {
                    Ok(r) => r,
                    Err(e) if matches!(e.kind(), io::ErrorKind::WouldBlock | io::ErrorKind::TimedOut) => break,
                    Err(e) if e.kind() == io::ErrorKind::ConnectionReset => break,
                    Err(e) => return Err(e.into()),
                };
                if from != self.server {
                    self.ignored += 1;
                    continue;
                }
                let packet = match decode(&buf[..n]) {
                    Ok(p) => p,
                    Err(_) => {
                        self.ignored += 1;
                        continue;
                    }
                };
                if let Message::Error { of_seq, code, text } = &packet.msg {
                    if *of_seq == seq {
                        return Err(ClientError::Remote {
                            code: *code,
                            text: text.clone(),
                        });
                    }
                }
                match accept(self, seq, packet)? {
                    Verdict::Done(v) => return Ok(v),
                    Verdict::Ignore => self.ignored += 1,
                }
            }
        }
        Err(ClientError::Timeout {
            attempts: self.attempts,
        })
    }

    fn wait_ack(&mut self, msg: Message) -> Result<(), ClientError> {
        self.exchange(msg, |_, seq, p| {
            Ok(match p.msg {
                Message::Ack { of_seq } if of_seq == seq => Verdict::Done(()),
                _ => Verdict::Ignore,
            })
        })
    }

    pub fn hello(&mut self) -> Result<(), ClientError> {
        self.exchange(Message::Hello, |_, _, p| {
            Ok(match p.msg {
                Message::HelloAck => Verdict::Done(()),
                _ => Verdict::Ignore,
            })
        })
    }

    /// Blocks until the engine confirms the step.
    pub fn step_to(&mut self, time: f64) -> Result<f64, ClientError> {
        self.exchange(Message::StepTo { time }, |_, _, p| {
            Ok(match p.msg {
                Message::StepDone { time: t } if t.to_bits() == time.to_bits() => Verdict::Done(t),
                _ => Verdict::Ignore,
            })
        })
    }

    pub fn set_position(&mut self, entity_id: u32, position: [f64; 3], velocity: [f64; 3]) -> Result<(), ClientError> {
        self.wait_ack(Message::SetPosition {
            entity_id,
            position,
            velocity,
        })
    }

    pub fn set_param(&mut self, key: &str, value: f64) -> Result<(), ClientError> {
        self.wait_ack(Message::SetParam {
            key: key.to_string(),
            value,
        })
    }

    pub fn get_positions(&mut self) -> Result<Vec<EntityState>, ClientError> {
        self.exchange(Message::GetPositions, |_, _, p| {
            Ok(match p.msg {
                Message::Positions(s) => Verdict::Done(s),
                _ => Verdict::Ignore,
            })
        })
    }

    /// Fetches and reassembles the realization of `tx → rx` at the engine's current time.
    pub fn get_channel(&mut self, tx_id: u32, rx_id: u32) -> Result<ChannelDataPayload, ClientError> {
        self.exchange(Message::GetChannel { tx_id, rx_id }, |c, _, p| {
            let Message::ChannelData {
                chunk_index,
                chunk_total,
                payload,
            } = p.msg
            else {
                return Ok(Verdict::Ignore);
            };
            let Some(whole) = c.chunks.offer(p.seq, chunk_index, chunk_total, &payload) else {
                return Ok(Verdict::Ignore);
            };
            let data = ChannelDataPayload::decode(&whole)?;
            Ok(if data.tx_id == tx_id && data.rx_id == rx_id {
                Verdict::Done(data)
            } else {
                Verdict::Ignore
            })
        })
    }

    pub fn shutdown(&mut self) -> Result<(), ClientError> {
        self.wait_ack(Message::Shutdown)
    }
}
