//! Two-peer datagram relay.
//!
//! The first `Hello` from an unknown address binds it to a free peer slot.
//! After that, datagrams from one peer are forwarded verbatim to the other and
//! datagrams from any other address are dropped and counted.

use std::io;
use std::net::{SocketAddr, UdpSocket};
use std::time::Duration;

use crate::codec::{decode_header, MsgType};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RelayCounters {
    pub a_to_b: u64,
    pub b_to_a: u64,
    /// From unknown sources, or from a peer whose counterpart is not bound yet.
    pub dropped: u64,
}

#[derive(Debug, Clone, Default)]
pub struct Relay {
    peers: [Option<SocketAddr>; 2],
    counters: RelayCounters,
}

fn is_type(datagram: &[u8], t: MsgType) -> bool {
    decode_header(datagram).is_ok_and(|h| h.msg_type == t as u16)
}

impl Relay {
    pub fn new() -> Self {
        Self::default()
    }

    /// A relay whose B side is fixed in advance, typically the engine.
    pub fn with_peer_b(b: SocketAddr) -> Self {
        Relay {
            peers: [None, Some(b)],
            ..Self::default()
        }
    }

    pub fn peers(&self) -> [Option<SocketAddr>; 2] {
        self.peers
    }

    pub fn counters(&self) -> RelayCounters {
        self.counters
    }

    /// Where a datagram from `src` goes, or `None` if it is dropped.
    pub fn route(&mut self, src: SocketAddr, datagram: &[u8]) -> Option<SocketAddr> {
        let side = match self.peers.iter().position(|p| *p == Some(src)) {
            Some(side) => side,
            None => {
                let free = self.peers.iter().position(Option::is_none);
                match free {
                    Some(slot) if is_type(datagram, MsgType::Hello) => {
                        self.peers[slot] = Some(src);
                        slot
                    }
                    _ => {
                        self.counters.dropped += 1;
                        return None;
                    }
                }
            }
        };
        match self.peers[1 - side] {
            Some(dest) => {
                if side == 0 {
                    self.counters.a_to_b += 1;
                } else {
                    self.counters.b_to_a += 1;
                }
                Some(dest)
            }
            None => {
                self.counters.dropped += 1;
                None
            }
        }
    }
}

/// How long the relay keeps running after forwarding a `Shutdown`, so the reply can pass back.
const SHUTDOWN_GRACE: Duration = Duration::from_millis(500);

/// Runs the relay on `socket` until a forwarded `Shutdown` has been answered
/// (or the grace period after it expires).
pub fn proxy_relay(socket: &UdpSocket, relay: &mut Relay) -> io::Result<RelayCounters> {
    let mut buf = vec![0u8; 65_536];
    let mut closing = false;
    loop {
        let (n, src) = match socket.recv_from(&mut buf) {
            Ok(r) => r,
            Err(e) if matches!(e.kind(), io::ErrorKind::WouldBlock | io::ErrorKind::TimedOut) => {
                if closing {
                    return Ok(relay.counters());
                }
                continue;
            }
            Err(e) if e.kind() == io::ErrorKind::ConnectionReset => continue,
            Err(e) => return Err(e),
        };
        let datagram = &buf[..n];
        let from_side = relay.peers.iter().position(|p| *p == Some(src));
        if let Some(dest) = relay.route(src, datagram) {
            match socket.send_to(datagram, dest) {
                Ok(_) => {}
                Err(e) if e.kind() == io::ErrorKind::ConnectionReset => {}
                Err(e) => return Err(e),
            }
            if closing && from_side.is_some() && is_type(datagram, MsgType::Ack) {
                return Ok(relay.counters());
            }
            if is_type(datagram, MsgType::Shutdown) {
                closing = true;
                socket.set_read_timeout(Some(SHUTDOWN_GRACE))?;
            }
        }
    }
}
