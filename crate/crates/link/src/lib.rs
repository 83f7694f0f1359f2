//! Co-simulation boundary: datagram codec, engine service, relay proxy and
//! the channel log container.

// `!(x > y)` is used on purpose so NaN falls into the rejecting branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod client;
pub mod codec;
pub mod endpoint;
pub mod log;
pub mod payload;
pub mod relay;
pub mod service;

pub use client::{ClientError, EngineClient};
pub use codec::{
    decode, decode_header, encode, DecodeError, EncodeError, EntityState, Header, Message, MsgType, Packet, HEADER_LEN,
    MAGIC, MAX_DATAGRAM, VERSION,
};
pub use endpoint::{resolve_endpoint, resolve_endpoint_from, DEFAULT_ENGINE_PORT, DEFAULT_PROXY_PORT, ENDPOINT_ENV};
pub use log::{read_all, LogError, LogPath, LogReader, LogRecord, LogWriter, LOG_MAGIC, LOG_VERSION};
pub use payload::{chunk_payload, ChannelDataPayload, PayloadError, Reassembler, CHUNK_PAYLOAD_MAX};
pub use relay::{proxy_relay, Relay, RelayCounters};
pub use service::{serve, EngineService, ErrorCode, REPLY_CACHE_CAPACITY};
