mod common;

use std::net::{SocketAddr, UdpSocket};
use std::thread;
use std::time::Duration;

use lusim_core::channel::synthesize_channel;
use lusim_link::codec::{decode, encode, Message, Packet};
use lusim_link::payload::{ChannelDataPayload, Reassembler};
use lusim_link::service::{serve, EngineService, ErrorCode, REPLY_CACHE_CAPACITY};
use lusim_link::{ClientError, EngineClient};

fn peer(port: u16) -> SocketAddr {
    SocketAddr::from(([127, 0, 0, 1], port))
}

fn send(svc: &mut EngineService, from: SocketAddr, seq: u32, msg: Message) -> Vec<Packet> {
    let bytes = encode(&Packet::new(seq, msg)).unwrap();
    svc.handle(from, &bytes).iter().map(|d| decode(d).unwrap()).collect()
}

fn channel_of(replies: &[Packet]) -> ChannelDataPayload {
    let mut r = Reassembler::new();
    for p in replies {
        if let Message::ChannelData {
            chunk_index,
            chunk_total,
            payload,
        } = &p.msg
        {
            if let Some(whole) = r.offer(p.seq, *chunk_index, *chunk_total, payload) {
                return ChannelDataPayload::decode(&whole).unwrap();
            }
        }
    }
    panic!("no complete ChannelData in {replies:?}");
}

#[test]
fn step_then_channel_carries_the_step_time() {
    let mut svc = EngineService::new(common::small_engine(64));
    let a = peer(1);
    assert_eq!(send(&mut svc, a, 1, Message::Hello)[0].msg, Message::HelloAck);
    assert_eq!(
        send(&mut svc, a, 2, Message::StepTo { time: 0.1 })[0].msg,
        Message::StepDone { time: 0.1 }
    );
    let h = channel_of(&send(&mut svc, a, 3, Message::GetChannel { tx_id: 0, rx_id: 1 }));
    assert_eq!((h.tx_id, h.rx_id, h.timestamp), (0, 1, 0.1));
    assert_eq!((h.rx_ant, h.tx_ant, h.n_bins), (1, 2, 64));
    let e = svc.engine();
    let reference = synthesize_channel(
        e.paths(0, 1).unwrap(),
        e.entity(0).unwrap(),
        e.entity(1).unwrap(),
        e.mpcs(),
        e.radio(),
        e.time(),
    );
    assert_eq!(h.values.len(), reference.h.len());
    for (ours, exact) in h.values.iter().zip(&reference.h) {
        assert_eq!(ours.re, exact.re as f32);
        assert_eq!(ours.im, exact.im as f32);
    }
}

#[test]
fn duplicate_seq_retransmits_identical_bytes_without_reapplying() {
    let mut svc = EngineService::new(common::small_engine(64));
    let a = peer(1);
    let step = encode(&Packet::new(5, Message::StepTo { time: 0.3 })).unwrap();
    let first = svc.handle(a, &step);
    let changes = svc.engine().time_changes();
    // A resend after a later step must not move time back or forward.
    let later = encode(&Packet::new(6, Message::StepTo { time: 0.4 })).unwrap();
    svc.handle(a, &later);
    assert_eq!(svc.handle(a, &step), first);
    assert_eq!(svc.engine().time(), 0.4);
    assert_eq!(svc.engine().time_changes(), changes + 1);

    let get = encode(&Packet::new(7, Message::GetChannel { tx_id: 0, rx_id: 2 })).unwrap();
    let h1 = svc.handle(a, &get);
    let h2 = svc.handle(a, &get);
    assert_eq!(h1, h2);
}

#[test]
fn replies_are_cached_per_sender() {
    let mut svc = EngineService::new(common::small_engine(16));
    let (a, b) = (peer(1), peer(2));
    let ra = send(&mut svc, a, 1, Message::StepTo { time: 0.1 });
    let rb = send(&mut svc, b, 1, Message::StepTo { time: 0.2 });
    assert_eq!(ra[0].msg, Message::StepDone { time: 0.1 });
    assert_eq!(rb[0].msg, Message::StepDone { time: 0.2 });
    assert_eq!(svc.engine().time(), 0.2);
}

#[test]
fn evicted_old_seq_is_refused_not_reapplied() {
    let mut svc = EngineService::new(common::small_engine(16));
    let a = peer(1);
    for seq in 1..=(REPLY_CACHE_CAPACITY as u32 + 5) {
        send(&mut svc, a, seq, Message::StepTo { time: seq as f64 });
    }
    let t = svc.engine().time();
    let r = send(&mut svc, a, 1, Message::StepTo { time: 1.0 });
    assert!(matches!(r[0].msg, Message::Error { code, .. } if code == ErrorCode::StaleSeq as u16));
    assert_eq!(svc.engine().time(), t);
}

#[test]
fn time_regression_is_error_code_two() {
    let mut svc = EngineService::new(common::small_engine(16));
    let a = peer(1);
    send(&mut svc, a, 1, Message::StepTo { time: 0.2 });
    let r = send(&mut svc, a, 2, Message::StepTo { time: 0.1 });
    match &r[0].msg {
        Message::Error { of_seq, code, text } => {
            assert_eq!((*of_seq, *code), (2, 2));
            assert!(text.contains("time regression"));
        }
        other => panic!("expected error, got {other:?}"),
    }
    assert_eq!(svc.engine().time(), 0.2);
}

#[test]
fn bad_requests_get_errors_and_leave_state_alone() {
    let mut svc = EngineService::new(common::small_engine(16));
    let a = peer(1);
    send(&mut svc, a, 1, Message::StepTo { time: 0.5 });
    let before = svc.engine().entities().to_vec();
    let code = |r: &[Packet]| match r[0].msg {
        Message::Error { code, .. } => code,
        ref other => panic!("expected error, got {other:?}"),
    };
    let datum = |p| ErrorCode::from_code(p).unwrap();
    assert_eq!(
        datum(code(
            &svc.handle(a, b"garbage")
                .iter()
                .map(|d| decode(d).unwrap())
                .collect::<Vec<_>>()
        )),
        ErrorCode::Malformed
    );
    let r = send(
        &mut svc,
        a,
        2,
        Message::SetPosition {
            entity_id: 77,
            position: [0.0; 3],
            velocity: [0.0; 3],
        },
    );
    assert_eq!(datum(code(&r)), ErrorCode::UnknownEntity);
    let r = send(
        &mut svc,
        a,
        3,
        Message::SetPosition {
            entity_id: 1,
            position: [f64::NAN, 0.0, 0.0],
            velocity: [0.0; 3],
        },
    );
    assert_eq!(datum(code(&r)), ErrorCode::InvalidValue);
    let r = send(&mut svc, a, 4, Message::GetChannel { tx_id: 1, rx_id: 0 });
    assert_eq!(datum(code(&r)), ErrorCode::UnknownLink);
    let r = send(
        &mut svc,
        a,
        5,
        Message::SetParam {
            key: "colour".into(),
            value: 1.0,
        },
    );
    assert_eq!(datum(code(&r)), ErrorCode::BadParam);
    let r = send(&mut svc, a, 6, Message::StepDone { time: 9.0 });
    assert_eq!(datum(code(&r)), ErrorCode::Unexpected);
    let r = send(&mut svc, a, 7, Message::StepTo { time: f64::INFINITY });
    assert_eq!(datum(code(&r)), ErrorCode::InvalidValue);
    assert_eq!(svc.engine().time(), 0.5);
    svc.handle(a, &encode(&Packet::new(8, Message::StepTo { time: 0.5 })).unwrap());
    assert_eq!(svc.engine().entities(), &before[..]);
}

#[test]
fn set_position_applies_at_next_step() {
    let mut svc = EngineService::new(common::small_engine(16));
    let a = peer(1);
    let r = send(
        &mut svc,
        a,
        1,
        Message::SetPosition {
            entity_id: 2,
            position: [-20.0, 1.0, 1.5],
            velocity: [0.0; 3],
        },
    );
    assert_eq!(r[0].msg, Message::Ack { of_seq: 1 });
    let pos = |svc: &mut EngineService, seq| match send(svc, a, seq, Message::GetPositions).remove(0).msg {
        Message::Positions(s) => s.into_iter().find(|e| e.id == 2).unwrap().position,
        other => panic!("{other:?}"),
    };
    assert_eq!(pos(&mut svc, 2), [-10.0, 0.0, 1.5]);
    send(&mut svc, a, 3, Message::StepTo { time: 0.1 });
    assert_eq!(pos(&mut svc, 4), [-20.0, 1.0, 1.5]);
}

#[test]
fn udp_session_through_the_client() {
    let socket = UdpSocket::bind("127.0.0.1:0").unwrap();
    let addr = socket.local_addr().unwrap();
    let server = thread::spawn(move || {
        let mut svc = EngineService::new(common::small_engine(256));
        serve(&mut svc, &socket).unwrap();
        svc.engine().time()
    });
    let mut c = EngineClient::connect(addr)
        .unwrap()
        .with_retries(Duration::from_millis(500), 10);
    assert_eq!(c.step_to(0.1).unwrap(), 0.1);
    let h = c.get_channel(0, 1).unwrap();
    assert_eq!(h.timestamp, 0.1);
    assert_eq!(h.values.len(), 2 * 256);
    c.set_param("tx_power", 2.0).unwrap();
    assert_eq!(c.get_positions().unwrap().len(), 3);
    c.step_to(0.3).unwrap();
    let err = c.step_to(0.2).unwrap_err();
    assert!(matches!(err, ClientError::Remote { code: 2, .. }), "{err}");
    c.shutdown().unwrap();
    assert_eq!(server.join().unwrap(), 0.3);
}
