use lusim_link::codec::{decode, encode, DecodeError, EntityState, Message, Packet, HEADER_LEN, MAX_DATAGRAM};
use lusim_link::payload::{chunk_payload, ChannelDataPayload, Reassembler, CHUNK_PAYLOAD_MAX};
use num_complex::Complex32;
use proptest::prelude::*;
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn samples() -> Vec<Message> {
    vec![
        Message::Hello,
        Message::HelloAck,
        Message::StepTo { time: 0.1 },
        Message::StepDone { time: 12.5 },
        Message::SetPosition {
            entity_id: 7,
            position: [1.0, -2.0, 1.5],
            velocity: [0.5, 0.0, 0.0],
        },
        Message::GetChannel { tx_id: 0, rx_id: 4 },
        Message::ChannelData {
            chunk_index: 1,
            chunk_total: 3,
            payload: (0..200u8).collect(),
        },
        Message::GetPositions,
        Message::Positions(vec![
            EntityState {
                id: 0,
                kind: 0,
                position: [0.0, 1.0, 10.0],
                velocity: [0.0; 3],
            },
            EntityState {
                id: 4,
                kind: 1,
                position: [-3.0, 1.0, 1.5],
                velocity: [1.2, 0.0, 0.0],
            },
        ]),
        Message::SetParam {
            key: "tx_power".into(),
            value: 2.0,
        },
        Message::Ack { of_seq: 99 },
        Message::Error {
            of_seq: 5,
            code: 2,
            text: "time regression".into(),
        },
        Message::Shutdown,
    ]
}

#[test]
fn every_message_type_round_trips() {
    for (i, msg) in samples().into_iter().enumerate() {
        let p = Packet::new(i as u32 + 1, msg);
        let bytes = encode(&p).unwrap();
        assert_eq!(
            u32::from_le_bytes(bytes[12..16].try_into().unwrap()) as usize,
            bytes.len() - HEADER_LEN
        );
        assert_eq!(decode(&bytes).unwrap(), p);
    }
}

#[test]
fn every_truncation_of_a_valid_datagram_is_rejected() {
    for msg in samples() {
        let bytes = encode(&Packet::new(3, msg)).unwrap();
        for cut in 0..bytes.len() {
            assert!(decode(&bytes[..cut]).is_err(), "prefix of {cut} bytes decoded");
        }
    }
}

#[test]
fn fuzz_decode_is_total() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xF022);
    let valid: Vec<Vec<u8>> = samples()
        .into_iter()
        .enumerate()
        .map(|(i, m)| encode(&Packet::new(i as u32, m)).unwrap())
        .collect();
    let (mut ok, mut err) = (0usize, 0usize);
    for k in 0..100_000 {
        let buf: Vec<u8> = match k % 4 {
            0 => {
                let n = rng.random_range(0..128);
                (0..n).map(|_| rng.random()).collect()
            }
            1 => {
                // Valid header, random body and length field.
                let mut b = valid.choose(&mut rng).unwrap()[..HEADER_LEN].to_vec();
                let n = rng.random_range(0..96);
                if rng.random_bool(0.5) {
                    b[12..16].copy_from_slice(&(n as u32).to_le_bytes());
                }
                b[6] = rng.random_range(0..16);
                b.extend((0..n).map(|_| rng.random::<u8>()));
                b
            }
            2 => {
                let mut b = valid.choose(&mut rng).unwrap().clone();
                for _ in 0..rng.random_range(1..4) {
                    let i = rng.random_range(0..b.len());
                    b[i] = rng.random();
                }
                b
            }
            _ => {
                let b = valid.choose(&mut rng).unwrap();
                let cut = rng.random_range(0..=b.len());
                b[..cut].to_vec()
            }
        };
        match decode(&buf) {
            Ok(p) => {
                // Decoding is canonical: re-encoding gives back the same bytes.
                assert_eq!(encode(&p).unwrap(), buf);
                ok += 1;
            }
            Err(_) => err += 1,
        }
    }
    assert!(ok > 1000 && err > 1000, "ok {ok} err {err}");
}

#[test]
fn malformed_bodies_name_the_problem() {
    let mut b = encode(&Packet::new(
        1,
        Message::SetParam {
            key: "tx_power".into(),
            value: 1.0,
        },
    ))
    .unwrap();
    b[HEADER_LEN + 2] = 0xFF;
    assert!(matches!(decode(&b), Err(DecodeError::BadBody { .. })));

    let mut bad_chunk = encode(&Packet::new(
        1,
        Message::ChannelData {
            chunk_index: 0,
            chunk_total: 1,
            payload: vec![],
        },
    ))
    .unwrap();
    bad_chunk[HEADER_LEN] = 5;
    assert!(matches!(decode(&bad_chunk), Err(DecodeError::BadBody { .. })));
    assert_eq!(
        decode(&[0u8; 3]),
        Err(DecodeError::Truncated {
            needed: 16,
            available: 3
        })
    );
}

fn big_payload() -> ChannelDataPayload {
    let (rx, tx, bins) = (4u16, 64u16, 1024u32);
    let n = rx as usize * tx as usize * bins as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    ChannelDataPayload {
        tx_id: 3,
        rx_id: 9,
        timestamp: 0.7,
        rx_ant: rx,
        tx_ant: tx,
        n_bins: bins,
        values: (0..n)
            .map(|_| Complex32::new(rng.random::<f32>() - 0.5, rng.random::<f32>() - 0.5))
            .collect(),
    }
}

#[test]
fn large_realization_chunks_and_reassembles_bit_exact() {
    let payload = big_payload();
    let bytes = payload.encode();
    assert_eq!(bytes.len(), 24 + 8 * 4 * 64 * 1024);
    let chunks = chunk_payload(&bytes).unwrap();
    assert_eq!(chunks.len(), bytes.len().div_ceil(CHUNK_PAYLOAD_MAX));
    let datagrams: Vec<Vec<u8>> = chunks
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let d = encode(&Packet::new(
                1000 + i as u32,
                Message::ChannelData {
                    chunk_index: i as u16,
                    chunk_total: chunks.len() as u16,
                    payload: c.to_vec(),
                },
            ))
            .unwrap();
            assert!(d.len() <= MAX_DATAGRAM);
            d
        })
        .collect();

    // Shuffled, with duplicates, as a lossy-but-retrying transport would deliver them.
    let mut order: Vec<usize> = (0..datagrams.len()).chain([0, 5, 17]).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(2));
    let mut r = Reassembler::new();
    let mut out = None;
    for i in order {
        let p = decode(&datagrams[i]).unwrap();
        if let Message::ChannelData {
            chunk_index,
            chunk_total,
            payload,
        } = p.msg
        {
            if let Some(whole) = r.offer(p.seq, chunk_index, chunk_total, &payload) {
                assert!(out.is_none(), "completed twice");
                out = Some(whole);
            }
        }
    }
    let whole = out.expect("reassembled");
    assert_eq!(whole, bytes);
    let back = ChannelDataPayload::decode(&whole).unwrap();
    assert!(back
        .values
        .iter()
        .zip(&payload.values)
        .all(|(a, b)| a.re.to_bits() == b.re.to_bits() && a.im.to_bits() == b.im.to_bits()));
    assert_eq!(back, payload);
    assert_eq!(r.pending(), 0);
}

#[test]
fn payload_length_must_match_shape() {
    let mut bytes = ChannelDataPayload {
        tx_id: 0,
        rx_id: 1,
        timestamp: 0.0,
        rx_ant: 1,
        tx_ant: 1,
        n_bins: 2,
        values: vec![Complex32::new(1.0, 0.0); 2],
    }
    .encode();
    assert_eq!(bytes.len(), 24 + 16);
    bytes.pop();
    assert!(ChannelDataPayload::decode(&bytes).is_err());
    assert!(ChannelDataPayload::decode(&bytes[..10]).is_err());
}

fn arb_message() -> impl Strategy<Value = Message> {
    let v3 = || prop::array::uniform3(any::<f64>());
    prop_oneof![
        Just(Message::Hello),
        Just(Message::Shutdown),
        any::<f64>().prop_map(|time| Message::StepTo { time }),
        (any::<u32>(), v3(), v3()).prop_map(|(entity_id, position, velocity)| Message::SetPosition {
            entity_id,
            position,
            velocity
        }),
        (1u16..50)
            .prop_flat_map(|t| (0..t, Just(t), prop::collection::vec(any::<u8>(), 0..300)))
            .prop_map(|(chunk_index, chunk_total, payload)| Message::ChannelData {
                chunk_index,
                chunk_total,
                payload
            }),
        ("[a-z_]{0,20}", any::<f64>()).prop_map(|(key, value)| Message::SetParam { key, value }),
        (any::<u32>(), any::<u16>(), ".{0,40}").prop_map(|(of_seq, code, text)| Message::Error { of_seq, code, text }),
        prop::collection::vec(
            (any::<u32>(), 0u8..2, v3(), v3()).prop_map(|(id, kind, position, velocity)| EntityState {
                id,
                kind,
                position,
                velocity
            }),
            0..20
        )
        .prop_map(Message::Positions),
    ]
}

proptest! {
    #[test]
    fn encode_then_decode_is_identity_on_bytes(seq in any::<u32>(), msg in arb_message()) {
        let bytes = encode(&Packet::new(seq, msg)).unwrap();
        let back = decode(&bytes).unwrap();
        // Compare through bytes so NaN payloads count as equal.
        prop_assert_eq!(encode(&back).unwrap(), bytes);
    }
}
