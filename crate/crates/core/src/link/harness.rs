//! Robustness harnesses for the stream decoder: random-byte fuzzing,
//! resynchronization trials and an enumerated round-trip sweep.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Message, StreamDecoder};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct FuzzReport {
    pub bytes_fed: u64,
    pub calls: u64,
    pub messages: u64,
    pub errors: u64,
    /// Calls where consumed + retained != previously retained + fed.
    pub conservation_violations: u64,
}

/// Feeds `total_bytes` uniformly random bytes in random chunks of 1..=64.
pub fn fuzz_decode(total_bytes: u64, seed: u64) -> FuzzReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut dec = StreamDecoder::new();
    let mut report = FuzzReport::default();
    let mut chunk = [0u8; 64];
    while report.bytes_fed < total_bytes {
        let n = rng.gen_range(1..=64).min((total_bytes - report.bytes_fed) as usize);
        rng.fill(&mut chunk[..n]);
        let before = dec.pending().len();
        let out = dec.push(&chunk[..n]);
        if out.consumed + dec.pending().len() != before + n {
            report.conservation_violations += 1;
        }
        report.bytes_fed += n as u64;
        report.calls += 1;
        report.messages += out.messages.len() as u64;
        report.errors += out.errors as u64;
    }
    report
}

pub fn random_message<R: Rng + ?Sized>(rng: &mut R) -> Message {
    match rng.gen_range(0..3) {
        0 => Message::BrakeCmd {
            seq: rng.gen(),
            active: rng.gen(),
            duty_percent: rng.gen_range(0..=100),
            freq_decihertz: rng.gen(),
        },
        1 => Message::Heartbeat {
            seq: rng.gen(),
            time_ms: rng.gen(),
        },
        _ => Message::Ack { seq: rng.gen() },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ResyncReport {
    pub trials: u64,
    pub recovered: u64,
}

impl ResyncReport {
    pub fn recovery_rate(&self) -> f64 {
        if self.trials == 0 {
            return 1.0;
        }
        self.recovered as f64 / self.trials as f64
    }
}

/// Each trial buries `noise | corrupted frame | noise | target frame | noise`
/// in a fresh decoder, fed in random chunks, and checks that the target
/// message comes out.
pub fn resync_trials(trials: u64, seed: u64) -> ResyncReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = ResyncReport::default();
    let mut stream = Vec::new();
    for _ in 0..trials {
        stream.clear();
        push_noise(&mut rng, &mut stream, 48);
        let mut corrupted = random_message(&mut rng).encode().expect("valid message");
        let idx = rng.gen_range(1..corrupted.len());
        corrupted[idx] ^= 1 << rng.gen_range(0..8);
        stream.extend_from_slice(&corrupted);
        push_noise(&mut rng, &mut stream, 16);
        let target = random_message(&mut rng);
        target.encode_into(&mut stream).expect("valid message");
        push_noise(&mut rng, &mut stream, 16);

        let mut dec = StreamDecoder::new();
        let mut found = false;
        let mut pos = 0;
        while pos < stream.len() {
            let n = rng.gen_range(1..=16).min(stream.len() - pos);
            found |= dec.push(&stream[pos..pos + n]).messages.contains(&target);
            pos += n;
        }
        report.trials += 1;
        if found {
            report.recovered += 1;
        }
    }
    report
}

fn push_noise<R: Rng + ?Sized>(rng: &mut R, out: &mut Vec<u8>, max_len: usize) {
    let len = rng.gen_range(0..=max_len);
    out.extend((0..len).map(|_| rng.gen::<u8>()));
}

/// Every ACK, every heartbeat seq against a spread of timestamps, and every
/// brake command duty × frequency × flag for a handful of sequence numbers.
pub fn enumerated_messages() -> impl Iterator<Item = Message> {
    let acks = (0..=255u8).map(|seq| Message::Ack { seq });
    let times = [
        0u32,
        1,
        255,
        256,
        65_535,
        65_536,
        0x0102_0304,
        0xAAAA_AAAA,
        u32::MAX - 1,
        u32::MAX,
    ];
    let heartbeats = (0..=255u8).flat_map(move |seq| {
        times
            .into_iter()
            .map(move |time_ms| Message::Heartbeat { seq, time_ms })
    });
    let cmds = [0u8, 1, 0xAA, 255].into_iter().flat_map(|seq| {
        [false, true].into_iter().flat_map(move |active| {
            (0..=100u8).flat_map(move |duty_percent| {
                (0..=255u8).map(move |freq_decihertz| Message::BrakeCmd {
                    seq,
                    active,
                    duty_percent,
                    freq_decihertz,
                })
            })
        })
    });
    acks.chain(heartbeats).chain(cmds)
}

/// Round-trips every enumerated message. Returns (checked, failures).
pub fn round_trip_sweep() -> (u64, u64) {
    let mut dec = StreamDecoder::new();
    let mut checked = 0;
    let mut failures = 0;
    for msg in enumerated_messages() {
        let bytes = msg.encode().expect("enumerated messages are valid");
        let out = dec.push(&bytes);
        checked += 1;
        if out.messages.as_slice() != [msg] || out.errors != 0 || !dec.pending().is_empty() {
            failures += 1;
        }
    }
    (checked, failures)
}
