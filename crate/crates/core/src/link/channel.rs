use alloc::collections::VecDeque;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{check, ValidationError};

/// Slack for comparing tick-derived times.
const TIME_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelModel {
    pub latency: f64,
    pub byte_drop_prob: f64,
    pub seed: u64,
}

impl Default for ChannelModel {
    fn default() -> Self {
        Self {
            latency: 0.002,
            byte_drop_prob: 0.0,
            seed: 0,
        }
    }
}

impl ChannelModel {
    pub fn validate(&self) -> Result<(), ValidationError> {
        check(self.latency >= 0.0, "latency", "must be >= 0")?;
        check(
            (0.0..=1.0).contains(&self.byte_drop_prob),
            "byte_drop_prob",
            "must be in [0, 1]",
        )
    }
}

/// One-directional byte pipe with fixed latency and independent byte loss.
///
/// The drop decision is drawn when a byte is submitted, so the delivery
/// schedule depends only on the seed and the submitted byte count.
#[derive(Debug, Clone)]
pub struct Channel {
    model: ChannelModel,
    rng: ChaCha8Rng,
    in_flight: VecDeque<(f64, u8)>,
    submitted: u64,
    dropped: u64,
}

impl Channel {
    pub fn new(model: ChannelModel) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(model.seed),
            model,
            in_flight: VecDeque::new(),
            submitted: 0,
            dropped: 0,
        }
    }

    pub fn model(&self) -> &ChannelModel {
        &self.model
    }

    pub fn submit(&mut self, bytes: &[u8], now: f64) {
        let due = now + self.model.latency;
        for &b in bytes {
            self.submitted += 1;
            if self.model.byte_drop_prob > 0.0 && self.rng.gen::<f64>() < self.model.byte_drop_prob {
                self.dropped += 1;
            } else {
                self.in_flight.push_back((due, b));
            }
        }
    }

    /// Releases every surviving byte whose delivery time has come, in
    /// submission order.
    pub fn step(&mut self, now: f64) -> Vec<u8> {
        let mut out = Vec::new();
        while let Some(&(due, b)) = self.in_flight.front() {
            if due > now + TIME_EPS {
                break;
            }
            out.push(b);
            self.in_flight.pop_front();
        }
        out
    }

    pub fn in_flight(&self) -> usize {
        self.in_flight.len()
    }

    pub fn submitted(&self) -> u64 {
        self.submitted
    }

    pub fn dropped(&self) -> u64 {
        self.dropped
    }
}
