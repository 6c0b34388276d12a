//! Hall-effect wheel pulses, period-based speed estimation and the lane-count
//! observer standing in for the camera.

use alloc::vec::Vec;
use core::f64::consts::TAU;

use rand::Rng;

use crate::{check, ValidationError};

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(default, deny_unknown_fields)
)]
pub struct HallConfig {
    /// Magnets passing the sensor per wheel revolution.
    pub pulses_per_rev: u32,
    /// Capture timer tick, s. Zero models an ideal timer.
    pub timer_resolution: f64,
    /// The estimate drops to zero when the newest pulse is older than this.
    pub estimate_timeout: f64,
    /// Number of trailing inter-pulse intervals averaged.
    pub smoothing_window: usize,
}

impl Default for HallConfig {
    fn default() -> Self {
        Self {
            pulses_per_rev: 4,
            timer_resolution: 1.0e-6,
            estimate_timeout: 1.0,
            smoothing_window: 3,
        }
    }
}

impl HallConfig {
    pub fn validate(&self) -> Result<(), ValidationError> {
        check(self.pulses_per_rev >= 1, "pulses_per_rev", "must be >= 1")?;
        check(self.timer_resolution >= 0.0, "timer_resolution", "must be >= 0")?;
        check(self.estimate_timeout > 0.0, "estimate_timeout", "must be > 0")?;
        check(self.smoothing_window >= 1, "smoothing_window", "must be >= 1")
    }

    /// Wheel angle between consecutive pulses.
    pub fn pulse_pitch(&self) -> f64 {
        TAU / f64::from(self.pulses_per_rev)
    }

    fn quantize(&self, t: f64) -> f64 {
        if self.timer_resolution > 0.0 {
            libm::floor(t / self.timer_resolution) * self.timer_resolution
        } else {
            t
        }
    }
}

/// Captured pulse timestamps plus the tracking needed to find new crossings.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PulseLog {
    timestamps: Vec<f64>,
    last_emitted_angle_index: u64,
    prev_angle: f64,
    prev_time: f64,
}

impl PulseLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn timestamps(&self) -> &[f64] {
        &self.timestamps
    }

    pub fn len(&self) -> usize {
        self.timestamps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.timestamps.is_empty()
    }

    pub fn last_emitted_angle_index(&self) -> u64 {
        self.last_emitted_angle_index
    }

    /// Records a capture for every pulse pitch the wheel crossed since the
    /// previous call. Crossing instants are interpolated linearly between the
    /// two calls, then quantized to the capture timer. Returns how many
    /// pulses were added.
    pub fn emit(&mut self, wheel_angle: f64, now: f64, cfg: &HallConfig) -> usize {
        let pitch = cfg.pulse_pitch();
        let reached = libm::floor(wheel_angle / pitch).max(0.0) as u64;
        let mut added = 0;
        while self.last_emitted_angle_index < reached {
            self.last_emitted_angle_index += 1;
            let crossing = self.last_emitted_angle_index as f64 * pitch;
            let swept = wheel_angle - self.prev_angle;
            let at = if swept > 0.0 && now > self.prev_time {
                let frac = ((crossing - self.prev_angle) / swept).clamp(0.0, 1.0);
                self.prev_time + frac * (now - self.prev_time)
            } else {
                now
            };
            let mut stamp = cfg.quantize(at);
            if let Some(&last) = self.timestamps.last() {
                if stamp <= last {
                    // two captures inside one timer tick
                    stamp = last + cfg.timer_resolution.max(f64::EPSILON * last.abs().max(1.0));
                }
            }
            self.timestamps.push(stamp);
            added += 1;
        }
        self.prev_angle = wheel_angle;
        self.prev_time = now;
        added
    }

    /// Speed from the mean of the last `smoothing_window` pulse periods.
    pub fn estimate_speed(&self, now: f64, wheel_radius: f64, cfg: &HallConfig) -> f64 {
        let n = self.timestamps.len();
        if n < 2 {
            return 0.0;
        }
        let newest = self.timestamps[n - 1];
        if now - newest > cfg.estimate_timeout {
            return 0.0;
        }
        let intervals = cfg.smoothing_window.min(n - 1);
        let span = newest - self.timestamps[n - 1 - intervals];
        if span <= 0.0 {
            return 0.0;
        }
        let mean_period = span / intervals as f64;
        cfg.pulse_pitch() * wheel_radius / mean_period
    }
}

/// Free-function form of [`PulseLog::emit`].
pub fn emit_pulses(log: &mut PulseLog, wheel_angle: f64, now: f64, cfg: &HallConfig) -> usize {
    log.emit(wheel_angle, now, cfg)
}

/// Free-function form of [`PulseLog::estimate_speed`].
pub fn estimate_speed(log: &PulseLog, now: f64, wheel_radius: f64, cfg: &HallConfig) -> f64 {
    log.estimate_speed(now, wheel_radius, cfg)
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(default, deny_unknown_fields)
)]
pub struct LaneSensorConfig {
    pub sample_period: f64,
    pub misclassification_prob: f64,
    pub dropout_prob: f64,
}

impl Default for LaneSensorConfig {
    fn default() -> Self {
        Self {
            sample_period: 0.2,
            misclassification_prob: 0.02,
            dropout_prob: 0.05,
        }
    }
}

impl LaneSensorConfig {
    /// Perfect sensor at the default cadence.
    pub fn noiseless() -> Self {
        Self {
            misclassification_prob: 0.0,
            dropout_prob: 0.0,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), ValidationError> {
        check(self.sample_period > 0.0, "sample_period", "must be > 0")?;
        check(
            (0.0..=1.0).contains(&self.misclassification_prob),
            "misclassification_prob",
            "must be in [0, 1]",
        )?;
        check(
            (0.0..=1.0).contains(&self.dropout_prob),
            "dropout_prob",
            "must be in [0, 1]",
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaneObservation {
    pub lane_count: u32,
    pub observed_at: f64,
}

/// Samples the lane counter. Drops the frame with `dropout_prob`; otherwise
/// misreads by one lane with `misclassification_prob`, never below one.
pub fn observe_lanes<R: Rng + ?Sized>(
    true_lanes: u32,
    now: f64,
    rng: &mut R,
    cfg: &LaneSensorConfig,
) -> Option<LaneObservation> {
    let true_lanes = true_lanes.max(1);
    if rng.gen::<f64>() < cfg.dropout_prob {
        return None;
    }
    let lane_count = if rng.gen::<f64>() < cfg.misclassification_prob {
        if true_lanes == 1 || rng.gen::<bool>() {
            true_lanes + 1
        } else {
            true_lanes - 1
        }
    } else {
        true_lanes
    };
    Some(LaneObservation {
        lane_count,
        observed_at: now,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn drive(log: &mut PulseLog, cfg: &HallConfig, speed: f64, radius: f64, dt: f64, steps: usize) {
        for k in 1..=steps {
            let t = k as f64 * dt;
            log.emit(speed * t / radius, t, cfg);
        }
    }

    #[test]
    fn stationary_wheel_emits_nothing() {
        let cfg = HallConfig::default();
        let mut log = PulseLog::new();
        for k in 0..1000 {
            assert_eq!(log.emit(0.0, k as f64 * 1e-3, &cfg), 0);
        }
        assert!(log.is_empty());
    }

    #[test]
    fn interval_matches_closed_form() {
        // 2π·0.3 / (4·4.712389) = 0.1 s
        let cfg = HallConfig::default();
        let v = TAU * 0.3 / 4.0 / 0.1;
        let mut log = PulseLog::new();
        drive(&mut log, &cfg, v, 0.3, 1e-3, 1000);
        let ts = log.timestamps();
        assert!(ts.len() >= 9);
        for w in ts.windows(2) {
            assert_relative_eq!(w[1] - w[0], 0.1, epsilon = 2e-6);
        }
    }

    #[test]
    fn timestamps_land_on_timer_ticks() {
        let cfg = HallConfig::default();
        let mut log = PulseLog::new();
        drive(&mut log, &cfg, 13.7, 0.3, 1e-3, 3000);
        assert!(!log.is_empty());
        for &t in log.timestamps() {
            let ticks = t / cfg.timer_resolution;
            assert!((ticks - libm::round(ticks)).abs() < 1e-6, "{t}");
        }
        for w in log.timestamps().windows(2) {
            assert!(w[1] > w[0]);
        }
    }

    #[test]
    fn estimate_edge_cases() {
        let cfg = HallConfig::default();
        let log = PulseLog::new();
        assert_eq!(log.estimate_speed(1.0, 0.3, &cfg), 0.0);

        let log = PulseLog {
            timestamps: alloc::vec![0.0, 0.1, 0.2, 0.3],
            ..PulseLog::default()
        };
        assert_relative_eq!(
            log.estimate_speed(0.3, 0.3, &cfg),
            TAU * 0.3 / 4.0 / 0.1,
            max_relative = 1e-12
        );
        assert_relative_eq!(log.estimate_speed(0.3, 0.3, &cfg), 4.712, epsilon = 1e-3);
        // newest pulse 2 s old with a 1 s timeout
        assert_eq!(log.estimate_speed(2.3, 0.3, &cfg), 0.0);
    }

    #[test]
    fn window_uses_available_intervals() {
        let cfg = HallConfig::default();
        let log = PulseLog {
            timestamps: alloc::vec![0.0, 0.2],
            ..PulseLog::default()
        };
        assert_relative_eq!(
            log.estimate_speed(0.2, 0.3, &cfg),
            TAU * 0.3 / 4.0 / 0.2,
            max_relative = 1e-12
        );
    }

    #[test]
    fn noiseless_and_full_dropout() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let cfg = LaneSensorConfig::noiseless();
        for _ in 0..100 {
            let obs = observe_lanes(3, 0.5, &mut rng, &cfg).unwrap();
            assert_eq!(obs.lane_count, 3);
            assert_eq!(obs.observed_at, 0.5);
        }
        let dead = LaneSensorConfig {
            dropout_prob: 1.0,
            ..cfg
        };
        for _ in 0..1000 {
            assert!(observe_lanes(3, 0.0, &mut rng, &dead).is_none());
        }
    }

    #[test]
    fn misread_frequency() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let cfg = LaneSensorConfig {
            sample_period: 0.2,
            misclassification_prob: 0.1,
            dropout_prob: 0.0,
        };
        let n = 100_000;
        let mut exact = 0;
        for _ in 0..n {
            let obs = observe_lanes(2, 0.0, &mut rng, &cfg).unwrap();
            assert!((1..=3).contains(&obs.lane_count));
            if obs.lane_count == 2 {
                exact += 1;
            }
        }
        let freq = exact as f64 / n as f64;
        assert!((freq - 0.9).abs() <= 0.01, "{freq}");
    }

    #[test]
    fn single_lane_misreads_upward() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let cfg = LaneSensorConfig {
            sample_period: 0.2,
            misclassification_prob: 1.0,
            dropout_prob: 0.0,
        };
        for _ in 0..1000 {
            assert_eq!(observe_lanes(1, 0.0, &mut rng, &cfg).unwrap().lane_count, 2);
        }
    }
}
