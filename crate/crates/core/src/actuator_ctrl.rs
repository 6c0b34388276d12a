//! Actuator node: turns brake intent into a square-wave relay drive so the
//! brake chain is repeatedly applied and relaxed instead of held, and drops
//! out if the supervisor goes quiet.

use crate::link::Message;
use crate::{check, ValidationError};

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(default, deny_unknown_fields)
)]
pub struct PulserConfig {
    pub pulse_frequency: f64,
    pub duty_fraction: f64,
    pub watchdog_timeout: f64,
    pub tick_period: f64,
}

impl Default for PulserConfig {
    fn default() -> Self {
        Self {
            pulse_frequency: 5.0,
            duty_fraction: 0.6,
            watchdog_timeout: 0.5,
            tick_period: 0.001,
        }
    }
}

impl PulserConfig {
    pub fn validate(&self) -> Result<(), ValidationError> {
        check(self.pulse_frequency > 0.0, "pulse_frequency", "must be > 0")?;
        check(
            self.duty_fraction > 0.0 && self.duty_fraction <= 1.0,
            "duty_fraction",
            "must be in (0, 1]",
        )?;
        check(self.watchdog_timeout > 0.0, "watchdog_timeout", "must be > 0")?;
        check(self.tick_period > 0.0, "tick_period", "must be > 0")
    }
}

/// Square-wave shape requested by the latest activating command.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseShape {
    pub frequency: f64,
    pub duty: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PulserState {
    pub active: bool,
    /// Time of the last activation edge; the square wave starts "on" here.
    pub phase_origin: f64,
    pub last_heartbeat_at: f64,
    pub motor_energized: bool,
    pub last_seq_seen: Option<u8>,
    /// Overrides the configured shape when the command carried a usable one.
    pub commanded_shape: Option<PulseShape>,
}

impl PulserState {
    pub fn new() -> Self {
        Self::default()
    }

    /// Applies one received message. Returns an ACK for brake commands.
    pub fn handle_message(&mut self, msg: &Message, now: f64) -> Option<Message> {
        let seq = msg.seq();
        match *msg {
            Message::BrakeCmd {
                active,
                duty_percent,
                freq_decihertz,
                ..
            } => {
                if self.last_seq_seen == Some(seq) {
                    return None;
                }
                self.last_seq_seen = Some(seq);
                if active && !self.active {
                    self.phase_origin = now;
                }
                if !active {
                    self.motor_energized = false;
                }
                self.active = active;
                self.commanded_shape = (duty_percent > 0 && freq_decihertz > 0).then(|| PulseShape {
                    frequency: f64::from(freq_decihertz) / 10.0,
                    duty: f64::from(duty_percent) / 100.0,
                });
                Some(Message::Ack { seq })
            }
            Message::Heartbeat { .. } => {
                if self.last_seq_seen != Some(seq) {
                    self.last_seq_seen = Some(seq);
                    self.last_heartbeat_at = now;
                }
                None
            }
            Message::Ack { .. } => None,
        }
    }

    /// One pulser tick. Returns whether the motor relay is closed.
    pub fn update(&mut self, cfg: &PulserConfig, now: f64) -> bool {
        if now - self.last_heartbeat_at > cfg.watchdog_timeout {
            self.active = false;
        }
        self.motor_energized = if self.active {
            let (frequency, duty) = match self.commanded_shape {
                Some(shape) => (shape.frequency, shape.duty),
                None => (cfg.pulse_frequency, cfg.duty_fraction),
            };
            let period = 1.0 / frequency;
            let phase = libm::fmod((now - self.phase_origin).max(0.0), period);
            phase < duty * period
        } else {
            false
        };
        self.motor_energized
    }
}

/// Free-function form of [`PulserState::handle_message`].
pub fn handle_message(state: &mut PulserState, msg: &Message, now: f64) -> Option<Message> {
    state.handle_message(msg, now)
}

/// Free-function form of [`PulserState::update`].
pub fn update_pulser(state: &mut PulserState, cfg: &PulserConfig, now: f64) -> bool {
    state.update(cfg, now)
}
