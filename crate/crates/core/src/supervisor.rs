//! Over-speed supervisor.
//!
//! Resolves the legal limit from the observed lane count and runs a
//! hysteresis + debounce state machine over the speed estimate. Brake intent
//! goes out as [`Message::BrakeCmd`] on every edge and is repeated while
//! active; heartbeats go out at the same cadence regardless of state so the
//! actuator watchdog stays fed.

use alloc::vec::Vec;

use crate::link::Message;
use crate::sensors::LaneObservation;
use crate::{check, kmh_to_mps, ValidationError};

const TIME_EPS: f64 = 1e-9;

/// Lane count → speed limit (m/s).
#[derive(Debug, Clone, PartialEq)]
pub struct SpeedLimitTable {
    entries: Vec<(u32, f64)>,
    /// Applies until the first lane observation arrives.
    pub fallback_limit: f64,
}

impl Default for SpeedLimitTable {
    /// 1 → 30, 2 → 50, 3 → 80, 4+ → 100 km/h; 50 km/h before any observation.
    fn default() -> Self {
        Self {
            entries: [(1, 30.0), (2, 50.0), (3, 80.0), (4, 100.0)]
                .into_iter()
                .map(|(lanes, kmh)| (lanes, kmh_to_mps(kmh)))
                .collect(),
            fallback_limit: kmh_to_mps(50.0),
        }
    }
}

impl SpeedLimitTable {
    pub fn new(entries: Vec<(u32, f64)>, fallback_limit: f64) -> Result<Self, ValidationError> {
        let table = Self {
            entries,
            fallback_limit,
        };
        table.validate()?;
        Ok(table)
    }

    pub fn entries(&self) -> &[(u32, f64)] {
        &self.entries
    }

    pub fn validate(&self) -> Result<(), ValidationError> {
        check(!self.entries.is_empty(), "table", "table must not be empty")?;
        for (i, &(lanes, limit)) in self.entries.iter().enumerate() {
            check(lanes >= 1, "table", "lane counts must be >= 1")?;
            check(limit > 0.0, "table", "limits must be > 0")?;
            if i > 0 {
                let (prev_lanes, prev_limit) = self.entries[i - 1];
                check(lanes > prev_lanes, "table", "lane counts must be strictly increasing")?;
                check(limit >= prev_limit, "table", "limits must not decrease with lane count")?;
            }
        }
        check(self.fallback_limit > 0.0, "fallback_limit", "must be > 0")
    }

    /// Exact match, else the largest entry below `lane_count`, else the
    /// smallest entry.
    pub fn resolve(&self, lane_count: u32) -> f64 {
        let idx = self.entries.partition_point(|&(lanes, _)| lanes <= lane_count);
        if idx == 0 {
            self.entries[0].1
        } else {
            self.entries[idx - 1].1
        }
    }
}

/// Free-function form of [`SpeedLimitTable::resolve`].
pub fn resolve_limit(lane_count: u32, table: &SpeedLimitTable) -> f64 {
    table.resolve(lane_count)
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(default, deny_unknown_fields)
)]
pub struct SupervisorConfig {
    pub engage_factor: f64,
    pub release_factor: f64,
    pub debounce: f64,
    pub tick_period: f64,
    pub command_repeat_period: f64,
    /// Pulse parameters carried in every brake command.
    pub brake_duty_percent: u8,
    pub brake_freq_decihertz: u8,
}

impl Default for SupervisorConfig {
    fn default() -> Self {
        Self {
            engage_factor: 1.05,
            release_factor: 0.98,
            debounce: 0.3,
            tick_period: 0.01,
            command_repeat_period: 0.1,
            brake_duty_percent: 60,
            brake_freq_decihertz: 50,
        }
    }
}

impl SupervisorConfig {
    pub fn validate(&self) -> Result<(), ValidationError> {
        check(self.engage_factor > 1.0, "engage_factor", "must be > 1")?;
        check(
            self.release_factor < 1.0 && self.release_factor > 0.0,
            "release_factor",
            "must be in (0, 1)",
        )?;
        check(self.debounce >= 0.0, "debounce", "must be >= 0")?;
        check(self.tick_period > 0.0, "tick_period", "must be > 0")?;
        check(self.command_repeat_period > 0.0, "command_repeat_period", "must be > 0")?;
        check(self.brake_duty_percent <= 100, "brake_duty_percent", "must be <= 100")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SupervisorState {
    pub current_limit: f64,
    pub last_speed_estimate: f64,
    pub overspeed_active: bool,
    pub overspeed_candidate_since: Option<f64>,
    pub last_command_sent_at: Option<f64>,
    pub last_heartbeat_sent_at: Option<f64>,
    pub next_seq: u8,
}

impl SupervisorState {
    pub fn new(table: &SpeedLimitTable) -> Self {
        Self {
            current_limit: table.fallback_limit,
            last_speed_estimate: 0.0,
            overspeed_active: false,
            overspeed_candidate_since: None,
            last_command_sent_at: None,
            last_heartbeat_sent_at: None,
            next_seq: 0,
        }
    }

    fn take_seq(&mut self) -> u8 {
        let seq = self.next_seq;
        self.next_seq = self.next_seq.wrapping_add(1);
        seq
    }

    fn brake_cmd(&mut self, cfg: &SupervisorConfig, active: bool) -> Message {
        Message::BrakeCmd {
            seq: self.take_seq(),
            active,
            duty_percent: cfg.brake_duty_percent,
            freq_decihertz: cfg.brake_freq_decihertz,
        }
    }

    /// One supervisor tick. Returns the messages to put on the link, in order.
    pub fn update(
        &mut self,
        cfg: &SupervisorConfig,
        table: &SpeedLimitTable,
        speed_est: f64,
        lane_obs: Option<LaneObservation>,
        now: f64,
    ) -> Vec<Message> {
        if let Some(obs) = lane_obs {
            self.current_limit = table.resolve(obs.lane_count);
        }
        self.last_speed_estimate = speed_est;

        let engage_at = cfg.engage_factor * self.current_limit;
        let release_at = cfg.release_factor * self.current_limit;
        let mut edge = None;
        if self.overspeed_active {
            if speed_est < release_at {
                self.overspeed_active = false;
                edge = Some(false);
            }
        } else if speed_est > engage_at {
            let since = *self.overspeed_candidate_since.get_or_insert(now);
            if now - since + TIME_EPS >= cfg.debounce {
                self.overspeed_active = true;
                self.overspeed_candidate_since = None;
                edge = Some(true);
            }
        } else {
            self.overspeed_candidate_since = None;
        }

        let mut out = Vec::new();
        let due = |last: Option<f64>| last.is_none_or(|t| now - t + TIME_EPS >= cfg.command_repeat_period);
        if let Some(active) = edge {
            out.push(self.brake_cmd(cfg, active));
            self.last_command_sent_at = Some(now);
        } else if self.overspeed_active && due(self.last_command_sent_at) {
            out.push(self.brake_cmd(cfg, true));
            self.last_command_sent_at = Some(now);
        }
        if due(self.last_heartbeat_sent_at) {
            let time_ms = libm::round(now * 1000.0) as u64 as u32;
            out.push(Message::Heartbeat {
                seq: self.take_seq(),
                time_ms,
            });
            self.last_heartbeat_sent_at = Some(now);
        }
        out
    }
}

/// Free-function form of [`SupervisorState::update`].
pub fn update_supervisor(
    state: &mut SupervisorState,
    cfg: &SupervisorConfig,
    table: &SpeedLimitTable,
    speed_est: f64,
    lane_obs: Option<LaneObservation>,
    now: f64,
) -> Vec<Message> {
    state.update(cfg, table, speed_est, lane_obs, now)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brake_flags(msgs: &[Message]) -> Vec<bool> {
        msgs.iter()
            .filter_map(|m| match m {
                Message::BrakeCmd { active, .. } => Some(*active),
                _ => None,
            })
            .collect()
    }

    #[test]
    fn default_table_lookups() {
        let t = SpeedLimitTable::default();
        assert_eq!(t.resolve(2), 13.8889);
        assert!((t.resolve(2) - 13.89).abs() < 0.005);
        assert_eq!(t.resolve(9), 27.7778);
        assert_eq!(t.resolve(1), 8.3333);
    }

    #[test]
    fn sparse_table_clamps_down_and_up() {
        let t = SpeedLimitTable::new(alloc::vec![(2, 10.0), (4, 20.0)], 10.0).unwrap();
        assert_eq!(t.resolve(1), 10.0);
        assert_eq!(t.resolve(3), 10.0);
        assert_eq!(t.resolve(4), 20.0);
        assert_eq!(t.resolve(7), 20.0);
    }

    #[test]
    fn invalid_tables() {
        assert!(SpeedLimitTable::new(alloc::vec![], 10.0).is_err());
        assert!(SpeedLimitTable::new(alloc::vec![(2, 10.0), (2, 12.0)], 10.0).is_err());
        assert!(SpeedLimitTable::new(alloc::vec![(1, 10.0), (2, 9.0)], 10.0).is_err());
        assert!(SpeedLimitTable::new(alloc::vec![(0, 10.0)], 10.0).is_err());
        assert!(SpeedLimitTable::new(alloc::vec![(1, 10.0)], 0.0).is_err());
    }

    #[test]
    fn compliant_driver_never_braked() {
        let cfg = SupervisorConfig::default();
        let table = SpeedLimitTable::default();
        let mut s = SupervisorState::new(&table);
        for k in 0..10_000 {
            let msgs = s.update(&cfg, &table, 13.0, None, k as f64 * 0.01);
            assert!(brake_flags(&msgs).is_empty());
        }
    }

    #[test]
    fn activation_on_thirty_first_tick() {
        let cfg = SupervisorConfig::default();
        let table = SpeedLimitTable::default();
        let mut s = SupervisorState::new(&table);
        let mut activated_at = None;
        for k in 0..100u32 {
            let now = f64::from(k) * 0.01;
            let msgs = s.update(&cfg, &table, 16.0, None, now);
            if brake_flags(&msgs) == [true] && activated_at.is_none() {
                activated_at = Some(k);
            }
        }
        // first over-threshold tick is k = 0; 0.3 s later is tick index 30
        assert_eq!(activated_at, Some(30));
    }

    #[test]
    fn release_on_next_tick_below_band() {
        let cfg = SupervisorConfig::default();
        let table = SpeedLimitTable::default();
        let mut s = SupervisorState::new(&table);
        for k in 0..40 {
            s.update(&cfg, &table, 16.0, None, f64::from(k) * 0.01);
        }
        assert!(s.overspeed_active);
        // 0.98 * 13.8889 = 13.611
        let msgs = s.update(&cfg, &table, 13.0, None, 0.40);
        assert!(!s.overspeed_active);
        assert_eq!(brake_flags(&msgs), [false]);
    }

    #[test]
    fn dip_resets_debounce() {
        let cfg = SupervisorConfig::default();
        let table = SpeedLimitTable::default();
        let mut s = SupervisorState::new(&table);
        for k in 0..20 {
            s.update(&cfg, &table, 16.0, None, f64::from(k) * 0.01);
        }
        s.update(&cfg, &table, 14.0, None, 0.20);
        assert_eq!(s.overspeed_candidate_since, None);
        for k in 21..50 {
            s.update(&cfg, &table, 16.0, None, f64::from(k) * 0.01);
        }
        assert!(!s.overspeed_active);
        s.update(&cfg, &table, 16.0, None, 0.51);
        assert!(s.overspeed_active);
    }

    #[test]
    fn repeats_and_heartbeats_while_active() {
        let cfg = SupervisorConfig {
            debounce: 0.0,
            ..SupervisorConfig::default()
        };
        let table = SpeedLimitTable::default();
        let mut s = SupervisorState::new(&table);
        let mut all = Vec::new();
        for k in 0..=100 {
            all.extend(s.update(&cfg, &table, 20.0, None, f64::from(k) * 0.01));
        }
        // commands at 0.0, 0.1, ... 1.0 and heartbeats at the same instants
        assert_eq!(brake_flags(&all).len(), 11);
        let hb = all.iter().filter(|m| matches!(m, Message::Heartbeat { .. })).count();
        assert_eq!(hb, 11);
        for (i, m) in all.iter().enumerate() {
            assert_eq!(m.seq(), i as u8);
        }
    }

    #[test]
    fn lane_observation_moves_limit_immediately() {
        let cfg = SupervisorConfig::default();
        let table = SpeedLimitTable::default();
        let mut s = SupervisorState::new(&table);
        let obs = LaneObservation {
            lane_count: 4,
            observed_at: 0.0,
        };
        s.update(&cfg, &table, 0.0, Some(obs), 0.0);
        assert_eq!(s.current_limit, 27.7778);
        s.update(&cfg, &table, 0.0, None, 0.01);
        assert_eq!(s.current_limit, 27.7778);
    }

    #[test]
    fn sequence_wraps() {
        let cfg = SupervisorConfig {
            command_repeat_period: 0.01,
            ..SupervisorConfig::default()
        };
        let table = SpeedLimitTable::default();
        let mut s = SupervisorState::new(&table);
        for k in 0..300 {
            s.update(&cfg, &table, 0.0, None, f64::from(k) * 0.01);
        }
        assert_eq!(s.next_seq, (300 % 256) as u8);
    }
}
