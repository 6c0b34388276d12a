use alloc::vec::Vec;

use super::scenario::Scenario;
use crate::supervisor::SpeedLimitTable;

/// One sampled row of a run.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TraceRecord {
    pub time: f64,
    pub position: f64,
    pub speed_true: f64,
    pub speed_est: f64,
    pub lanes_true: u32,
    /// Limit the supervisor is currently enforcing.
    pub limit: f64,
    pub overspeed_active: bool,
    pub motor_energized: bool,
    pub piston_position: f64,
    pub chamber_pressure: f64,
    pub brake_torque: f64,
    pub drive_force: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(default, deny_unknown_fields)
)]
pub struct RunSummary {
    /// Largest excess of true speed over the legal limit, m/s.
    pub max_overshoot: f64,
    pub time_over_limit: f64,
    /// Per entered segment, time from entry until true speed first met the
    /// legal limit. A segment left (or a run ended) without compliance
    /// reports its whole dwell time.
    pub time_to_compliance_per_segment: Vec<f64>,
    pub brake_activation_count: u32,
    /// Rising edges of the motor relay, i.e. brake pulses.
    pub pulse_count: u32,
    pub final_position: f64,
}

/// Scores a trace against the legal limit of the true lane count.
pub fn summarize(trace: &[TraceRecord], table: &SpeedLimitTable, scenario: &Scenario) -> RunSummary {
    let mut summary = RunSummary::default();
    let mut prev_time = 0.0;
    let mut prev_active = false;
    let mut prev_energized = false;
    // (segment index, entry time, compliant yet)
    let mut segment: Option<(usize, f64, bool)> = None;
    let mut last_time = 0.0;

    for rec in trace {
        let legal = table.resolve(rec.lanes_true);
        let excess = rec.speed_true - legal;
        summary.max_overshoot = summary.max_overshoot.max(excess.max(0.0));
        if excess > 0.0 {
            summary.time_over_limit += rec.time - prev_time;
        }
        if rec.overspeed_active && !prev_active {
            summary.brake_activation_count += 1;
        }
        if rec.motor_energized && !prev_energized {
            summary.pulse_count += 1;
        }

        let idx = scenario.segment_index(rec.position);
        match segment {
            Some((current, _, _)) if current == idx => {}
            Some((_, entered, false)) => {
                summary.time_to_compliance_per_segment.push(last_time - entered);
                segment = Some((idx, rec.time, false));
            }
            _ => segment = Some((idx, rec.time, false)),
        }
        if let Some((_, entered, compliant @ false)) = segment.as_mut() {
            if excess <= 0.0 {
                *compliant = true;
                summary.time_to_compliance_per_segment.push(rec.time - *entered);
            }
        }

        prev_time = rec.time;
        prev_active = rec.overspeed_active;
        prev_energized = rec.motor_energized;
        last_time = rec.time;
        summary.final_position = rec.position;
    }
    if let Some((_, entered, false)) = segment {
        summary.time_to_compliance_per_segment.push(last_time - entered);
    }
    summary
}
