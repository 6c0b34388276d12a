//! TOML scenario files.
//!
//! ```toml
//! name = "arterial"
//! duration = 60.0
//! seed = 7
//!
//! [supervisor]
//! debounce = 0.2
//!
//! [[limits.table]]
//! lanes = 2
//! kmh = 50
//!
//! [[segments]]
//! start_position = 0.0
//! lane_count = 2
//!
//! [[throttle]]
//! start_time = 0.0
//! drive_force_fraction = 1.0
//! ```
//!
//! Every section and key is optional except `duration` and at least one
//! segment. Speed limits are written in km/h.

use std::fs;
use std::path::Path;

use scss_core::actuator_ctrl::PulserConfig;
use scss_core::kmh_to_mps;
use scss_core::link::ChannelModel;
use scss_core::plant::{ActuatorParams, VehicleParams};
use scss_core::sensors::{HallConfig, LaneSensorConfig};
use scss_core::sim::{RoadSegment, Scenario, SimConfig, SystemParams, ThrottleStep};
use scss_core::supervisor::{SpeedLimitTable, SupervisorConfig};
use scss_core::ValidationError;
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct File {
    name: Option<String>,
    duration: f64,
    #[serde(default)]
    seed: u64,
    #[serde(default)]
    sim: SimConfig,
    #[serde(default)]
    vehicle: VehicleParams,
    #[serde(default)]
    actuator: ActuatorParams,
    #[serde(default)]
    sensors: Sensors,
    #[serde(default)]
    supervisor: SupervisorConfig,
    #[serde(default)]
    limits: Limits,
    #[serde(default)]
    pulser: PulserConfig,
    #[serde(default)]
    link: Link,
    #[serde(default)]
    segments: Vec<Segment>,
    #[serde(default)]
    throttle: Vec<Throttle>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct Sensors {
    hall: HallConfig,
    lanes: LaneSensorConfig,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct Limits {
    fallback_kmh: Option<f64>,
    table: Option<Vec<LimitEntry>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct LimitEntry {
    lanes: u32,
    kmh: f64,
}

/// Applies to both directions of the link.
#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct Link {
    latency: f64,
    byte_drop_prob: f64,
    outage_at: Option<f64>,
}

impl Default for Link {
    fn default() -> Self {
        let m = ChannelModel::default();
        Self {
            latency: m.latency,
            byte_drop_prob: m.byte_drop_prob,
            outage_at: None,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Segment {
    start_position: f64,
    lane_count: u32,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Throttle {
    start_time: f64,
    drive_force_fraction: f64,
}

fn limits_table(limits: Limits) -> Result<SpeedLimitTable, ValidationError> {
    let default = SpeedLimitTable::default();
    let fallback = match limits.fallback_kmh {
        Some(kmh) if !(kmh > 0.0 && kmh.is_finite()) => {
            return Err(ValidationError::new("limits.fallback_kmh", "must be > 0"))
        }
        Some(kmh) => kmh_to_mps(kmh),
        None => default.fallback_limit,
    };
    let entries = match limits.table {
        Some(rows) => rows.iter().map(|r| (r.lanes, kmh_to_mps(r.kmh))).collect(),
        None => default.entries().to_vec(),
    };
    SpeedLimitTable::new(entries, fallback).map_err(|e| e.within("limits"))
}

fn line_of(text: &str, offset: usize) -> usize {
    text.as_bytes()[..offset.min(text.len())]
        .iter()
        .filter(|&&b| b == b'\n')
        .count()
        + 1
}

/// Parses scenario text. `path` only labels errors; `default_name` is used
/// when the file has no `name` key.
pub fn parse_scenario(text: &str, path: &Path, default_name: &str) -> Result<(Scenario, SimConfig), CliError> {
    let file: File = toml::from_str(text).map_err(|e| CliError::Parse {
        path: path.to_path_buf(),
        line: e.span().map(|s| line_of(text, s.start)),
        message: e.message().trim_end().to_string(),
    })?;
    let invalid = |source| CliError::Validation {
        path: path.to_path_buf(),
        source,
    };

    let limits = limits_table(file.limits).map_err(invalid)?;
    let channel = ChannelModel {
        latency: file.link.latency,
        byte_drop_prob: file.link.byte_drop_prob,
        seed: 0,
    };
    let scenario = Scenario {
        name: file.name.unwrap_or_else(|| default_name.to_string()),
        duration: file.duration,
        road_segments: file
            .segments
            .iter()
            .map(|s| RoadSegment {
                start_position: s.start_position,
                lane_count: s.lane_count,
            })
            .collect(),
        throttle_profile: if file.throttle.is_empty() {
            vec![ThrottleStep {
                start_time: 0.0,
                drive_force_fraction: 0.0,
            }]
        } else {
            file.throttle
                .iter()
                .map(|t| ThrottleStep {
                    start_time: t.start_time,
                    drive_force_fraction: t.drive_force_fraction,
                })
                .collect()
        },
        params: SystemParams {
            vehicle: file.vehicle,
            actuator: file.actuator,
            hall: file.sensors.hall,
            lanes: file.sensors.lanes,
            supervisor: file.supervisor,
            limits,
            pulser: file.pulser,
            uplink: channel,
            downlink: channel,
            uplink_outage_at: file.link.outage_at,
        },
        seed: file.seed,
    };
    // building the simulation also checks tick alignment
    scss_core::sim::Simulation::new(scenario.clone(), file.sim).map_err(invalid)?;
    Ok((scenario, file.sim))
}

/// Reads and validates a scenario file.
pub fn load_scenario(path: &Path) -> Result<(Scenario, SimConfig), CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("scenario");
    parse_scenario(&text, path, stem)
}
