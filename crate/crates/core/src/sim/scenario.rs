use alloc::string::String;
use alloc::vec::Vec;

use crate::actuator_ctrl::PulserConfig;
use crate::link::ChannelModel;
use crate::plant::{ActuatorParams, VehicleParams};
use crate::sensors::{HallConfig, LaneSensorConfig};
use crate::supervisor::{SpeedLimitTable, SupervisorConfig};
use crate::{check, ValidationError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoadSegment {
    pub start_position: f64,
    pub lane_count: u32,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThrottleStep {
    pub start_time: f64,
    pub drive_force_fraction: f64,
}

/// Every tunable of every module. Scenario files override individual fields.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SystemParams {
    pub vehicle: VehicleParams,
    pub actuator: ActuatorParams,
    pub hall: HallConfig,
    pub lanes: LaneSensorConfig,
    pub supervisor: SupervisorConfig,
    pub limits: SpeedLimitTable,
    pub pulser: PulserConfig,
    /// Supervisor → actuator link.
    pub uplink: ChannelModel,
    /// Actuator → supervisor link (ACKs).
    pub downlink: ChannelModel,
    /// Uplink goes dead from this time on, if set.
    pub uplink_outage_at: Option<f64>,
}

impl SystemParams {
    pub fn validate(&self) -> Result<(), ValidationError> {
        self.vehicle.validate().map_err(|e| e.within("vehicle"))?;
        self.actuator.validate().map_err(|e| e.within("actuator"))?;
        self.hall.validate().map_err(|e| e.within("sensors.hall"))?;
        self.lanes.validate().map_err(|e| e.within("sensors.lanes"))?;
        self.supervisor.validate().map_err(|e| e.within("supervisor"))?;
        self.limits.validate().map_err(|e| e.within("limits"))?;
        self.pulser.validate().map_err(|e| e.within("pulser"))?;
        self.uplink.validate().map_err(|e| e.within("link"))?;
        self.downlink.validate().map_err(|e| e.within("link"))?;
        if let Some(t) = self.uplink_outage_at {
            check(t >= 0.0, "link.outage_at", "must be >= 0")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub duration: f64,
    pub road_segments: Vec<RoadSegment>,
    pub throttle_profile: Vec<ThrottleStep>,
    pub params: SystemParams,
    pub seed: u64,
}

impl Scenario {
    /// A single road segment at constant throttle, all defaults.
    pub fn constant(name: &str, duration: f64, lanes: u32, throttle: f64) -> Self {
        Self {
            name: name.into(),
            duration,
            road_segments: alloc::vec![RoadSegment {
                start_position: 0.0,
                lane_count: lanes,
            }],
            throttle_profile: alloc::vec![ThrottleStep {
                start_time: 0.0,
                drive_force_fraction: throttle,
            }],
            params: SystemParams::default(),
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<(), ValidationError> {
        check(
            self.duration.is_finite() && self.duration >= 0.0,
            "duration",
            "must be a finite value >= 0",
        )?;
        check(
            !self.road_segments.is_empty(),
            "road_segments",
            "at least one segment required",
        )?;
        check(
            self.road_segments[0].start_position == 0.0,
            "road_segments",
            "first segment must start at 0",
        )?;
        for w in self.road_segments.windows(2) {
            check(
                w[1].start_position > w[0].start_position,
                "road_segments",
                "start positions must be strictly increasing",
            )?;
        }
        check(
            self.road_segments.iter().all(|s| s.lane_count >= 1),
            "road_segments",
            "lane counts must be >= 1",
        )?;
        check(
            !self.throttle_profile.is_empty(),
            "throttle_profile",
            "at least one step required",
        )?;
        check(
            self.throttle_profile[0].start_time == 0.0,
            "throttle_profile",
            "first step must start at 0",
        )?;
        for w in self.throttle_profile.windows(2) {
            check(
                w[1].start_time > w[0].start_time,
                "throttle_profile",
                "start times must be strictly increasing",
            )?;
        }
        check(
            self.throttle_profile
                .iter()
                .all(|s| (0.0..=1.0).contains(&s.drive_force_fraction)),
            "throttle_profile",
            "fractions must be in [0, 1]",
        )?;
        self.params.validate()
    }

    /// Index of the segment containing `position`.
    pub fn segment_index(&self, position: f64) -> usize {
        self.road_segments
            .partition_point(|s| s.start_position <= position)
            .saturating_sub(1)
    }

    pub fn lanes_at(&self, position: f64) -> u32 {
        self.road_segments[self.segment_index(position)].lane_count
    }

    pub fn throttle_at(&self, time: f64) -> f64 {
        let idx = self
            .throttle_profile
            .partition_point(|s| s.start_time <= time)
            .saturating_sub(1);
        self.throttle_profile[idx].drive_force_fraction
    }
}

/// When a drive cut ends.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(rename_all = "snake_case")
)]
pub enum InhibitRelease {
    /// Drive returns as soon as the brake command clears.
    OnCommandClear,
    /// Drive stays cut after the command clears until the throttle is lifted
    /// to zero or the resolved limit rises.
    OnPedalLift,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(default, deny_unknown_fields)
)]
pub struct SimConfig {
    pub plant_dt: f64,
    pub inhibit_drive_on_overspeed: bool,
    pub inhibit_release: InhibitRelease,
    /// Record every Nth plant step.
    pub trace_decimation: u32,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            plant_dt: 0.001,
            inhibit_drive_on_overspeed: true,
            inhibit_release: InhibitRelease::OnPedalLift,
            trace_decimation: 10,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), ValidationError> {
        check(
            self.plant_dt > 0.0 && self.plant_dt.is_finite(),
            "sim.plant_dt",
            "must be > 0",
        )?;
        check(self.trace_decimation >= 1, "sim.trace_decimation", "must be >= 1")
    }

    /// Number of plant steps per `period`, if it is a whole multiple of `plant_dt`.
    pub fn steps_per(&self, period: f64) -> Option<u64> {
        let ratio = period / self.plant_dt;
        let rounded = libm::round(ratio);
        if rounded >= 1.0 && libm::fabs(ratio - rounded) <= 1e-6 * rounded {
            Some(rounded as u64)
        } else {
            None
        }
    }
}
