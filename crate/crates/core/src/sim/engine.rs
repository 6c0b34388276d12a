use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::scenario::{InhibitRelease, Scenario, SimConfig};
use super::summary::{summarize, RunSummary, TraceRecord};
use crate::actuator_ctrl::PulserState;
use crate::link::{Channel, ChannelModel, Message, StreamDecoder};
use crate::plant::{BrakeActuatorState, VehicleState};
use crate::sensors::{observe_lanes, LaneObservation, PulseLog};
use crate::supervisor::SupervisorState;
use crate::{check, ValidationError};

/// Link-level counters for a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct LinkStats {
    pub frames_sent: u64,
    pub frames_received: u64,
    pub frame_errors: u64,
    pub acks_received: u64,
}

#[derive(Debug, Clone, Copy)]
struct Dividers {
    supervisor: u64,
    pulser: u64,
    lanes: u64,
}

/// Derives independent per-component seeds from the scenario seed.
fn sub_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Fixed-step co-simulation of the plant, both controller nodes and the link.
///
/// Each call to [`Simulation::step`] first runs whichever controllers are due
/// at the current time, then advances the plant by one `plant_dt`.
#[derive(Debug, Clone)]
pub struct Simulation {
    scenario: Scenario,
    cfg: SimConfig,
    div: Dividers,
    step_index: u64,
    vehicle: VehicleState,
    actuator: BrakeActuatorState,
    pulses: PulseLog,
    lane_rng: ChaCha8Rng,
    pending_lanes: Option<LaneObservation>,
    supervisor: SupervisorState,
    pulser: PulserState,
    uplink: Channel,
    downlink: Channel,
    actuator_rx: StreamDecoder,
    supervisor_rx: StreamDecoder,
    stats: LinkStats,
    motor_energized: bool,
    drive_force: f64,
    drive_latched_off: bool,
    latched_limit: f64,
    tx: Vec<u8>,
}

impl Simulation {
    pub fn new(scenario: Scenario, cfg: SimConfig) -> Result<Self, ValidationError> {
        cfg.validate()?;
        scenario.validate()?;
        let p = &scenario.params;
        let divider = |period: f64, field: &str| {
            cfg.steps_per(period)
                .ok_or_else(|| ValidationError::new(field, "must be a whole multiple of sim.plant_dt"))
        };
        let div = Dividers {
            supervisor: divider(p.supervisor.tick_period, "supervisor.tick_period")?,
            pulser: divider(p.pulser.tick_period, "pulser.tick_period")?,
            lanes: divider(p.lanes.sample_period, "sensors.lanes.sample_period")?,
        };
        check(
            p.supervisor.command_repeat_period + 1e-12 >= p.supervisor.tick_period,
            "supervisor.command_repeat_period",
            "must be >= tick_period",
        )?;

        let seed = scenario.seed;
        let uplink = Channel::new(ChannelModel {
            seed: sub_seed(seed, 2),
            ..p.uplink
        });
        let downlink = Channel::new(ChannelModel {
            seed: sub_seed(seed, 3),
            ..p.downlink
        });
        let supervisor = SupervisorState::new(&p.limits);
        let latched_limit = supervisor.current_limit;
        Ok(Self {
            lane_rng: ChaCha8Rng::seed_from_u64(sub_seed(seed, 1)),
            div,
            cfg,
            step_index: 0,
            vehicle: VehicleState::default(),
            actuator: BrakeActuatorState::default(),
            pulses: PulseLog::new(),
            pending_lanes: None,
            supervisor,
            pulser: PulserState::new(),
            uplink,
            downlink,
            actuator_rx: StreamDecoder::new(),
            supervisor_rx: StreamDecoder::new(),
            stats: LinkStats::default(),
            motor_energized: false,
            drive_force: 0.0,
            drive_latched_off: false,
            latched_limit,
            tx: Vec::new(),
            scenario,
        })
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    /// Total plant steps for the scenario duration.
    pub fn total_steps(&self) -> u64 {
        libm::round(self.scenario.duration / self.cfg.plant_dt) as u64
    }

    pub fn is_finished(&self) -> bool {
        self.step_index >= self.total_steps()
    }

    pub fn time(&self) -> f64 {
        self.step_index as f64 * self.cfg.plant_dt
    }

    pub fn vehicle(&self) -> &VehicleState {
        &self.vehicle
    }

    pub fn actuator(&self) -> &BrakeActuatorState {
        &self.actuator
    }

    pub fn supervisor(&self) -> &SupervisorState {
        &self.supervisor
    }

    pub fn pulser(&self) -> &PulserState {
        &self.pulser
    }

    pub fn pulses(&self) -> &PulseLog {
        &self.pulses
    }

    pub fn link_stats(&self) -> LinkStats {
        self.stats
    }

    /// Relay state used for the most recent plant step.
    pub fn motor_energized(&self) -> bool {
        self.motor_energized
    }

    fn run_controllers(&mut self, now: f64) {
        let k = self.step_index;
        let p = &self.scenario.params;

        // supervisor → actuator
        let arrived = self.uplink.step(now);
        if !arrived.is_empty() {
            let out = self.actuator_rx.push(&arrived);
            self.stats.frame_errors += out.errors as u64;
            self.stats.frames_received += out.messages.len() as u64;
            for msg in &out.messages {
                if let Some(ack) = self.pulser.handle_message(msg, now) {
                    self.tx.clear();
                    ack.encode_into(&mut self.tx).expect("ack always encodes");
                    self.downlink.submit(&self.tx, now);
                }
            }
        }
        // actuator → supervisor
        let arrived = self.downlink.step(now);
        if !arrived.is_empty() {
            let out = self.supervisor_rx.push(&arrived);
            self.stats.frame_errors += out.errors as u64;
            self.stats.acks_received += out.messages.iter().filter(|m| matches!(m, Message::Ack { .. })).count() as u64;
        }

        if k.is_multiple_of(self.div.lanes) {
            let truth = self.scenario.lanes_at(self.vehicle.position);
            if let Some(obs) = observe_lanes(truth, now, &mut self.lane_rng, &p.lanes) {
                self.pending_lanes = Some(obs);
            }
        }
        if k.is_multiple_of(self.div.supervisor) {
            let est = self.pulses.estimate_speed(now, p.vehicle.wheel_radius, &p.hall);
            let msgs = self
                .supervisor
                .update(&p.supervisor, &p.limits, est, self.pending_lanes.take(), now);
            let link_dead = p.uplink_outage_at.is_some_and(|t| now >= t);
            self.tx.clear();
            for msg in &msgs {
                msg.encode_into(&mut self.tx).expect("supervisor emits valid messages");
            }
            self.stats.frames_sent += msgs.len() as u64;
            if !link_dead && !self.tx.is_empty() {
                self.uplink.submit(&self.tx, now);
            }
        }
        if k.is_multiple_of(self.div.pulser) {
            self.motor_energized = self.pulser.update(&p.pulser, now);
        }

        let throttle = self.scenario.throttle_at(now);
        let active = self.supervisor.overspeed_active;
        let limit = self.supervisor.current_limit;
        let mut cut = false;
        if self.cfg.inhibit_drive_on_overspeed {
            if active {
                self.drive_latched_off = self.cfg.inhibit_release == InhibitRelease::OnPedalLift;
                self.latched_limit = limit;
            } else if self.drive_latched_off && (throttle <= 0.0 || limit > self.latched_limit) {
                self.drive_latched_off = false;
            }
            cut = active || self.drive_latched_off;
        }
        self.drive_force = if cut { 0.0 } else { throttle * p.vehicle.max_drive_force };
    }

    /// Advances one plant step. Returns the record for the end of the step.
    pub fn step(&mut self) -> TraceRecord {
        let dt = self.cfg.plant_dt;
        let now = self.time();
        self.run_controllers(now);

        let p = &self.scenario.params;
        self.actuator = self.actuator.step(self.motor_energized, dt, &p.actuator);
        self.vehicle = self
            .vehicle
            .step(self.drive_force, self.actuator.brake_torque, dt, &p.vehicle);
        self.step_index += 1;
        let end = self.time();
        self.vehicle.time = end;
        self.pulses.emit(self.vehicle.wheel_angle, end, &p.hall);

        TraceRecord {
            time: end,
            position: self.vehicle.position,
            speed_true: self.vehicle.speed,
            speed_est: self.supervisor.last_speed_estimate,
            lanes_true: self.scenario.lanes_at(self.vehicle.position),
            limit: self.supervisor.current_limit,
            overspeed_active: self.supervisor.overspeed_active,
            motor_energized: self.motor_energized,
            piston_position: self.actuator.piston_position,
            chamber_pressure: self.actuator.chamber_pressure,
            brake_torque: self.actuator.brake_torque,
            drive_force: self.drive_force,
        }
    }

    /// Runs to the end of the scenario, keeping every `trace_decimation`-th record.
    pub fn run(&mut self) -> Vec<TraceRecord> {
        let total = self.total_steps();
        let decimation = u64::from(self.cfg.trace_decimation);
        let mut trace = Vec::with_capacity((total / decimation) as usize + 1);
        while self.step_index < total {
            let rec = self.step();
            if self.step_index.is_multiple_of(decimation) {
                trace.push(rec);
            }
        }
        trace
    }
}

/// Runs a scenario from start to finish.
pub fn run_scenario(scenario: &Scenario, cfg: &SimConfig) -> Result<(Vec<TraceRecord>, RunSummary), ValidationError> {
    let mut sim = Simulation::new(scenario.clone(), *cfg)?;
    let trace = sim.run();
    let summary = summarize(&trace, &scenario.params.limits, scenario);
    Ok((trace, summary))
}
