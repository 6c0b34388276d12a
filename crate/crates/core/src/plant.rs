//! Physical truth of the simulation.
//!
//! The vehicle is a point mass with quadratic drag, rolling resistance and a
//! brake torque acting at the wheel radius. The brake chain is a geared DC
//! motor turning a pinion that drives a rack-mounted piston into a compression
//! chamber; chamber pressure feeds the calipers.
//!
//! The motor/pinion is solved quasi-statically: at each step the output shaft
//! runs at the speed where the linear torque-speed line meets the hydraulic
//! load. There is no rotor inertia and no tire slip.

use crate::{check, ValidationError};

/// Longitudinal vehicle parameters, SI units.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(default, deny_unknown_fields)
)]
pub struct VehicleParams {
    pub mass: f64,
    pub wheel_radius: f64,
    /// Lumped ½·ρ·C_d·A, N·s²/m².
    pub drag_coeff: f64,
    pub rolling_coeff: f64,
    pub max_drive_force: f64,
    pub gravity: f64,
}

impl Default for VehicleParams {
    fn default() -> Self {
        Self {
            mass: 1200.0,
            wheel_radius: 0.30,
            drag_coeff: 0.392,
            rolling_coeff: 0.012,
            max_drive_force: 4000.0,
            gravity: 9.81,
        }
    }
}

impl VehicleParams {
    pub fn validate(&self) -> Result<(), ValidationError> {
        check(self.mass > 0.0, "mass", "must be > 0")?;
        check(
            self.wheel_radius > 0.0 && self.wheel_radius < 1.0,
            "wheel_radius",
            "must be in (0, 1) m",
        )?;
        check(self.drag_coeff > 0.0, "drag_coeff", "must be > 0")?;
        check(self.rolling_coeff > 0.0, "rolling_coeff", "must be > 0")?;
        check(self.max_drive_force > 0.0, "max_drive_force", "must be > 0")?;
        check(self.gravity > 0.0, "gravity", "must be > 0")
    }

    /// Net resistive force (drag plus rolling) at speed `v`, ignoring the brake.
    pub fn resistance(&self, v: f64) -> f64 {
        self.drag_coeff * v * v + self.rolling_coeff * self.mass * self.gravity
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct VehicleState {
    pub time: f64,
    pub position: f64,
    pub speed: f64,
    /// Cumulative wheel rotation, rad.
    pub wheel_angle: f64,
    pub drive_force_applied: f64,
}

/// Brake chain parameters. Motor figures are before the gearbox.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(default, deny_unknown_fields)
)]
pub struct ActuatorParams {
    pub motor_stall_torque: f64,
    pub motor_noload_speed: f64,
    pub gear_ratio: f64,
    pub gear_efficiency: f64,
    pub pinion_radius: f64,
    pub master_piston_area: f64,
    pub caliper_piston_area: f64,
    pub pad_friction: f64,
    pub rotor_effective_radius: f64,
    pub piston_preload_force: f64,
    /// Chamber pressure per metre of piston travel, Pa/m.
    pub pressure_gain: f64,
    pub piston_travel_max: f64,
    pub release_time_constant: f64,
    pub brake_corner_count: u32,
}

impl Default for ActuatorParams {
    fn default() -> Self {
        Self {
            motor_stall_torque: 0.02,
            motor_noload_speed: 1047.0,
            gear_ratio: 100.0,
            gear_efficiency: 0.8,
            pinion_radius: 0.01,
            master_piston_area: 2.0e-4,
            caliper_piston_area: 8.0e-4,
            pad_friction: 0.4,
            rotor_effective_radius: 0.12,
            piston_preload_force: 10.0,
            pressure_gain: 5.0e7,
            piston_travel_max: 0.02,
            release_time_constant: 0.15,
            brake_corner_count: 4,
        }
    }
}

impl ActuatorParams {
    pub fn validate(&self) -> Result<(), ValidationError> {
        let positive = [
            (self.motor_stall_torque, "motor_stall_torque"),
            (self.motor_noload_speed, "motor_noload_speed"),
            (self.gear_ratio, "gear_ratio"),
            (self.gear_efficiency, "gear_efficiency"),
            (self.pinion_radius, "pinion_radius"),
            (self.master_piston_area, "master_piston_area"),
            (self.caliper_piston_area, "caliper_piston_area"),
            (self.pad_friction, "pad_friction"),
            (self.rotor_effective_radius, "rotor_effective_radius"),
            (self.piston_preload_force, "piston_preload_force"),
            (self.pressure_gain, "pressure_gain"),
            (self.piston_travel_max, "piston_travel_max"),
            (self.release_time_constant, "release_time_constant"),
        ];
        for (value, name) in positive {
            check(value > 0.0, name, "must be > 0")?;
        }
        check(self.gear_efficiency <= 1.0, "gear_efficiency", "must be <= 1")?;
        check(self.brake_corner_count > 0, "brake_corner_count", "must be > 0")
    }

    /// Output-shaft torque available at standstill, η·G·T_stall.
    pub fn output_stall_torque(&self) -> f64 {
        self.gear_efficiency * self.gear_ratio * self.motor_stall_torque
    }

    /// Chamber pressure where the stalled motor exactly balances the piston load.
    pub fn steady_state_pressure(&self) -> f64 {
        (self.output_stall_torque() / self.pinion_radius - self.piston_preload_force) / self.master_piston_area
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BrakeActuatorState {
    pub piston_position: f64,
    pub chamber_pressure: f64,
    pub output_shaft_speed: f64,
    pub brake_torque: f64,
    pub motor_energized: bool,
}

/// Gearbox output torque of the motor on a linear torque-speed line.
pub fn motor_output_torque(energized: bool, output_shaft_speed: f64, params: &ActuatorParams) -> f64 {
    if !energized {
        return 0.0;
    }
    let motor_speed = params.gear_ratio * output_shaft_speed;
    let fraction = (1.0 - motor_speed / params.motor_noload_speed).max(0.0);
    params.output_stall_torque() * fraction
}

/// Disc brake torque summed over all actuated corners.
pub fn brake_torque_from_pressure(pressure: f64, params: &ActuatorParams) -> f64 {
    let clamp_force = pressure.max(0.0) * params.caliper_piston_area;
    f64::from(params.brake_corner_count) * 2.0 * params.pad_friction * clamp_force * params.rotor_effective_radius
}

impl BrakeActuatorState {
    fn at_position(piston_position: f64, output_shaft_speed: f64, energized: bool, params: &ActuatorParams) -> Self {
        let chamber_pressure = params.pressure_gain * piston_position;
        Self {
            piston_position,
            chamber_pressure,
            output_shaft_speed,
            brake_torque: brake_torque_from_pressure(chamber_pressure, params),
            motor_energized: energized,
        }
    }

    /// Advances the brake chain by `dt`.
    pub fn step(&self, energized: bool, dt: f64, params: &ActuatorParams) -> Self {
        if energized {
            let load_force = self.chamber_pressure * params.master_piston_area + params.piston_preload_force;
            let load_torque = load_force * params.pinion_radius;
            let free_speed = params.motor_noload_speed / params.gear_ratio;
            let omega = free_speed * (1.0 - load_torque / params.output_stall_torque()).max(0.0);
            let target = self.piston_position + params.pinion_radius * omega * dt;
            let position = target.clamp(0.0, params.piston_travel_max);
            let achieved = (position - self.piston_position) / (params.pinion_radius * dt);
            Self::at_position(position, achieved.max(0.0), true, params)
        } else {
            let decay = libm::exp(-dt / params.release_time_constant);
            Self::at_position(self.piston_position * decay, 0.0, false, params)
        }
    }
}

/// Free-function form of [`BrakeActuatorState::step`].
pub fn step_actuator(
    state: &BrakeActuatorState,
    energized: bool,
    dt: f64,
    params: &ActuatorParams,
) -> BrakeActuatorState {
    state.step(energized, dt, params)
}

impl VehicleState {
    /// One explicit Euler step of the longitudinal model. Speed never goes
    /// negative: resistive and brake forces can only bring the car to rest.
    pub fn step(&self, drive_force: f64, brake_torque: f64, dt: f64, params: &VehicleParams) -> Self {
        let drive = drive_force.clamp(0.0, params.max_drive_force);
        let brake_force = brake_torque.max(0.0) / params.wheel_radius;
        let net = drive - params.resistance(self.speed) - brake_force;
        let speed = (self.speed + net / params.mass * dt).max(0.0);
        let advance = self.speed * dt;
        Self {
            time: self.time + dt,
            position: self.position + advance,
            speed,
            wheel_angle: self.wheel_angle + advance / params.wheel_radius,
            drive_force_applied: drive,
        }
    }
}

/// Free-function form of [`VehicleState::step`].
pub fn step_vehicle(
    state: &VehicleState,
    drive_force: f64,
    brake_torque: f64,
    dt: f64,
    params: &VehicleParams,
) -> VehicleState {
    state.step(drive_force, brake_torque, dt, params)
}
