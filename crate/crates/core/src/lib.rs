//! Simulation core for a lane-aware vehicle speed control system.
//!
//! A supervisor node reads the lane count of the current road and a Hall-effect
//! wheel speed estimate, resolves the legal limit and commands braking over a
//! framed serial link. An actuator node turns that command into a pulsed on/off
//! drive for a geared DC motor pushing a rack-and-pinion brake piston, so the
//! brakes are modulated rather than held.
//!
//! Everything here is `no_std` (with `alloc`) and free of IO. File formats,
//! CSV traces and the command line live in the `scss` crate.
//!
//! Module map:
//!
//! - [`plant`]: vehicle longitudinal dynamics and the motor → pinion → piston →
//!   caliper brake chain.
//! - [`sensors`]: Hall pulse generation, period-based speed estimation and the
//!   noisy lane-count observer.
//! - [`supervisor`]: speed-limit table and the over-speed state machine.
//! - [`actuator_ctrl`]: brake pulser with heartbeat watchdog.
//! - [`link`]: CRC-8 framed wire protocol, resynchronizing stream decoder and a
//!   lossy byte channel.
//! - [`sim`]: fixed-step scheduler, scenarios, traces and run summaries.

#![no_std]

extern crate alloc;

pub mod actuator_ctrl;
pub mod error;
pub mod link;
pub mod plant;
pub mod sensors;
pub mod sim;
pub mod supervisor;

pub use error::ValidationError;

/// km/h per m/s.
pub const KMH_PER_MPS: f64 = 3.6;

/// Converts a posted limit in km/h into m/s, rounded to four decimals.
pub fn kmh_to_mps(kmh: f64) -> f64 {
    libm::round(kmh / KMH_PER_MPS * 1.0e4) / 1.0e4
}

pub(crate) fn check(cond: bool, field: &str, reason: &str) -> Result<(), ValidationError> {
    if cond {
        Ok(())
    } else {
        Err(ValidationError::new(field, reason))
    }
}
