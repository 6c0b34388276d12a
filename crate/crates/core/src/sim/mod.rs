//! Deterministic fixed-step scheduler.
//!
//! One global plant step (1 ms by default) with integer tick dividers for the
//! supervisor, pulser and lane sensor. All randomness comes from per-component
//! ChaCha streams derived from the scenario seed, so a run is a pure function
//! of `(Scenario, SimConfig)`.

mod engine;
mod scenario;
mod summary;

pub use engine::{run_scenario, LinkStats, Simulation};
pub use scenario::{InhibitRelease, RoadSegment, Scenario, SimConfig, SystemParams, ThrottleStep};
pub use summary::{summarize, RunSummary, TraceRecord};
