//! File formats and command-line plumbing for the `scss-core` simulator:
//! TOML scenarios in, CSV traces and JSON run summaries out.

mod error;
pub mod output;
pub mod scenario_file;

use std::path::Path;

pub use error::CliError;
pub use output::{read_summary, summary_json, write_summary, write_trace, write_trace_to, CSV_HEADER};
pub use scenario_file::{load_scenario, parse_scenario};

use scss_core::sim::{run_scenario, RunSummary, Scenario, SimConfig, TraceRecord};

/// Runs a scenario and checks the trace for values the writers cannot
/// represent.
pub fn simulate(scenario: &Scenario, cfg: &SimConfig) -> Result<(Vec<TraceRecord>, RunSummary), CliError> {
    let (trace, summary) = run_scenario(scenario, cfg).map_err(|source| CliError::Validation {
        path: scenario.name.clone().into(),
        source,
    })?;
    let finite = |r: &TraceRecord| {
        [
            r.time,
            r.position,
            r.speed_true,
            r.speed_est,
            r.limit,
            r.piston_position,
            r.chamber_pressure,
            r.brake_torque,
            r.drive_force,
        ]
        .iter()
        .all(|v| v.is_finite())
    };
    if let Some(bad) = trace.iter().find(|r| !finite(r)) {
        return Err(CliError::Internal(format!("non-finite state at t={}", bad.time)));
    }
    if trace.windows(2).any(|w| w[1].time <= w[0].time) {
        return Err(CliError::Internal("trace time went backwards".into()));
    }
    Ok((trace, summary))
}

/// Loads, runs and writes one scenario. `seed` overrides the file's seed.
pub fn run_file(
    scenario_path: &Path,
    out: &Path,
    summary_path: Option<&Path>,
    seed: Option<u64>,
) -> Result<RunSummary, CliError> {
    let (mut scenario, cfg) = load_scenario(scenario_path)?;
    if let Some(seed) = seed {
        scenario.seed = seed;
    }
    let (trace, summary) = simulate(&scenario, &cfg)?;
    write_trace(&trace, out)?;
    if let Some(path) = summary_path {
        write_summary(&summary, path)?;
    }
    Ok(summary)
}
