//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use scss::{load_scenario, run_file, simulate};
use scss_core::actuator_ctrl::{PulserConfig, PulserState};
use scss_core::link::harness::{fuzz_decode, resync_trials, round_trip_sweep};
use scss_core::link::Message;
use scss_core::plant::{ActuatorParams, BrakeActuatorState};
use scss_core::sensors::{HallConfig, PulseLog};
use scss_core::sim::{SimConfig, Simulation};
use scss_core::supervisor::{SpeedLimitTable, SupervisorConfig, SupervisorState};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name)
}

fn ensure(cond: bool, msg: String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg)
    }
}

fn closed_loop_compliance() -> Outcome {
    let started = Instant::now();
    let (scenario, cfg) = load_scenario(&scenario("arterial_full_throttle.toml")).map_err(|e| e.to_string())?;
    let cfg = SimConfig {
        trace_decimation: 1,
        ..cfg
    };
    let (trace, _) = simulate(&scenario, &cfg).map_err(|e| e.to_string())?;
    let elapsed = started.elapsed().as_secs_f64();

    let bound = 13.89 + 0.5;
    ensure(
        scenario.duration == 60.0 && trace.iter().all(|r| r.lanes_true == 2),
        "scenario is not 60 s on 2 lanes".into(),
    )?;
    let activated = trace
        .iter()
        .position(|r| r.overspeed_active)
        .ok_or("overspeed command never activated")?;
    let back = activated
        + trace[activated..]
            .iter()
            .position(|r| r.speed_true <= bound)
            .ok_or("speed never returned under the bound")?;
    let peak_after = trace[back..].iter().map(|r| r.speed_true).fold(0.0, f64::max);
    ensure(
        peak_after <= bound,
        format!("speed rose to {peak_after:.3} after compliance"),
    )?;
    ensure(elapsed < 5.0, format!("run took {elapsed:.2} s"))?;
    let peak = trace.iter().map(|r| r.speed_true).fold(0.0, f64::max);
    Ok(format!(
        "active at {:.2} s, peak {peak:.2}, back under {bound} at {:.2} s, max afterwards {peak_after:.3}, {elapsed:.2} s wall",
        trace[activated].time, trace[back].time
    ))
}

fn estimator_accuracy() -> Outcome {
    let r = 0.3;
    let v = 20.0;
    let cfg = HallConfig::default();
    let mut log = PulseLog::new();
    let mut worst: f64 = 0.0;
    for k in 1..=10_000 {
        let t = f64::from(k) * 1e-3;
        log.emit(v * t / r, t, &cfg);
        if log.len() >= 3 {
            worst = worst.max((log.estimate_speed(t, r, &cfg) - v).abs() / v);
        }
    }
    ensure(worst < 0.005, format!("relative error {worst:.2e} after 3 pulses"))?;

    let ideal = HallConfig {
        timer_resolution: 0.0,
        smoothing_window: 1,
        ..cfg
    };
    let mut log = PulseLog::new();
    let mut exact_worst: f64 = 0.0;
    for k in 1..=10_000 {
        let t = f64::from(k) * 1e-3;
        if log.emit(v * t / r, t, &ideal) > 0 && log.len() >= 2 {
            let at = *log.timestamps().last().unwrap();
            exact_worst = exact_worst.max((log.estimate_speed(at, r, &ideal) - v).abs() / v);
        }
    }
    ensure(exact_worst < 1e-9, format!("ideal timer error {exact_worst:.2e}"))?;
    Ok(format!(
        "worst error {:.4}% (defaults), {exact_worst:.1e} (ideal timer)",
        worst * 100.0
    ))
}

fn chamber_fixed_point() -> Outcome {
    let p = ActuatorParams::default();
    let closed = p.steady_state_pressure();
    let mut fine = BrakeActuatorState::default();
    for _ in 0..1_000_000 {
        fine = fine.step(true, 1e-5, &p);
    }
    let oracle = fine.chamber_pressure;
    ensure(
        (closed - oracle).abs() / oracle < 1e-6,
        format!("closed form {closed} vs long run {oracle}"),
    )?;
    ensure((closed - 7.5e5).abs() < 1e-6, format!("closed form {closed}"))?;
    let mut s = BrakeActuatorState::default();
    for _ in 0..5000 {
        s = s.step(true, 1e-3, &p);
    }
    let rel = (s.chamber_pressure - 7.5e5).abs() / 7.5e5;
    ensure(rel < 0.01, format!("{} Pa after 5 s", s.chamber_pressure))?;
    Ok(format!(
        "{:.1} Pa after 5 s ({:.3}% off), long-run oracle {oracle:.1}",
        s.chamber_pressure,
        rel * 100.0
    ))
}

fn pulser_duty() -> Outcome {
    let cfg = PulserConfig::default();
    ensure(
        cfg.pulse_frequency == 5.0 && cfg.duty_fraction == 0.6,
        "pulser defaults changed".into(),
    )?;
    let mut s = PulserState::new();
    s.handle_message(&Message::Heartbeat { seq: 0, time_ms: 0 }, 0.0);
    s.handle_message(
        &Message::BrakeCmd {
            seq: 1,
            active: true,
            duty_percent: 0,
            freq_decihertz: 0,
        },
        0.0,
    );
    let mut seq = 1u8;
    let mut samples = Vec::with_capacity(10_000);
    for k in 0..10_000u32 {
        let now = f64::from(k) * 1e-3;
        if k % 100 == 0 {
            seq = seq.wrapping_add(1);
            s.handle_message(&Message::Heartbeat { seq, time_ms: k }, now);
        }
        samples.push(s.update(&cfg, now));
    }
    let fraction = samples.iter().filter(|&&b| b).count() as f64 / samples.len() as f64;
    ensure(
        (fraction - 0.6).abs() <= 0.006,
        format!("energized fraction {fraction}"),
    )?;
    let period = (1.0 / cfg.pulse_frequency / cfg.tick_period).round() as usize;
    let periods = samples.len() / period;
    for (i, chunk) in samples.chunks_exact(period).enumerate() {
        ensure(chunk.iter().any(|&b| !b), format!("period {i} never released"))?;
    }
    Ok(format!(
        "energized fraction {fraction:.4}, {periods} periods each with an off interval"
    ))
}

fn protocol() -> Outcome {
    let (checked, failures) = round_trip_sweep();
    ensure(failures == 0, format!("{failures} of {checked} round trips failed"))?;
    let fuzz = fuzz_decode(1_000_000, 0x5EED);
    ensure(
        fuzz.bytes_fed == 1_000_000 && fuzz.conservation_violations == 0,
        format!("fuzz: {fuzz:?}"),
    )?;
    let resync = resync_trials(10_000, 0x5EED);
    let rate = resync.recovery_rate();
    ensure(rate >= 0.99, format!("resync {rate}"))?;
    Ok(format!(
        "{checked} round trips, 1e6 fuzz bytes with 0 fatal errors ({} frames rejected), resync {:.2}%",
        fuzz.errors,
        rate * 100.0
    ))
}

fn watchdog() -> Outcome {
    let (scenario, cfg) = load_scenario(&scenario("link_outage.toml")).map_err(|e| e.to_string())?;
    let outage = scenario.params.uplink_outage_at.ok_or("scenario has no outage")?;
    let timeout = scenario.params.pulser.watchdog_timeout;
    let mut sim = Simulation::new(scenario, cfg).map_err(|e| e.to_string())?;
    let mut active_at_outage = None;
    let mut last_on = f64::NEG_INFINITY;
    while !sim.is_finished() {
        let now = sim.time();
        sim.step();
        if active_at_outage.is_none() && now >= outage {
            active_at_outage = Some(sim.supervisor().overspeed_active && sim.pulser().active);
        }
        let fed = sim.pulser().last_heartbeat_at;
        if sim.motor_energized() {
            last_on = now;
            ensure(
                now <= fed + timeout + 1e-3 + 1e-9,
                format!("energized at {now:.3} s, last heartbeat {fed:.3} s"),
            )?;
        }
    }
    ensure(
        active_at_outage == Some(true),
        "outage did not land mid-intervention".into(),
    )?;
    let fed = sim.pulser().last_heartbeat_at;
    Ok(format!(
        "last heartbeat {fed:.3} s, last energized {last_on:.3} s ({:.1} ms after timeout)",
        (last_on - fed - timeout) * 1e3
    ))
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut checked = Vec::new();
    for name in ["highway_exit.toml", "lossy_link.toml"] {
        let src = scenario(name);
        let mut outputs = Vec::new();
        for run in 0..2 {
            let csv = dir.path().join(format!("{name}.{run}.csv"));
            let json = dir.path().join(format!("{name}.{run}.json"));
            run_file(&src, &csv, Some(&json), Some(1234)).map_err(|e| e.to_string())?;
            outputs.push((fs::read(&csv).unwrap(), fs::read(&json).unwrap()));
        }
        ensure(outputs[0].0 == outputs[1].0, format!("{name}: CSV differs"))?;
        ensure(outputs[0].1 == outputs[1].1, format!("{name}: JSON differs"))?;
        checked.push(format!("{name} ({} B csv)", outputs[0].0.len()));
    }
    Ok(format!("byte-identical: {}", checked.join(", ")))
}

fn hysteresis_debounce() -> Outcome {
    let cfg = SupervisorConfig::default();
    let table = SpeedLimitTable::default();
    let limit = table.fallback_limit;
    let (lo, hi) = (cfg.release_factor * limit, cfg.engage_factor * limit);
    let span = (cfg.debounce / cfg.tick_period).round() as usize;
    let trace = prop::collection::vec(
        prop_oneof![lo - 1.0..lo, lo..hi, hi..hi + 1.0, 0.0f64..limit * 1.3],
        100..800,
    );
    let mut runner = TestRunner::new(Config {
        cases: 512,
        failure_persistence: None,
        ..Config::default()
    });
    let result = runner.run(&trace, |speeds| {
        let mut s = SupervisorState::new(&table);
        let mut history: Vec<f64> = Vec::new();
        for (k, &v) in speeds.iter().enumerate() {
            let was = s.overspeed_active;
            s.update(&cfg, &table, v, None, k as f64 * cfg.tick_period);
            history.push(v);
            if s.overspeed_active != was {
                prop_assert!(v <= lo || v >= hi, "edge at {} inside the band", v);
            }
            if s.overspeed_active && !was {
                prop_assert!(history.len() > span);
                let window = &history[history.len() - 1 - span..];
                prop_assert!(
                    window.iter().all(|&u| u > hi),
                    "activation without {} s of over-speed",
                    cfg.debounce
                );
            }
        }
        Ok(())
    });
    result.map_err(|e| e.to_string())?;
    Ok("512 random traces: no edges inside the band, every activation debounced".into())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("closed-loop compliance", closed_loop_compliance),
        ("estimator accuracy", estimator_accuracy),
        ("chamber pressure fixed point", chamber_fixed_point),
        ("pulser duty and off intervals", pulser_duty),
        ("protocol round trip, fuzz, resync", protocol),
        ("watchdog cut-off", watchdog),
        ("determinism", determinism),
        ("hysteresis and debounce", hysteresis_debounce),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS {}: {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {}: {name}: {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
