use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use scss_core::sim::{RunSummary, TraceRecord};

use crate::CliError;

pub const CSV_HEADER: &str = "time,position,speed_true,speed_est,lanes_true,limit,overspeed_active,motor_energized,piston_position,chamber_pressure,brake_torque,drive_force";

/// `printf("%.6g")`: six significant digits, trailing zeros dropped,
/// exponent form outside 1e-4..1e6.
pub fn fmt_g6(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return if v.is_nan() {
            "nan".into()
        } else if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    // rounding to 6 digits first settles the exponent (999999.5 -> 1e+06)
    let sci = format!("{v:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..6).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (5 - exp) as usize;
        trim_zeros(&format!("{v:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn flag(b: bool) -> char {
    if b {
        '1'
    } else {
        '0'
    }
}

pub fn write_trace_to<W: Write>(trace: &[TraceRecord], mut w: W) -> io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in trace {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            fmt_g6(r.time),
            fmt_g6(r.position),
            fmt_g6(r.speed_true),
            fmt_g6(r.speed_est),
            r.lanes_true,
            fmt_g6(r.limit),
            flag(r.overspeed_active),
            flag(r.motor_energized),
            fmt_g6(r.piston_position),
            fmt_g6(r.chamber_pressure),
            fmt_g6(r.brake_torque),
            fmt_g6(r.drive_force),
        )?;
    }
    w.flush()
}

pub fn write_trace(trace: &[TraceRecord], path: &Path) -> Result<(), CliError> {
    let file = fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    write_trace_to(trace, BufWriter::new(file)).map_err(|e| CliError::io(path, e))
}

/// Pretty JSON with keys in lexicographic order.
pub fn summary_json(summary: &RunSummary) -> String {
    // serde_json's map is a BTreeMap, so going through a Value sorts the keys
    let value = serde_json::to_value(summary).expect("summary fields are plain numbers");
    let mut s = serde_json::to_string_pretty(&value).expect("value serializes");
    s.push('\n');
    s
}

pub fn write_summary(summary: &RunSummary, path: &Path) -> Result<(), CliError> {
    fs::write(path, summary_json(summary)).map_err(|e| CliError::io(path, e))
}

pub fn read_summary(path: &Path) -> Result<RunSummary, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Parse {
        path: path.to_path_buf(),
        line: Some(e.line()),
        message: e.to_string(),
    })
}
