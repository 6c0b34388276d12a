use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::thread;

use clap::{Parser, Subcommand};
use scss::{load_scenario, run_file, CliError};
use scss_core::link::harness::fuzz_decode;
use scss_core::supervisor::SpeedLimitTable;
use scss_core::KMH_PER_MPS;

#[derive(Debug, Parser)]
#[command(name = "scss", version, about = "Lane-aware speed control simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a scenario (or every *.toml in a directory) and write its trace.
    Run {
        #[arg(long)]
        scenario: PathBuf,
        /// CSV trace path, or a directory when --scenario is one.
        #[arg(long)]
        out: PathBuf,
        /// JSON summary path, or a directory when --scenario is one.
        #[arg(long)]
        summary: Option<PathBuf>,
        /// Overrides the scenario seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Feed seeded random bytes through the frame decoder.
    FuzzLink {
        #[arg(long)]
        bytes: u64,
        #[arg(long)]
        seed: u64,
    },
    /// Print the default speed-limit table.
    Table {
        #[arg(long)]
        show: bool,
    },
    /// Parse and check a scenario without running it.
    Validate {
        #[arg(long)]
        scenario: PathBuf,
    },
}

fn scenario_files(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let mut files = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| CliError::io(dir, e))? {
        let path = entry.map_err(|e| CliError::io(dir, e))?.path();
        if path.extension().is_some_and(|e| e == "toml") {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

fn run_dir(dir: &Path, out: &Path, summary: Option<&Path>, seed: Option<u64>) -> Result<(), CliError> {
    let files = scenario_files(dir)?;
    fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    if let Some(s) = summary {
        fs::create_dir_all(s).map_err(|e| CliError::io(s, e))?;
    }
    let results: Vec<_> = thread::scope(|scope| {
        let handles: Vec<_> = files
            .iter()
            .map(|file| {
                scope.spawn(move || {
                    let stem = file.file_stem().unwrap_or_default();
                    let csv = out.join(stem).with_extension("csv");
                    let json = summary.map(|s| s.join(stem).with_extension("json"));
                    run_file(file, &csv, json.as_deref(), seed)
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| {
                h.join()
                    .unwrap_or_else(|_| Err(CliError::Internal("scenario worker panicked".into())))
            })
            .collect()
    });
    let mut first_err = None;
    for (file, result) in files.iter().zip(results) {
        match result {
            Ok(s) => println!("{}: {} brake activations", file.display(), s.brake_activation_count),
            Err(e) if first_err.is_none() => first_err = Some(e),
            Err(e) => eprintln!("error: {e}"),
        }
    }
    first_err.map_or(Ok(()), Err)
}

fn dispatch(cmd: Command) -> Result<(), CliError> {
    match cmd {
        Command::Run {
            scenario,
            out,
            summary,
            seed,
        } => {
            if scenario.is_dir() {
                return run_dir(&scenario, &out, summary.as_deref(), seed);
            }
            let s = run_file(&scenario, &out, summary.as_deref(), seed)?;
            println!(
                "{}: {} brake activations, max overshoot {:.3} m/s",
                scenario.display(),
                s.brake_activation_count,
                s.max_overshoot
            );
            Ok(())
        }
        Command::FuzzLink { bytes, seed } => {
            let r = fuzz_decode(bytes, seed);
            println!("bytes_fed={}", r.bytes_fed);
            println!("calls={}", r.calls);
            println!("messages={}", r.messages);
            println!("errors={}", r.errors);
            println!("conservation_violations={}", r.conservation_violations);
            if r.conservation_violations > 0 {
                return Err(CliError::Internal("decoder lost or duplicated bytes".into()));
            }
            Ok(())
        }
        Command::Table { show } => {
            if !show {
                return Err(CliError::Parse {
                    path: "table".into(),
                    line: None,
                    message: "nothing to do, pass --show".into(),
                });
            }
            let table = SpeedLimitTable::default();
            println!("lanes,kmh,mps");
            for &(lanes, mps) in table.entries() {
                println!("{lanes},{},{mps}", (mps * KMH_PER_MPS).round());
            }
            println!(
                "fallback,{},{}",
                (table.fallback_limit * KMH_PER_MPS).round(),
                table.fallback_limit
            );
            Ok(())
        }
        Command::Validate { scenario } => {
            let (s, _) = load_scenario(&scenario)?;
            println!(
                "{}: ok ({} segments, {} s)",
                scenario.display(),
                s.road_segments.len(),
                s.duration
            );
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
