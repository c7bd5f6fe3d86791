//! Command-line front end. Exit codes: 0 success, 1 an expectation failed,
//! 2 usage or configuration error.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use super::presets::{run_battery, run_with_oracle, BatteryOptions};
use super::report::{to_csv, to_json, ScenarioReport};
use super::table1::{render_csv, render_text, table1_report};
use super::{parse_scenario, run_enumeration, run_scenario, Scenario};
use crate::error::{QkdError, Result};

/// Environment variable naming the default directory for `report` output.
pub const OUT_DIR_ENV: &str = "QKDSIM_OUT_DIR";
pub const DEFAULT_OUT_DIR: &str = "qkdsim-out";

pub const EXIT_OK: i32 = 0;
pub const EXIT_EXPECTATION: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Parser)]
#[command(name = "qkdsim", about = "Basis-keyed QKD and BB84 simulator")]
pub struct Cli {
    /// Master seed, replacing the seed of every scenario run.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a scenario file in its own mode.
    Run {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Evaluate a scenario file with the exact enumeration oracle.
    Enumerate {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Print the intercept-resend table for Alice sending |0>_z.
    Table1 {
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Run the preset battery and check every expectation.
    AttackSuite {
        /// Rounds per Monte Carlo twin of each enumerable preset.
        #[arg(long, default_value_t = 200_000)]
        oracle_rounds: u64,
    },
    /// Write reports for the given scenario files, or for the preset
    /// battery when none are given.
    Report {
        #[arg(long, value_enum)]
        format: Format,
        files: Vec<PathBuf>,
        /// Output directory; defaults to $QKDSIM_OUT_DIR, then ./qkdsim-out.
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[arg(long, default_value_t = 200_000)]
        oracle_rounds: u64,
    },
}

fn load(path: &Path, seed: Option<u64>) -> Result<Scenario> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| QkdError::Io(format!("{}: {e}", path.display())))?;
    let mut scenario = parse_scenario(&text).map_err(|e| match e {
        QkdError::Config { line, message } => {
            QkdError::Io(format!("{}:{line}: {message}", path.display()))
        }
        other => other,
    })?;
    if let Some(seed) = seed {
        scenario.session.rng_seed = seed;
    }
    Ok(scenario)
}

fn render(reports: &[ScenarioReport], format: Format) -> String {
    match format {
        Format::Json => to_json(reports) + "\n",
        Format::Csv => to_csv(reports),
        Format::Text => render_summary(reports),
    }
}

/// One line per metric and one PASS/FAIL line per expectation.
pub fn render_summary(reports: &[ScenarioReport]) -> String {
    let mut out = String::new();
    for r in reports {
        out.push_str(&format!("== {} ({})\n", r.scenario, r.mode));
        for (name, value) in r.metrics.iter() {
            let detail = match (value.exact(), value.stderr()) {
                (Some(q), _) => format!(" = {q}"),
                (_, Some(se)) => format!(" +- {se:.2e}"),
                _ => String::new(),
            };
            out.push_str(&format!("  {name:<34} {:.6}{detail}\n", value.value()));
        }
        for e in &r.expectations {
            let observed = e.observed.map(|v| format!("{v:.6}")).unwrap_or_else(|| "missing".into());
            out.push_str(&format!(
                "  {} {} = {:.6} +- {:.2e} (observed {observed})\n",
                if e.pass { "PASS" } else { "FAIL" },
                e.metric,
                e.expected,
                e.tolerance
            ));
        }
    }
    out
}

fn status(reports: &[ScenarioReport]) -> i32 {
    if reports.iter().all(ScenarioReport::passed) {
        EXIT_OK
    } else {
        EXIT_EXPECTATION
    }
}

fn out_dir(explicit: Option<PathBuf>) -> PathBuf {
    explicit
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
}

fn execute(cli: Cli, stdout: &mut dyn Write) -> Result<i32> {
    let io = |e: std::io::Error| QkdError::Io(e.to_string());
    let seed = cli.seed;
    match cli.command {
        Command::Run { file, format } => {
            let reports = vec![run_scenario(&load(&file, seed)?)?];
            stdout.write_all(render(&reports, format).as_bytes()).map_err(io)?;
            Ok(status(&reports))
        }
        Command::Enumerate { file, format } => {
            let reports = vec![run_enumeration(&load(&file, seed)?)?];
            stdout.write_all(render(&reports, format).as_bytes()).map_err(io)?;
            Ok(status(&reports))
        }
        Command::Table1 { format } => {
            let rows = table1_report();
            let text = match format {
                Format::Json => serde_json::to_string_pretty(&rows).expect("rows serialize") + "\n",
                Format::Csv => render_csv(&rows),
                Format::Text => render_text(&rows),
            };
            stdout.write_all(text.as_bytes()).map_err(io)?;
            Ok(EXIT_OK)
        }
        Command::AttackSuite { oracle_rounds } => {
            let reports = run_battery(BatteryOptions { seed, oracle_rounds })?;
            stdout.write_all(render_summary(&reports).as_bytes()).map_err(io)?;
            let total: usize = reports.iter().map(|r| r.expectations.len()).sum();
            let failed: usize = reports.iter().map(|r| r.failures().count()).sum();
            writeln!(stdout, "{} of {total} expectations passed", total - failed).map_err(io)?;
            Ok(status(&reports))
        }
        Command::Report { format, files, out_dir: dir, oracle_rounds } => {
            let reports = if files.is_empty() {
                run_battery(BatteryOptions { seed, oracle_rounds })?
            } else {
                let mut all = Vec::new();
                for f in &files {
                    all.extend(run_with_oracle(&load(f, seed)?, 0)?);
                }
                all
            };
            let dir = out_dir(dir);
            std::fs::create_dir_all(&dir).map_err(|e| QkdError::Io(format!("{}: {e}", dir.display())))?;
            let ext = match format {
                Format::Json => "json",
                Format::Csv => "csv",
                Format::Text => "txt",
            };
            let path = dir.join(format!("report.{ext}"));
            std::fs::write(&path, render(&reports, format))
                .map_err(|e| QkdError::Io(format!("{}: {e}", path.display())))?;
            writeln!(stdout, "{}", path.display()).map_err(io)?;
            Ok(status(&reports))
        }
    }
}

/// Parses `args` (including the program name) and runs the command,
/// writing results to `stdout` and diagnostics to `stderr`.
pub fn cli_run(args: &[String], stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(stderr, "{e}");
                return EXIT_CONFIG;
            }
            let _ = write!(stdout, "{e}");
            return EXIT_OK;
        }
    };
    match execute(cli, stdout) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_CONFIG
        }
    }
}

pub fn cli_main(args: &[String]) -> i32 {
    cli_run(args, &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}
