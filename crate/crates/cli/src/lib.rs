//! Command-line front end: scenario files in, TOML reports, CSV series and
//! plot stubs out.

pub mod commands;
pub mod error;
pub mod output;
pub mod report;
pub mod scenario;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::commands::GridKind;
pub use crate::error::{CliError, CliResult};
use crate::report::to_toml;
use crate::scenario::{Output, Scenario};

#[derive(Debug, Parser)]
#[command(
    name = "delay-hopf",
    version,
    about = "Stability and Hopf analysis of a delayed financial system"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Scenario file (TOML).
    #[arg(long)]
    pub scenario: PathBuf,
    /// Directory for reports, CSV files and plot stubs.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Single delay, overriding the scenario's `tau`.
    #[arg(long, allow_negative_numbers = true)]
    pub tau: Option<f64>,
    /// Worker threads for multi-delay runs.
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List the equilibria.
    Equilibria(Common),
    /// Stability regime of the chosen equilibrium.
    Stability(Common),
    /// Crossing frequency, critical delays and transversality.
    CriticalDelay(Common),
    /// Integrate the delay system.
    Simulate(Common),
    /// Regime, root count and envelope over a delay grid.
    Sweep(Common),
    /// Like `sweep`, failing with status 4 on any disagreement.
    CrossCheck(Common),
    /// Re-read a report and recompute what it claims.
    ValidateReport {
        #[arg(long)]
        report: PathBuf,
    },
}

/// What a run printed and wrote, plus the failure that sets its status.
#[derive(Debug, Default)]
pub struct Outcome {
    pub stdout: String,
    pub files: Vec<PathBuf>,
    pub error: Option<CliError>,
}

impl Outcome {
    pub fn exit_code(&self) -> u8 {
        self.error.as_ref().map_or(0, CliError::exit_code)
    }

    fn failed(error: CliError) -> Self {
        Outcome {
            error: Some(error),
            ..Outcome::default()
        }
    }
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map_or_else(|| "scenario".into(), |s| s.to_string_lossy().into_owned())
}

fn finish(s: &Scenario, c: &Common, kind: &str, text: String, mut files: Vec<PathBuf>) -> CliResult<Outcome> {
    if s.wants(Output::Report) {
        output::ensure_dir(&c.out)?;
        let path = c.out.join(format!("{}_{kind}.toml", stem(&c.scenario)));
        output::write_file(&path, &text)?;
        files.push(path);
    }
    Ok(Outcome {
        stdout: text,
        files,
        error: None,
    })
}

fn run_scenario(command: &Command, c: &Common) -> CliResult<Outcome> {
    let s = Scenario::load(&c.scenario)?;
    match command {
        Command::Equilibria(_) => finish(&s, c, "equilibria", to_toml(&commands::equilibria_report(&s)?)?, vec![]),
        Command::Stability(_) => finish(&s, c, "stability", to_toml(&commands::stability_report(&s)?)?, vec![]),
        Command::CriticalDelay(_) => finish(
            &s,
            c,
            "critical-delay",
            to_toml(&commands::critical_delay_report(&s)?)?,
            vec![],
        ),
        Command::Simulate(_) => {
            let name = stem(&c.scenario);
            let wants_series = s.outputs.iter().any(|o| *o != Output::Report);
            if wants_series {
                output::ensure_dir(&c.out)?;
            }
            let (report, files) = commands::simulate_report(&s, c.tau, c.jobs, Some((&c.out, &name)))?;
            finish(&s, c, "simulate", to_toml(&report)?, files)
        }
        Command::Sweep(_) | Command::CrossCheck(_) => {
            let (kind, name) = match command {
                Command::Sweep(_) => (GridKind::Sweep, "sweep"),
                _ => (GridKind::CrossCheck, "cross-check"),
            };
            let report = commands::grid_report(&s, c.tau, c.jobs, kind)?;
            let mut outcome = finish(&s, c, name, to_toml(&report)?, vec![])?;
            if kind == GridKind::CrossCheck && !report.passed {
                outcome.error = Some(CliError::Consistency(format!(
                    "{} disagreement(s), first: {}",
                    report.disagreements.len(),
                    report.disagreements[0].message
                )));
            }
            Ok(outcome)
        }
        Command::ValidateReport { .. } => unreachable!(),
    }
}

/// Executes a parsed command line.
pub fn run(cli: &Cli) -> Outcome {
    let result = match &cli.command {
        Command::ValidateReport { report } => std::fs::read_to_string(report)
            .map_err(|e| CliError::Io(format!("{}: {e}", report.display())))
            .and_then(|text| report::validate_report(&text))
            .map(|kind| Outcome {
                stdout: format!("ok: {kind} report {}\n", report.display()),
                ..Outcome::default()
            }),
        Command::Equilibria(c)
        | Command::Stability(c)
        | Command::CriticalDelay(c)
        | Command::Simulate(c)
        | Command::Sweep(c)
        | Command::CrossCheck(c) => run_scenario(&cli.command, c),
    };
    result.unwrap_or_else(Outcome::failed)
}
