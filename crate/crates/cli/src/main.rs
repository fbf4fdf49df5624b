use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use cwlab_cli::config::{defaults_text, load_config, Scenario};
use cwlab_cli::output::write_outputs;
use cwlab_cli::scenario::run_scenario;

/// Numerical laboratory for the viscous contact wave.
#[derive(Debug, Parser)]
#[command(name = "cwlab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one scenario and write its tables, summary.csv and report.json.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; overrides the config file.
        #[arg(long, env = "CWLAB_OUT_DIR")]
        out: Option<PathBuf>,
        /// Scenario; overrides the config file.
        #[arg(long)]
        scenario: Option<Scenario>,
    },
    /// Print the default configuration.
    Defaults,
}

const EXIT_CHECK_FAILED: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_SOLVER: u8 = 3;
const EXIT_IO: u8 = 4;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match cli.command {
        Command::Defaults => {
            print!("{}", defaults_text());
            ExitCode::SUCCESS
        }
        Command::Run {
            config,
            out,
            scenario,
        } => run(config, out, scenario),
    }
}

fn run(config: PathBuf, out: Option<PathBuf>, scenario: Option<Scenario>) -> ExitCode {
    let mut cfg = match load_config(&config, scenario) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    if let Some(dir) = out {
        cfg.output_dir = dir;
    }
    log::info!("running {} into {}", cfg.scenario, cfg.output_dir.display());
    let mut outcome = run_scenario(&cfg);
    if let Err(e) = write_outputs(&mut outcome.report, &outcome.tables, &cfg.output_dir) {
        eprintln!(
            "error: cannot write outputs to {}: {e}",
            cfg.output_dir.display()
        );
        return ExitCode::from(EXIT_IO);
    }
    for c in &outcome.report.checks {
        println!(
            "{} {} measured={:?} threshold={:?}",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.measured,
            c.threshold
        );
    }
    println!("wall clock {:.2} s", outcome.report.wall_clock_seconds);
    if let Some(e) = &outcome.report.error {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_SOLVER);
    }
    if outcome.report.all_pass() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_CHECK_FAILED)
    }
}
