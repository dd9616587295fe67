use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use qfd_cli::{acceptance, commands, CliError, RunConfig};
use qfd_core::Execution;

#[derive(Parser)]
#[command(name = "qfd", version, about = "Double-well propagator series, Madelung fields and Bohmian trajectories")]
struct Cli {
    /// JSON run configuration; defaults are used when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory, overriding `output_dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Dotted `KEY=VALUE` override, e.g. `kernel.k_max=3`. Repeatable.
    #[arg(long = "override", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Evaluate sequentially even when built with the parallel feature.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print K(x0 → xt; duration) and its term table as JSON.
    Kernel {
        #[arg(long, allow_hyphen_values = true)]
        x0: f64,
        #[arg(long, allow_hyphen_values = true)]
        xt: f64,
    },
    /// Write wavefunction snapshots.
    Evolve,
    /// Write Madelung fields for each snapshot.
    Fields,
    /// Write trajectories and the tunneling summary.
    Trajectories,
    /// Run the acceptance suite and print one line per criterion.
    Verify {
        /// Exit with status 1 if any criterion fails.
        #[arg(long)]
        strict: bool,
    },
    /// Print the effective configuration.
    Config,
}

fn load(cli: &Cli) -> Result<RunConfig, CliError> {
    let base = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let mut cfg = base.with_overrides(&cli.overrides)?;
    if let Some(out) = &cli.out {
        cfg.output_dir = out.to_string_lossy().into_owned();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let cfg = load(cli)?;
    let execution = if cli.sequential { Execution::Sequential } else { Execution::default() };
    let dir = PathBuf::from(&cfg.output_dir);
    match &cli.command {
        Command::Kernel { x0, xt } => {
            let report = commands::kernel_report(&cfg, *x0, *xt)?;
            println!("{}", serde_json::to_string_pretty(&report).expect("json"));
        }
        Command::Evolve => {
            let snaps = commands::evolve_snapshots(&cfg, execution)?;
            commands::write_evolve(&cfg, &snaps, &dir)?;
        }
        Command::Fields => {
            let snaps = commands::evolve_snapshots(&cfg, execution)?;
            let fields = snaps.iter().map(|s| commands::madelung(&cfg, s)).collect::<Result<Vec<_>, _>>()?;
            commands::write_fields(&cfg, &fields, &dir)?;
        }
        Command::Trajectories => {
            let run = commands::trajectories(&cfg, execution)?;
            commands::write_trajectories(&cfg, &run, &dir)?;
        }
        Command::Verify { strict } => {
            let outcomes = acceptance::run_suite(&cfg);
            for o in &outcomes {
                println!("{}", o.line());
            }
            let failed = outcomes.iter().filter(|o| !o.passed).count();
            println!("{} of {} criteria passed", outcomes.len() - failed, outcomes.len());
            if *strict && failed > 0 {
                return Err(CliError::Acceptance { failed });
            }
        }
        Command::Config => print!("{}", cfg.to_json()),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", json!({ "error": e.name(), "message": e.to_string() }));
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
