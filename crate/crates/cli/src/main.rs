mod commands;
mod options;
mod output;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{CommandFactory, Parser, Subcommand};

use options::{
    EigenOptions, FitOptions, ObeOptions, SpectrumOptions, TrajectoryOptions, UsageError,
    WeightsOptions, ZeemanOptions,
};

/// Dressed-state spectroscopy of a doubly driven V system probed in an N
/// configuration. Frequencies are in MHz, powers in mW.
#[derive(Parser)]
#[command(name = "nspec", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    Eigen(EigenOptions),
    Spectrum(SpectrumOptions),
    Trajectory(TrajectoryOptions),
    Weights(WeightsOptions),
    Fit(FitOptions),
    Zeeman(ZeemanOptions),
    Obe(ObeOptions),
}

fn run(command: Command) -> anyhow::Result<()> {
    match command {
        Command::Eigen(o) => commands::eigen(o.resolve()?),
        Command::Spectrum(o) => commands::spectrum(o.resolve()?),
        Command::Trajectory(o) => commands::trajectory(o.resolve()?),
        Command::Weights(o) => commands::weights(o.resolve()?),
        Command::Fit(o) => commands::fit(o.resolve()?),
        Command::Zeeman(o) => commands::zeeman(o.resolve()?),
        Command::Obe(o) => commands::obe(o.resolve()?),
    }
}

fn configure_threads() {
    let Ok(value) = std::env::var("NSPEC_THREADS") else {
        return;
    };
    match value.trim().parse::<usize>() {
        Ok(n) if n > 0 => {
            if let Err(e) = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
            {
                eprintln!("warning: NSPEC_THREADS ignored: {e}");
            }
        }
        _ => eprintln!("warning: NSPEC_THREADS={value:?} is not a positive integer; ignored"),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    configure_threads();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if let Some(u) = e.downcast_ref::<UsageError>() {
                let mut cmd = Cli::command();
                cmd.build();
                let sub = cmd
                    .find_subcommand_mut(u.command)
                    .expect("known subcommand");
                sub.error(ErrorKind::MissingRequiredArgument, &u.message)
                    .exit();
            }
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
