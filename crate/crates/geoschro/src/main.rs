use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use geoschro::verify::parse_override;
use geoschro::{emit_plot_script, run_reduce, run_simulate, run_verify, CliError, VerifyOptions};

#[derive(Parser)]
#[command(name = "geoschro", version, about = "Schrodinger dynamics on truncated Hilbert spaces as Hamiltonian flows")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate a scenario and write its trajectory.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run both paths of the U(1) reduction diagram for a scenario.
    Reduce {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run numerical self-checks and print a JSON report.
    Verify {
        /// symplectic, operators, analytic, dynamics, reduction or all.
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 64)]
        size: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Override a case bound or tolerance, as key=value. Repeatable.
        #[arg(long = "tol")]
        tol: Vec<String>,
        /// Also write the report to this file.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Write a gnuplot script for the outputs listed in a summary file.
    Plot {
        #[arg(long)]
        summary: PathBuf,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate { config, out, seed } => {
            let summary = run_simulate(&config, &out, seed)?;
            println!("{}: {} records written to {}", summary.name, summary.records, out.display());
        }
        Command::Reduce { config, out, seed } => {
            let summary = run_reduce(&config, &out, seed)?;
            let residual = summary.reduction.as_ref().map_or(0.0, |r| r.max_fs_residual);
            println!("{}: max Fubini-Study residual {residual:e}", summary.name);
        }
        Command::Verify { suite, size, seed, tol, report } => {
            let overrides = tol.iter().map(|t| parse_override(t)).collect::<Result<Vec<_>, _>>()?;
            let opts = VerifyOptions { size, seed, overrides, threads: None };
            let result = run_verify(&suite, &opts)?;
            let text = serde_json::to_string_pretty(&result).expect("report serializes");
            println!("{text}");
            if let Some(path) = report {
                geoschro::io::write_json(&path, &result)?;
            }
            if !result.pass {
                return Err(CliError::VerificationFailed(result.failures().join(", ")));
            }
        }
        Command::Plot { summary } => {
            let script = emit_plot_script(&summary)?;
            println!("{}", script.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
