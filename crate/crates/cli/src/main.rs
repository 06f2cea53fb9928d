use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use frameflow_cli::experiments::Experiment;
use frameflow_cli::manifest::RunManifest;
use frameflow_cli::runner;
use frameflow_cli::CliResult;

/// Reproducible frame flow and spectral experiments.
#[derive(Parser, Debug)]
#[command(version, about)]
struct Args {
    /// Experiment name, or `list`, or `validate`.
    command: String,
    /// Experiment to validate (optional when the config names one).
    target: Option<String>,
    /// Flat key-value configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory, default `out/<experiment>`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the `seed` key of the configuration.
    #[arg(long)]
    seed: Option<u64>,
}

fn print_summary(m: &RunManifest) {
    for c in &m.checks {
        let status = match (c.passed, c.hard) {
            (true, _) => "ok  ",
            (false, true) => "FAIL",
            (false, false) => "warn",
        };
        let range = match (c.lower, c.upper) {
            (Some(l), Some(u)) => format!("in [{l:e}, {u:e}]"),
            (Some(l), None) => format!(">= {l:e}"),
            (None, Some(u)) => format!("<= {u:e}"),
            (None, None) => String::new(),
        };
        println!("{status} {}: {:e} {range}", c.name, c.measured);
    }
    println!(
        "{} {} in {:.2} s",
        m.experiment,
        if m.passed { "passed" } else { "failed" },
        m.wall_time_seconds
    );
}

fn dispatch(args: &Args) -> CliResult<bool> {
    match args.command.as_str() {
        "list" => {
            for e in Experiment::ALL {
                println!("{:<14} {}", e.name(), e.description());
            }
            Ok(true)
        }
        "validate" => {
            let (exp, params, seed) = runner::resolve(args.target.as_deref(), args.config.as_deref(), args.seed)?;
            runner::validate(exp, &params)?;
            println!("{} configuration is valid (seed {seed})", exp.name());
            for (k, v) in params.echo() {
                println!("  {k} = {v}");
            }
            Ok(true)
        }
        name => {
            if args.target.is_some() {
                return Err(frameflow_cli::CliError::usage("unexpected second positional argument"));
            }
            let (exp, params, seed) = runner::resolve(Some(name), args.config.as_deref(), args.seed)?;
            let manifest = runner::run(exp, &params, seed, args.out.as_deref())?;
            print_summary(&manifest);
            Ok(manifest.passed)
        }
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    match dispatch(&args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("frameflow: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
