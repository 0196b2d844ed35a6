mod args;
mod commands;
mod error;
mod output;

use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;

use args::{Cli, Command, RunConfig};
use error::{CliError, Result};
use output::Output;

fn run(cli: &Cli) -> Result<()> {
    let cfg = RunConfig::resolve(cli)?;
    if let Some(n) = cfg.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::BadParam(format!("thread pool: {e}")))?;
    }
    let start = Instant::now();
    let mut out = Output::new(&cfg.out)?;
    let report = match &cli.command {
        Command::Fig1(_) => commands::fig1(&cfg, &mut out),
        Command::Fig2(_) => commands::fig2(&cfg, &mut out),
        Command::Fig3(_) => commands::fig3(&cfg, &mut out),
        Command::Fig4a(_) => commands::fig4a(&cfg, &mut out),
        Command::Fig4b(_) => commands::fig4b(&cfg, &mut out),
        Command::Decoherence { .. } => commands::decoherence(&cfg, &mut out),
        Command::OracleCheck(_) => commands::oracle_check(&cfg, &mut out),
        Command::StateInfo { .. } => commands::state_info(&cfg, &mut out),
    }?;
    let threads = rayon::current_num_threads();
    out.finish(
        cli.command.name(),
        report.params,
        report.results,
        start.elapsed().as_secs_f64(),
        threads,
    )?;
    if report.oracle_failures > 0 {
        return Err(CliError::OracleMismatch(report.oracle_failures));
    }
    if report.unconverged > 0 {
        return Err(CliError::NonConvergence(report.unconverged));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("thermocat: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
