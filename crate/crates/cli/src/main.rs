use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use swipt_mac_cli::{
    cmd_coop, cmd_region, cmd_sumrate_sweep, cmd_verify, ingest_config, parse_config, RunConfig,
};

#[derive(Parser)]
#[command(
    name = "swipt-mac",
    version,
    about = "Rate regions and power splitting for SWIPT multiple-access channels"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// Key-value config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Built-in parameter set the config file is layered over (fig3a..fig3d, fig4, fig5a..fig5d).
    #[arg(long)]
    preset: Option<String>,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Region boundary as CSV.
    Region(Common),
    /// Sum rate against the PS factor as CSV.
    Sumrate(Common),
    /// Cooperative optimum per weight pair as CSV.
    Coop(Common),
    /// Compare solvers with brute-force oracles; exits non-zero on failure.
    Verify(Common),
}

fn load(c: &Common) -> Result<RunConfig> {
    let cfg = match (&c.config, &c.preset) {
        (Some(path), preset) => ingest_config(path, preset.as_deref())?,
        (None, Some(preset)) => parse_config("", Some(preset))?,
        (None, None) => bail!("give --config, --preset or both"),
    };
    Ok(cfg)
}

fn sink(c: &Common, cfg: &RunConfig) -> Result<Box<dyn Write>> {
    Ok(match c.out.as_ref().or(cfg.output.as_ref()) {
        Some(path) => Box::new(BufWriter::new(
            File::create(path).with_context(|| format!("creating {}", path.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn run(cli: Cli) -> Result<bool> {
    let (Command::Region(c) | Command::Sumrate(c) | Command::Coop(c) | Command::Verify(c)) =
        &cli.command;
    let cfg = load(c)?;
    let mut out = sink(c, &cfg)?;
    let pass = match cli.command {
        Command::Region(_) => cmd_region(&cfg, &mut out).map(|_| true)?,
        Command::Sumrate(_) => cmd_sumrate_sweep(&cfg, &mut out).map(|_| true)?,
        Command::Coop(_) => cmd_coop(&cfg, &mut out).map(|_| true)?,
        Command::Verify(_) => cmd_verify(&cfg, &mut out)?,
    };
    out.flush()?;
    Ok(pass)
}

/// A reader such as `head` hung up early.
fn closed_pipe(e: &anyhow::Error) -> bool {
    e.chain().any(|c| {
        let io = c.downcast_ref::<io::Error>().or_else(|| {
            match c.downcast_ref::<csv::Error>()?.kind() {
                csv::ErrorKind::Io(io) => Some(io),
                _ => None,
            }
        });
        io.is_some_and(|io| io.kind() == io::ErrorKind::BrokenPipe)
    })
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) if closed_pipe(&e) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
