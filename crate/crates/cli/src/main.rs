use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use herald_cli::{run, Command, Overrides};

#[derive(Parser)]
#[command(name = "herald", version, about = "Heralded state preparation: evaluate, optimize, sweep, reproduce-table")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// Experiment config (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides the config cutoff.
    #[arg(long, global = true)]
    cutoff: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Print nothing on success.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Score one parameter point against a target.
    Evaluate,
    /// Genetic search for the best parameters.
    Optimize,
    /// Misfit under parameter deviations or detector/signal loss.
    Sweep,
    /// Re-derive the built-in published rows.
    ReproduceTable,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let command = match cli.command {
        Cmd::Evaluate => Command::Evaluate,
        Cmd::Optimize => Command::Optimize,
        Cmd::Sweep => Command::Sweep,
        Cmd::ReproduceTable => Command::ReproduceTable,
    };
    let overrides = Overrides { seed: cli.seed, cutoff: cli.cutoff, out: cli.out };
    match run(command, cli.config.as_deref(), &overrides) {
        Ok((written, summary)) => {
            if !cli.quiet {
                println!("{summary}");
                for p in written {
                    println!("wrote {}", p.display());
                }
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
