use clap::{Parser, ValueEnum};
use mpvlasov::scenario::Subcommand;
use mpvlasov::{execute, Invocation};
use std::path::PathBuf;

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Command {
    VerifyAlgebra,
    VerifyDual,
    RunMoments,
    RunVlasov,
    RunMomvlasov,
    CheckPoissonMap,
    CheckIntertwine,
    Dump,
}

impl From<Command> for Subcommand {
    fn from(c: Command) -> Self {
        match c {
            Command::VerifyAlgebra => Subcommand::VerifyAlgebra,
            Command::VerifyDual => Subcommand::VerifyDual,
            Command::RunMoments => Subcommand::RunMoments,
            Command::RunVlasov => Subcommand::RunVlasov,
            Command::RunMomvlasov => Subcommand::RunMomvlasov,
            Command::CheckPoissonMap => Subcommand::CheckPoissonMap,
            Command::CheckIntertwine => Subcommand::CheckIntertwine,
            Command::Dump => Subcommand::Dump,
        }
    }
}

/// Matched-pair moment and Vlasov dynamics: verification suites and runs.
#[derive(Debug, Parser)]
#[command(name = "mpvlasov", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// `key = value` configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for CSV tables and manifest.json.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Suppress the printed summary.
    #[arg(long, global = true)]
    quiet: bool,
}

fn main() {
    let cli = Cli::parse();
    let code = execute(&Invocation {
        command: cli.command.into(),
        config: cli.config,
        out: cli.out,
        seed: cli.seed,
        quiet: cli.quiet,
    });
    std::process::exit(code);
}
