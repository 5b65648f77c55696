use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ginibre_cli::*;

#[derive(Parser)]
#[command(name = "ginibre", version, about = "Simulations of real Ginibre spectra with a prescribed number of real eigenvalues")]
struct Cli {
    /// Worker threads for the parallel parts (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Root under which run directories are created when --out is absent.
    #[arg(long, global = true, env = "GINIBRE_OUT", default_value = "runs")]
    out_root: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve or relax the two-phase gas.
    Gas(GasArgs),
    /// Metropolis-Hastings sampling at fixed (n, k).
    Mcmc(McmcArgs),
    /// Brute-force sampling of Ginibre matrices.
    Oracle(OracleArgs),
    /// Rate-function minima from relaxed gases.
    Rate(RateArgs),
    /// Height of an isolated conjugate pair over the semicircle.
    Ystar(YstarArgs),
    /// Histograms, supports and gaps of saved configurations.
    Analyze(AnalyzeArgs),
}

fn fail(e: &CliError) -> ExitCode {
    eprintln!("{}", e.record());
    ExitCode::from(e.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return fail(&CliError::Usage(e.kind().to_string()));
        }
    };
    if let Some(t) = cli.threads {
        if t == 0 {
            return fail(&CliError::Usage("--threads must be positive".into()));
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            return fail(&CliError::Usage(e.to_string()));
        }
    }
    let root = cli.out_root.as_path();
    let result = match &cli.command {
        Command::Gas(a) => cmd_gas(a, root),
        Command::Mcmc(a) => cmd_mcmc(a, root),
        Command::Oracle(a) => cmd_oracle(a, root),
        Command::Rate(a) => cmd_rate(a, root),
        Command::Ystar(a) => cmd_ystar(a, root),
        Command::Analyze(a) => cmd_analyze(a, root),
    };
    match result {
        Ok(summary) => {
            println!("{}", serde_json::to_string_pretty(&summary).expect("summary is valid JSON"));
            ExitCode::SUCCESS
        }
        Err(e) => fail(&e),
    }
}
