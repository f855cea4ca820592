use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use extlab::cli::{describe_registry, exponents_table, parse_config, parse_exponent_args, run_experiment, summarize};
use extlab::{Error, Result};

#[derive(Parser)]
#[command(name = "extlab", version, about = "Fourier extension experiments with fitted scaling exponents")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file and write its reports.
    Run { config: PathBuf },
    /// List registered experiments with their parameter schemas.
    List,
    /// Parse and check a config file without computing anything.
    Validate { config: PathBuf },
    /// Print critical exponents and the region class, e.g. `d=2 q=4 r=8/3`.
    Exponents {
        #[arg(required = true)]
        args: Vec<String>,
    },
}

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var("EXTLAB_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|n| *n > 0)
            .ok_or_else(|| Error::Schema(format!("EXTLAB_THREADS must be a positive integer, got `{v}`")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Schema(format!("cannot configure {n} threads: {e}")))?;
    }
    Ok(())
}

fn read_config(path: &PathBuf) -> Result<extlab::cli::RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Schema(format!("cannot read config {}: {e}", path.display())))?;
    parse_config(&text)
}

fn execute(cli: Cli) -> Result<bool> {
    configure_threads()?;
    match cli.command {
        Command::Run { config } => {
            let cfg = read_config(&config)?;
            let (report, files) = run_experiment(&cfg)?;
            println!("{}", summarize(&report));
            for f in files {
                println!("wrote {}", f.display());
            }
            Ok(report.pass)
        }
        Command::List => {
            print!("{}", describe_registry());
            Ok(true)
        }
        Command::Validate { config } => {
            let cfg = read_config(&config)?;
            println!("config ok: experiment {}", cfg.plan.experiment);
            for (k, v) in cfg.echo() {
                println!("  {k} = {v}");
            }
            Ok(true)
        }
        Command::Exponents { args } => {
            let (d, q, r, alpha) = parse_exponent_args(&args)?;
            print!("{}", exponents_table(d, q, r, alpha)?);
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
