use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fockmet_cli::{run, CliError, RunConfig, RunOptions, OUT_DIR_ENV, VERSION};

#[derive(Parser)]
#[command(name = "fockmet", about = "Fock-state metrology experiment runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write its tables.
    Run {
        config: PathBuf,
        /// Overrides the config seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory; beats FOCKMET_OUT_DIR and output_path.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (default: all cores).
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Parse and validate a config without running it.
    Validate { config: PathBuf },
    /// Print the tool version.
    Version,
}

fn config_error_code(e: &CliError) -> u8 {
    match e {
        CliError::Io { .. } => 2,
        other => other.exit_code(),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match cli.command {
        Command::Version => {
            println!("fockmet {VERSION}");
            ExitCode::SUCCESS
        }
        Command::Validate { config } => {
            match RunConfig::load(&config).and_then(|c| c.validate().and_then(|_| c.resolved())) {
                Ok(c) => {
                    print!("{}", c.to_toml());
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(config_error_code(&e))
                }
            }
        }
        Command::Run {
            config,
            seed,
            out,
            threads,
        } => {
            if let Some(k) = threads {
                if k == 0 {
                    eprintln!("error: --threads must be at least 1");
                    return ExitCode::from(2);
                }
                if let Err(e) = rayon::ThreadPoolBuilder::new()
                    .num_threads(k)
                    .build_global()
                {
                    eprintln!("error: cannot start thread pool: {e}");
                    return ExitCode::from(1);
                }
            }
            let cfg = match RunConfig::load(&config) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(config_error_code(&e));
                }
            };
            let opts = RunOptions {
                seed,
                out,
                env_out: std::env::var(OUT_DIR_ENV).ok(),
            };
            match run(&cfg, &opts) {
                Ok(report) => {
                    for f in &report.files {
                        println!("{}", f.display());
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(e.exit_code())
                }
            }
        }
    }
}
