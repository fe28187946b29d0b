use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use qreg_cli::{execute, CliError, Command, RunConfig};

/// Pure-dephasing simulator for spatially extended qubit registers.
#[derive(Debug, Parser)]
#[command(name = "qreg", version)]
struct Args {
    command: Command,
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides output.dir).
    #[arg(long)]
    output: Option<PathBuf>,
    /// Overrides geometry.seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    quiet: bool,
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(text) => {
            if !args.quiet {
                let _ = std::io::stdout().write_all(text.as_bytes());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(args: &Args) -> Result<String, CliError> {
    let text = std::fs::read_to_string(&args.config).map_err(|e| CliError::io(&args.config, e))?;
    let mut cfg = RunConfig::parse(&text)?;
    if let Some(seed) = args.seed {
        cfg.geometry.seed = seed;
    }
    if let Some(n) = args.threads {
        if n == 0 {
            return Err(CliError::Semantic {
                key: "--threads".into(),
                reason: "must be >= 1".into(),
            });
        }
        // only fails if a pool already exists, in which case it is reused
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let base = args.config.parent().unwrap_or(Path::new("."));
    let out_dir = args.output.clone().unwrap_or_else(|| PathBuf::from(&cfg.output.dir));
    execute(&cfg, args.command, base, &out_dir)
}
