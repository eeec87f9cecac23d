use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use css_lab_cli::{parse_scenario, run_command, CliError, Subcommand};

/// Cooperative spectrum sensing simulator.
#[derive(Parser)]
#[command(name = "css-lab", version)]
struct Args {
    #[arg(value_enum)]
    subcommand: Subcommand,

    /// Flat TOML scenario file.
    #[arg(long)]
    scenario: PathBuf,

    /// Override one scenario key, applied after the file.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,

    #[arg(long)]
    out: PathBuf,

    /// Worker threads for Monte Carlo chains.
    #[arg(long, env = "CSS_LAB_THREADS")]
    threads: Option<usize>,

    /// Values swept by sweep-l, sweep-k and equivalence, comma separated.
    #[arg(long, value_delimiter = ',')]
    values: Option<Vec<usize>>,
}

fn run(args: &Args) -> Result<(), CliError> {
    if let Some(n) = args.threads {
        if n == 0 {
            return Err(CliError::Usage("threads: must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    let sc = parse_scenario(&args.scenario, &args.overrides)?;
    let m = run_command(args.subcommand, &sc, &args.out, args.values.as_deref())?;
    for f in &m.outputs {
        println!("{}", args.out.join(f).display());
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = Args::parse();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.record());
            ExitCode::from(e.exit_code())
        }
    }
}
