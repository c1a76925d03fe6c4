use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use dualband::runner::{self, Format, Regold, RunOptions};
use dualband::scenario::{Scenario, Task, TaskSet};

/// Verify dual-band Toeplitz operator identities on scenario files.
#[derive(Parser)]
#[command(name = "dualband", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the tasks listed in the scenario (or --tasks).
    Run(RunArgs),
    /// Space validation and operator identities.
    Validate(RunArgs),
    /// Point spectrum, classification and ADC diagnostics of the shift.
    Spectrum(RunArgs),
    /// Kernel correspondences with the extension.
    Kernel(RunArgs),
    /// Canonical, meromorphic and L2 factorizations.
    Factorize(RunArgs),
    /// Resolvent through the factorization.
    Resolvent(RunArgs),
    /// Hankel, block and direct norms.
    Norm(RunArgs),
    /// Rewrite golden reports for every scenario in a directory.
    Regold {
        /// Directory holding *.scn files.
        dir: PathBuf,
        /// Output directory for goldens (default: <dir>/golden).
        #[arg(long)]
        golden: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Grid size for sampled symbols (power of two).
    #[arg(long)]
    grid: Option<usize>,
    /// Override every residual bound.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, value_enum, default_value_t = FormatArg::Both)]
    format: FormatArg,
    /// Stop at the first failing task.
    #[arg(long)]
    fail_fast: bool,
    /// Comma-separated task list, or "all".
    #[arg(long)]
    tasks: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
    Both,
}

const EXIT_CONTRACT: u8 = 2;
const EXIT_INPUT: u8 = 3;

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var("DUALBAND_THREADS") {
        let n: usize = v.trim().parse().with_context(|| format!("DUALBAND_THREADS={v} is not a count"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global()?;
    }
    Ok(())
}

fn run(args: RunArgs, fixed: Option<Task>) -> Result<u8> {
    let src = std::fs::read_to_string(&args.scenario)
        .with_context(|| format!("reading {}", args.scenario.display()))?;
    let sc = match Scenario::parse(&src) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("{}: {e}", args.scenario.display());
            return Ok(EXIT_INPUT);
        }
    };
    if let Some(g) = args.grid {
        if !dualband::grid::is_valid_grid(g) {
            eprintln!("--grid {g}: must be a power of two and at least 8");
            return Ok(EXIT_INPUT);
        }
    }
    let tasks = match (fixed, &args.tasks) {
        (Some(t), _) => Some(TaskSet::List(vec![t])),
        (None, Some(s)) => match s.parse() {
            Ok(t) => Some(t),
            Err(e) => {
                eprintln!("--tasks: {e}");
                return Ok(EXIT_INPUT);
            }
        },
        (None, None) => None,
    };
    let opts = RunOptions { grid: args.grid, contract_tol: args.tol, tasks, fail_fast: args.fail_fast };
    let report = runner::run(&sc, &opts);
    let format = match args.format {
        FormatArg::Json => Format::Json,
        FormatArg::Csv => Format::Csv,
        FormatArg::Both => Format::Both,
    };
    let written = runner::write_artifacts(&report, &args.out, format)
        .with_context(|| format!("writing to {}", args.out.display()))?;
    if let Some(e) = report.space.get("error").and_then(|e| e.as_str()) {
        eprintln!("{}: {e}", sc.name);
    }
    for (name, o) in &report.tasks {
        let status = serde_json::to_value(o.status)?;
        match &o.message {
            Some(m) => println!("{name}: {} ({m})", status.as_str().unwrap_or("?")),
            None => println!("{name}: {}", status.as_str().unwrap_or("?")),
        }
    }
    for p in written {
        println!("wrote {}", p.display());
    }
    Ok(report.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = configure_threads().and_then(|_| match cli.command {
        Command::Run(a) => run(a, None),
        Command::Validate(a) => run(a, Some(Task::Validate)),
        Command::Spectrum(a) => run(a, Some(Task::Spectrum)),
        Command::Kernel(a) => run(a, Some(Task::Kernel)),
        Command::Factorize(a) => run(a, Some(Task::Factorize)),
        Command::Resolvent(a) => run(a, Some(Task::Resolvent)),
        Command::Norm(a) => run(a, Some(Task::Norm)),
        Command::Regold { dir, golden } => {
            let golden = golden.unwrap_or_else(|| dir.join("golden"));
            match runner::regold(&dir, &golden, &RunOptions::default())? {
                Regold::Written(ps) => {
                    for p in ps {
                        println!("wrote {}", p.display());
                    }
                    Ok(0)
                }
                Regold::Refused(list) => {
                    eprintln!("refusing to regold; failing scenarios:");
                    for (p, why) in list {
                        eprintln!("  {}: {why}", p.display());
                    }
                    Ok(EXIT_CONTRACT)
                }
            }
        }
    });
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}
