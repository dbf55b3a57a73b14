//! `qdouble`: command-line front end.
//!
//! Exit codes: 0 success, 1 output could not be written, 2 invalid input,
//! 3 a size guard was exceeded, 64 usage error.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::CliError;

#[derive(Debug, Parser)]
#[command(name = "qdouble", version, about = "Energy barriers, defect lines and thermal dynamics of Z_d quantum doubles")]
struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true, env = "QDOUBLE_THREADS")]
    threads: Option<usize>,

    /// Override the seed of the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Progress messages on stderr; repeat for more.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Constructive local-errors path of an error, and optionally the exact barrier.
    Barrier(BarrierArgs),
    /// Cycle/tree decomposition of an error after merging and pruning.
    Decompose(DecomposeArgs),
    /// Zero-sum free multisets over Z_d.
    Multiset {
        #[command(subcommand)]
        command: MultisetCommand,
    },
    /// Defect-line configurations.
    Defects {
        #[command(subcommand)]
        command: DefectsCommand,
    },
    /// Run kinetic Monte Carlo trajectories.
    Simulate(SimulateArgs),
    /// Exact spectral gap of the frame dynamics on a tiny lattice.
    Gap(ConfigArgs),
    /// Mixing-time bound and its factors.
    Bound(ConfigArgs),
    /// Memory time and bound over a grid of inverse temperatures.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
struct BarrierArgs {
    /// Error file (JSON with lx, ly, pauli).
    #[arg(long)]
    error: PathBuf,
    /// Mass file; uniform unit masses when omitted.
    #[arg(long)]
    masses: Option<PathBuf>,
    /// Defect-line file; energies then use local charges.
    #[arg(long)]
    defects: Option<PathBuf>,
    /// Also compute the exact barrier inside a window around the support.
    #[arg(long)]
    oracle: bool,
    /// Window size, in qudits, for --oracle.
    #[arg(long, default_value_t = 6)]
    support_cap: usize,
    /// Build tree strings in shuffled order (uses --seed, default 0).
    #[arg(long)]
    shuffle: bool,
    /// Include the step list.
    #[arg(long)]
    steps: bool,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct DecomposeArgs {
    /// Error file (JSON with lx, ly, pauli).
    #[arg(long)]
    error: PathBuf,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum MultisetCommand {
    /// Exhaustive check of the extremal zero-sum free multisets.
    Verify {
        #[arg(long)]
        d: u32,
        /// Also check strict spectrum growth up to this cardinality.
        #[arg(long)]
        growth: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Look for a zero-sum subset of a multiset.
    ZeroSum {
        #[arg(long)]
        d: u32,
        /// Comma-separated elements.
        #[arg(long, value_delimiter = ',', required = true)]
        items: Vec<u32>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
enum DefectsCommand {
    /// Check loop consistency and print region labels; exits 2 when inconsistent.
    Check {
        /// Defect-line file.
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        lx: usize,
        #[arg(long)]
        ly: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Simulation file.
    #[arg(long)]
    config: PathBuf,
    /// Directory for trajectory files and summary.csv.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct ConfigArgs {
    /// Simulation file.
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// Simulation file; its beta is replaced by each grid value.
    #[arg(long)]
    config: PathBuf,
    /// Comma-separated inverse temperatures.
    #[arg(long, value_delimiter = ',', required = true)]
    betas: Vec<f64>,
    /// Choose max_time per beta from this many pilot trajectories.
    #[arg(long)]
    calibrate: Option<usize>,
    /// Directory for summary.csv and sweep.json.
    #[arg(long)]
    out: PathBuf,
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    let ctx = commands::Context {
        seed: cli.seed,
        verbose: cli.verbose,
    };
    match cli.command {
        Command::Barrier(a) => commands::barrier(
            &ctx,
            &commands::BarrierOptions {
                error: a.error,
                masses: a.masses,
                defects: a.defects,
                oracle: a.oracle,
                support_cap: a.support_cap,
                shuffle: a.shuffle,
                steps: a.steps,
            },
            a.out.as_deref(),
        ),
        Command::Decompose(a) => commands::decompose(&a.error, a.out.as_deref()),
        Command::Multiset { command } => match command {
            MultisetCommand::Verify { d, growth, out } => commands::multiset_verify(d, growth, out.as_deref()),
            MultisetCommand::ZeroSum { d, items, out } => commands::multiset_zero_sum(d, &items, out.as_deref()),
        },
        Command::Defects { command } => match command {
            DefectsCommand::Check { config, lx, ly, out } => commands::defects_check(&config, lx, ly, out.as_deref()),
        },
        Command::Simulate(a) => commands::simulate(&ctx, &a.config, &a.out),
        Command::Gap(a) => commands::gap(&a.config, a.out.as_deref()),
        Command::Bound(a) => commands::bound(&a.config, a.out.as_deref()),
        Command::Sweep(a) => commands::sweep(&ctx, &a.config, &a.betas, a.calibrate, &a.out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 64 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qdouble: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
