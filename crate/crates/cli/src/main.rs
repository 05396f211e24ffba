//! Command-line benchmarks for the slab-geometry minimum-entropy moment
//! solver: the manufactured-solution convergence table, the plane-source
//! test, a realizability predicate/oracle cross-check and the
//! reduced-equation demos.

mod commands;
mod overrides;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;

use commands::{ConvergeSettings, PlanesourceSettings, RealizabilityCheckSettings};
use overrides::{CommaList, Overrides};

#[derive(Parser)]
#[command(
    name = "slab-mn",
    version,
    about = "Benchmarks for slab-geometry minimum-entropy (M_N) moment models"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Manufactured-solution convergence table (CSV to stdout or --out)
    Converge(ConvergeArgs),
    /// Plane-source benchmark; writes field and diagnostics CSVs
    Planesource(PlanesourceArgs),
    /// Cross-check the realizability predicates against the LP oracle
    RealizabilityCheck(RealizabilityCheckArgs),
    /// Reduced-equation demos: explicit failure, implicit decay
    ReducedDemo,
}

/// Every flag can also be given in a `--config` file as `key=value` with
/// the long flag name as key; explicit flags win.
#[derive(Args)]
struct ConvergeArgs {
    /// Steepness K of the manufactured solution (K > 1)
    #[arg(short = 'K', long = "K")]
    k: Option<f64>,
    /// Comma-separated cell counts, e.g. 40,80,160
    #[arg(long)]
    nx: Option<CommaList<usize>>,
    /// Moment order N
    #[arg(long)]
    order: Option<usize>,
    /// Closure gradient tolerance
    #[arg(long)]
    tau: Option<f64>,
    /// Gauss-Legendre points per half-range
    #[arg(long = "points-per-half")]
    points_per_half: Option<usize>,
    /// Output CSV path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    /// key=value override file
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct PlanesourceArgs {
    /// Moment order N
    #[arg(long)]
    order: Option<usize>,
    /// Cell count (even)
    #[arg(long)]
    nx: Option<usize>,
    /// Collision operator: lb (Laplace-Beltrami) or bgk (isotropic)
    #[arg(long)]
    collision: Option<String>,
    /// Comma-separated snapshot times
    #[arg(long)]
    snapshots: Option<CommaList<f64>>,
    /// Directory for the CSV outputs
    #[arg(long = "out-dir")]
    out_dir: Option<PathBuf>,
    /// key=value override file
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct RealizabilityCheckArgs {
    /// Moment order N
    #[arg(long)]
    order: Option<usize>,
    /// Number of random samples
    #[arg(long)]
    samples: Option<usize>,
    /// RNG seed
    #[arg(long)]
    seed: Option<u64>,
    /// key=value override file
    #[arg(long)]
    config: Option<PathBuf>,
}

fn main() {
    let cli = Cli::parse();
    if let Err(error) = dispatch(cli) {
        eprintln!("error: {error:#}");
        std::process::exit(1);
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Converge(args) => {
            let overrides = Overrides::load(args.config.as_deref())?;
            let settings = ConvergeSettings {
                k: overrides.resolve(args.k, "K", 2.0)?,
                nx: overrides
                    .resolve(args.nx, "nx", CommaList(vec![40, 80, 160]))?
                    .0,
                order: overrides.resolve(args.order, "order", 3)?,
                tau: overrides.resolve(args.tau, "tau", 1e-6)?,
                points_per_half: overrides.resolve(args.points_per_half, "points-per-half", 20)?,
                out: overrides.resolve_optional(args.out, "out")?,
            };
            commands::converge(&settings)
        }
        Command::Planesource(args) => {
            let overrides = Overrides::load(args.config.as_deref())?;
            let settings = PlanesourceSettings {
                order: overrides.resolve(args.order, "order", 3)?,
                nx: overrides.resolve(args.nx, "nx", 600)?,
                collision: overrides.resolve(args.collision, "collision", "lb".to_string())?,
                snapshots: overrides
                    .resolve(args.snapshots, "snapshots", CommaList(Vec::new()))?
                    .0,
                out_dir: overrides.resolve(args.out_dir, "out-dir", PathBuf::from("."))?,
            };
            commands::planesource(&settings)
        }
        Command::RealizabilityCheck(args) => {
            let overrides = Overrides::load(args.config.as_deref())?;
            let settings = RealizabilityCheckSettings {
                order: overrides.resolve(args.order, "order", 3)?,
                samples: overrides.resolve(args.samples, "samples", 1000)?,
                seed: overrides.resolve(args.seed, "seed", 0)?,
            };
            commands::realizability_check(&settings)
        }
        Command::ReducedDemo => commands::reduced_demo(),
    }
}
