//! `sdpath`: approximate shortest descending paths from the command line.
//!
//! Exit codes: 0 success, 1 some targets had no descending path (or a path
//! failed verification), 2 input errors, 3 internal invariant violations.

mod commands;
mod input;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "sdpath", version, about = "Approximate shortest descending paths on polyhedral terrains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct TerrainArgs {
    /// Terrain file (.off or JSON) or a generator such as gen:ramp:1,
    /// gen:skinny:100, gen:nearlevel:0.05 or gen:random:5.
    terrain: String,
    /// Seed for randomised generators.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
struct SolveArgs {
    #[command(flatten)]
    terrain: TerrainArgs,
    #[arg(long, default_value_t = 0.5)]
    epsilon: f64,
    /// Source as a vertex id, v:ID or p:x,y[,z]. Defaults to the terrain's
    /// stored source, then to its highest vertex.
    #[arg(long)]
    source: Option<String>,
    /// Target as v:ID or p:x,y[,z]; repeatable.
    #[arg(long = "target")]
    targets: Vec<String>,
    #[arg(long, value_enum, default_value_t = SolverArg::Bushwhack)]
    solver: SolverArg,
    /// Also link consecutive nodes along each edge.
    #[arg(long)]
    edge_chords: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SolverArg {
    Dijkstra,
    Bushwhack,
}

impl From<SolverArg> for sdpath::Solver {
    fn from(s: SolverArg) -> Self {
        match s {
            SolverArg::Dijkstra => sdpath::Solver::Dijkstra,
            SolverArg::Bushwhack => sdpath::Solver::Bushwhack,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Off,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Family {
    Ramp,
    Skinny,
    Nearlevel,
    Random,
    TwoFace,
    Pit,
    Isoline,
    Triangle,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Report size and geometric parameters, and discretization size for eps.
    Info {
        #[command(flatten)]
        terrain: TerrainArgs,
        #[arg(long, default_value_t = 1.0)]
        epsilon: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a terrain.
    Gen {
        #[arg(value_enum)]
        family: Family,
        /// Family parameter: ramp scale, skinny aspect ratio, nearlevel tilt
        /// in radians, random grid size, triangle side.
        #[arg(long)]
        param: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = FormatArg::Json)]
        format: FormatArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the nodes of the discretization.
    Discretize {
        #[command(flatten)]
        terrain: TerrainArgs,
        #[arg(long, default_value_t = 1.0)]
        epsilon: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build the shortest-path tree and answer every target.
    Solve(SolveArgs),
    /// Answer targets, printing only the answers.
    Query(SolveArgs),
    /// Check that a path is descending on the terrain.
    Verify {
        #[command(flatten)]
        terrain: TerrainArgs,
        /// Path JSON: [[x,y,z],...] or {"points": [...]}.
        path: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Time preprocessing and queries over an epsilon sweep, as CSV.
    Bench {
        /// One or more terrains (files or generators).
        #[arg(required = true)]
        terrains: Vec<String>,
        #[arg(long = "epsilon", required = true)]
        epsilons: Vec<f64>,
        #[arg(long = "target")]
        targets: Vec<String>,
        #[arg(long, value_enum, default_value_t = SolverArg::Bushwhack)]
        solver: SolverArg,
        #[arg(long)]
        edge_chords: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli.command) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            if err.downcast_ref::<commands::InvariantViolation>().is_some() {
                ExitCode::from(3)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
