use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;

/// Discrete rough index theory on finite windows of quasi-lattices.
#[derive(Parser)]
#[command(name = "coarselab", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build test-space windows.
    #[command(subcommand)]
    Space(SpaceCmd),
    /// Banded operators: generation, dominating functions and estimates.
    #[command(subcommand)]
    Op(OpCmd),
    /// Uniformly finite chains.
    #[command(subcommand)]
    Chain(ChainCmd),
    /// Coarse cochains and their pairing with chains.
    #[command(subcommand)]
    Cochain(CochainCmd),
    /// Shorthand for `cochain pair`.
    Pair(PairArgs),
    /// Fill a chain by simplicial chains, optionally checking the filling estimate.
    Fill(FillCommand),
    /// The rough character of a cyclic tensor.
    Chi(ChiArgs),
    /// Check that the character intertwines the Hochschild and chain boundaries.
    ChainMapCheck(ChainMapArgs),
    /// Index demos.
    #[command(subcommand)]
    Demo(DemoCmd),
    /// The acceptance suite.
    #[command(subcommand)]
    Suite(SuiteCmd),
}

/// Window selection shared by the generators. `--window` reads a JSON
/// descriptor and overrides the other flags.
#[derive(Args, Clone, Debug)]
pub struct WindowArgs {
    #[arg(long)]
    pub window: Option<PathBuf>,
    /// zd, heisenberg3, tree3 or interval.
    #[arg(long, default_value = "zd")]
    pub kind: String,
    #[arg(long, default_value_t = 1)]
    pub dim: usize,
    #[arg(long, short = 'W')]
    pub radius: Option<u32>,
    #[arg(long)]
    pub margin: Option<u32>,
    /// l1, linf, word or graph; defaults to the natural metric of the kind.
    #[arg(long)]
    pub metric: Option<String>,
}

#[derive(Subcommand)]
enum SpaceCmd {
    /// Build a window and report its size and growth fit.
    Gen {
        #[command(flatten)]
        window: WindowArgs,
        /// Write the descriptor and growth fit as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write ball volumes (R, volume) as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum OpCmd {
    /// Generate an operator and write it as JSON.
    Gen(OpGenArgs),
    /// Dominating-function sandwich and operator norm.
    MuProfile {
        #[arg(long)]
        op: PathBuf,
        #[arg(long, default_value_t = 8)]
        rmax: u32,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Product estimate for the dominating function of AB.
    VerifyProduct {
        #[arg(long, requires = "b")]
        a: Option<PathBuf>,
        #[arg(long, requires = "a")]
        b: Option<PathBuf>,
        #[command(flatten)]
        random: RandomOps,
        #[arg(long, default_value_t = 16)]
        rmax: u32,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Power estimate for operators of norm at most one.
    VerifyPower {
        #[arg(long)]
        op: Option<PathBuf>,
        #[command(flatten)]
        random: RandomOps,
        #[arg(long, default_value_t = 4)]
        nmax: u32,
        #[arg(long, default_value_t = 16)]
        rmax: u32,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Neumann-series inverse of id − B and its μ-norm bound.
    Neumann {
        #[arg(long)]
        op: Option<PathBuf>,
        #[command(flatten)]
        random: RandomOps,
        #[arg(long, default_value_t = 1)]
        n: u32,
        /// Random mode: ‖B‖ as a fraction of the admissible threshold.
        #[arg(long, default_value_t = 0.5)]
        fraction: f64,
        #[arg(long, default_value_t = 1e-13)]
        tol: f64,
        /// Write the inverse (file mode only).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

#[derive(Args, Clone, Debug)]
pub struct OpGenArgs {
    #[command(flatten)]
    pub window: WindowArgs,
    /// random, shift, winding, identity or site.
    #[arg(long, default_value = "random")]
    pub generator: String,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long, default_value_t = 2)]
    pub propagation: u32,
    #[arg(long, default_value_t = 0.5)]
    pub decay: f64,
    #[arg(long, default_value_t = 1)]
    pub fiber: usize,
    /// Shift power or winding number.
    #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
    pub power: i64,
    #[arg(long, default_value_t = 0)]
    pub axis: usize,
    /// Site of a site projection, as comma-separated coordinates.
    #[arg(long, allow_hyphen_values = true)]
    pub point: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Seeded random operators, used when no operator file is given.
#[derive(Args, Clone, Debug)]
pub struct RandomOps {
    #[command(flatten)]
    pub window: WindowArgs,
    #[arg(long, default_value_t = 10)]
    pub trials: usize,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
}

#[derive(Subcommand)]
enum ChainCmd {
    /// Generate a seeded random chain.
    Gen(ChainGenArgs),
    /// Norms and support data of a chain.
    Norm {
        #[arg(long)]
        chain: PathBuf,
        #[arg(long, default_value_t = 0)]
        n: u32,
    },
}

#[derive(Args, Clone, Debug)]
pub struct ChainGenArgs {
    #[command(flatten)]
    pub window: WindowArgs,
    #[arg(long, default_value_t = 1)]
    pub degree: usize,
    #[arg(long, default_value_t = 10)]
    pub terms: usize,
    #[arg(long, default_value_t = 4)]
    pub max_length: u32,
    /// Coefficients are damped by length^-decay.
    #[arg(long, default_value_t = 0)]
    pub decay: u32,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Sample an edge field with |a|·length^n ≤ 1 instead (degree 1).
    #[arg(long)]
    pub edge_field: Option<u32>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum CochainCmd {
    /// ⟨φ, c⟩ for a cochain spec and a chain file.
    Pair(PairArgs),
    /// Pairing-continuity sweep of a closed 1-cochain across window sizes.
    Sweep(SweepArgs),
}

#[derive(Args, Clone, Debug)]
pub struct PairArgs {
    /// jump:AXIS:THRESHOLD, coord:AXIS, const:DEGREE:VALUE or table:FILE.
    #[arg(long)]
    pub cochain: String,
    #[arg(long)]
    pub chain: PathBuf,
}

#[derive(Args, Clone, Debug)]
pub struct SweepArgs {
    #[arg(long, default_value = "jump:0:0")]
    pub cochain: String,
    #[arg(long, default_value_t = 3)]
    pub n: u32,
    #[arg(long, default_value_t = 60)]
    pub trials: usize,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long, value_delimiter = ',', default_value = "16,24,32")]
    pub radii: Vec<u32>,
    #[arg(long, default_value_t = 1)]
    pub dim: usize,
    #[arg(long, default_value_t = 2)]
    pub margin: u32,
    /// Columns: W, trial, pairing, norm, ratio.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Args)]
#[command(args_conflicts_with_subcommands = true)]
struct FillCommand {
    #[command(subcommand)]
    cmd: Option<FillCmd>,
    #[command(flatten)]
    opts: FillOpts,
    /// Also check the filling estimate (same as `fill verify-estimate`).
    #[arg(long)]
    verify_estimate: bool,
}

#[derive(Subcommand)]
enum FillCmd {
    /// Fill a chain and report the simplicial chain.
    Run(FillOpts),
    /// Check the filling estimate with measured growth and contraction constants.
    VerifyEstimate(FillOpts),
}

#[derive(Args, Clone, Debug)]
pub struct FillOpts {
    #[arg(long)]
    pub chain: Option<PathBuf>,
    /// Write the filling as a chain file.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write the estimate report as JSON.
    #[arg(long)]
    pub json: Option<PathBuf>,
    /// Write the contractibility profile (R, S'(R)) as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[arg(long, default_value_t = 200)]
    pub samples: usize,
    #[arg(long, default_value_t = 10)]
    pub rmax: u32,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
}

#[derive(Args, Clone, Debug)]
pub struct ChiArgs {
    #[arg(long)]
    pub tensor: PathBuf,
    /// Chain file; printed to stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Keep tuples outside the margin-safe core.
    #[arg(long)]
    pub unrestricted: bool,
}

#[derive(Args, Clone, Debug)]
pub struct ChainMapArgs {
    /// Check one tensor file instead of random tensors.
    #[arg(long)]
    pub tensor: Option<PathBuf>,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long, default_value_t = 20)]
    pub trials: usize,
    #[command(flatten)]
    pub window: WindowArgs,
    /// Tensor degree; alternates between 1 and 2 when absent.
    #[arg(long)]
    pub degree: Option<usize>,
    #[arg(long, value_delimiter = ',', default_value = "1,2")]
    pub propagations: Vec<u32>,
    #[arg(long, default_value_t = 2)]
    pub terms: usize,
    #[arg(long, default_value_t = 1e-9)]
    pub tolerance: f64,
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Subcommand)]
enum DemoCmd {
    /// Winding number against the Toeplitz index oracle.
    Winding {
        #[arg(long, value_delimiter = ',', default_value = "1,2,3,4", allow_hyphen_values = true)]
        k: Vec<i64>,
        #[arg(long, default_value_t = 32)]
        radius: u32,
        #[arg(long, default_value_t = 20)]
        margin: u32,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Degree-zero pairing ⟨φ, χ(e)⟩ on a ℤ window.
    Degree0 {
        /// even, odd, site:X or interval:A:B.
        #[arg(long, default_value = "even")]
        projection: String,
        /// A degree-0 cochain spec, e.g. table:indicator.json.
        #[arg(long)]
        cochain: String,
        #[arg(long, default_value_t = 16)]
        radius: u32,
        #[arg(long, default_value_t = 2)]
        margin: u32,
    },
    /// Fundamental class of the 3-regular tree as a boundary.
    Tree {
        #[arg(long, default_value_t = 6)]
        radius: u32,
        #[arg(long, default_value_t = 1)]
        margin: u32,
        /// Also print the unbounded-coefficient witness on ℤ up to this radius.
        #[arg(long)]
        line_witness: Option<u32>,
    },
}

#[derive(Subcommand)]
enum SuiteCmd {
    /// Run the acceptance criteria.
    Run {
        /// JSON config: {"seed": u64, "margin": u32, "only": [ids]}.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

/// Result of a command that ran to completion.
pub enum Status {
    Pass,
    CheckFailed,
}

fn configure_threads() -> coarselab::Result<()> {
    let Ok(value) = std::env::var("COARSELAB_THREADS") else { return Ok(()) };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| coarselab::Error::Format(format!("COARSELAB_THREADS must be a positive integer, got {value:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| coarselab::Error::Format(format!("cannot configure {threads} threads: {e}")))
}

fn run(cli: Cli) -> coarselab::Result<Status> {
    use commands::*;
    configure_threads()?;
    match cli.command {
        Command::Space(SpaceCmd::Gen { window, out, csv }) => space_gen(&window, out, csv),
        Command::Op(OpCmd::Gen(args)) => op_gen(&args),
        Command::Op(OpCmd::MuProfile { op, rmax, csv }) => op_mu_profile(&op, rmax, csv),
        Command::Op(OpCmd::VerifyProduct { a, b, random, rmax, csv }) => op_verify_product(a.zip(b), &random, rmax, csv),
        Command::Op(OpCmd::VerifyPower { op, random, nmax, rmax, csv }) => op_verify_power(op, &random, nmax, rmax, csv),
        Command::Op(OpCmd::Neumann { op, random, n, fraction, tol, out, csv }) => {
            op_neumann(op, &random, n, fraction, tol, out, csv)
        }
        Command::Chain(ChainCmd::Gen(args)) => chain_gen(&args),
        Command::Chain(ChainCmd::Norm { chain, n }) => chain_norm(&chain, n),
        Command::Cochain(CochainCmd::Pair(args)) | Command::Pair(args) => cochain_pair(&args),
        Command::Cochain(CochainCmd::Sweep(args)) => cochain_sweep(&args),
        Command::Fill(f) => match f.cmd {
            Some(FillCmd::Run(opts)) => fill_run(&opts),
            Some(FillCmd::VerifyEstimate(opts)) => fill_verify(&opts),
            None if f.verify_estimate => fill_verify(&f.opts),
            None => fill_run(&f.opts),
        },
        Command::Chi(args) => chi(&args),
        Command::ChainMapCheck(args) => chain_map(&args),
        Command::Demo(DemoCmd::Winding { k, radius, margin, csv }) => demo_winding(&k, radius, margin, csv),
        Command::Demo(DemoCmd::Degree0 { projection, cochain, radius, margin }) => {
            demo_degree0(&projection, &cochain, radius, margin)
        }
        Command::Demo(DemoCmd::Tree { radius, margin, line_witness }) => demo_tree(radius, margin, line_witness),
        Command::Suite(SuiteCmd::Run { config, seed, csv, json }) => suite_run(config, seed, csv, json),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(Status::Pass) => ExitCode::SUCCESS,
        Ok(Status::CheckFailed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
