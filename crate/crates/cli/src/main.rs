mod commands;
mod error;
mod manifest;
mod model;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::CliError;

/// Substitution tilings: classification, spectral cocycle, deformations,
/// twisted integrals and rendering.
#[derive(Debug, Parser)]
#[command(name = "subtile", version)]
struct Cli {
    /// Worker threads; defaults to the number of logical cores.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Classify z^3 - p z^2 + q z + r and report the Kenyon system data.
    Classify {
        p: u32,
        q: u32,
        r: u32,
        #[arg(long)]
        json: bool,
    },
    /// Built-in model catalog.
    Models {
        #[command(subcommand)]
        action: ModelsAction,
    },
    /// Upper Lyapunov exponent of the spectral cocycle, at a point or on a grid.
    Lyapunov(LyapunovArgs),
    /// Eigenvalue tests over sampled deformations and frequencies.
    VeechScan(VeechArgs),
    /// Draw a supertile as SVG.
    Render(RenderArgs),
    /// Twisted integral over a supertile or a box, fast and brute force.
    Twisted(TwistedArgs),
    /// Write a model as substitution JSON.
    ExportModel {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Validate a substitution JSON file and summarize it.
    ImportModel { path: PathBuf },
}

#[derive(Debug, Subcommand)]
enum ModelsAction {
    List,
}

#[derive(Clone, Copy, Debug, Default, ValueEnum)]
pub enum Layout {
    /// Published digit ranges; reproduces the published cocycle matrix.
    #[default]
    Printed,
    /// Shifted digit ranges that tile; used for geometry.
    Geometric,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// `kenyon P Q R`, `square`, or a substitution JSON file.
    #[arg(required = true, num_args = 1..=4)]
    model: Vec<String>,
    /// Digit layout for Kenyon models.
    #[arg(long, value_enum, default_value_t)]
    layout: Layout,
}

#[derive(Debug, Args)]
pub struct LyapunovArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Torus point, comma separated; on a grid, fixes the coordinates past the first two.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, conflicts_with = "lam")]
    z: Option<Vec<f64>>,
    /// Frequency lifted through the default shape.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    lam: Option<Vec<f64>>,
    #[arg(long, default_value_t = 2000)]
    n: usize,
    /// Trailing window of the limsup estimate; defaults to N / 10.
    #[arg(long)]
    window: Option<usize>,
    /// K x K grid over the first two torus coordinates.
    #[arg(long, conflicts_with = "lam")]
    grid: Option<usize>,
    /// CSV destination; a manifest is written beside it.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VeechArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, default_value_t = 100)]
    samples: usize,
    /// Random frequencies per deformation.
    #[arg(long, default_value_t = 20)]
    lams: usize,
    /// Test this frequency on every deformation instead of random ones.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    lam: Option<Vec<f64>>,
    #[arg(long, default_value_t = 0.1)]
    lam_min: f64,
    #[arg(long, default_value_t = 10.0)]
    lam_max: f64,
    #[arg(long, default_value_t = 0.05)]
    radius: f64,
    #[arg(long, default_value_t = 300)]
    n: usize,
    /// Escape threshold; defaults to 2 / (||M^T||_inf + 1).
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long, default_value_t = 1e-3)]
    tol: f64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, Debug, Default, ValueEnum)]
pub enum ColoringArg {
    #[default]
    Type,
    Class,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    /// `kenyon P Q R`, `square`, or a substitution JSON file.
    #[arg(required = true, num_args = 1..=4)]
    model: Vec<String>,
    #[arg(long)]
    level: usize,
    /// Prototile index of the supertile; defaults to 1.
    #[arg(long, default_value_t = 1)]
    root: usize,
    /// Compute collared prototiles first and report their count.
    #[arg(long)]
    collar: bool,
    #[arg(long, value_enum, default_value_t)]
    coloring: ColoringArg,
    /// Corona depth for collaring.
    #[arg(long, default_value_t = 1)]
    depth: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, Debug, Default, ValueEnum)]
pub enum PsiArg {
    /// Indicators of the prototile parallelograms.
    #[default]
    Indicators,
    /// Indicators weighted to be orthogonal to the tile frequencies.
    MeanZero,
    /// psi^ = 1 for every type.
    Ones,
}

#[derive(Debug, Args)]
pub struct TwistedArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    lam: Vec<f64>,
    /// Prototile index of the supertile.
    #[arg(long, default_value_t = 0)]
    j: usize,
    /// Supertile level.
    #[arg(long, default_value_t = 6)]
    n: usize,
    /// Integrate over the box of this half-width around the supertile centroid instead.
    #[arg(long)]
    box_half_width: Option<f64>,
    #[arg(long, value_enum, default_value_t)]
    psi: PsiArg,
    /// Perturb the default shape within this radius.
    #[arg(long, default_value_t = 0.0)]
    radius: f64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Steps of the Lyapunov estimate behind the dimension bound.
    #[arg(long, default_value_t = 1000)]
    lyapunov_n: usize,
    /// JSON destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(jobs) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    match cli.command {
        Command::Classify { p, q, r, json } => commands::classify(p, q, r, json),
        Command::Models { action: ModelsAction::List } => commands::models_list(),
        Command::Lyapunov(args) => commands::lyapunov(args),
        Command::VeechScan(args) => commands::veech_scan(args),
        Command::Render(args) => commands::render(args),
        Command::Twisted(args) => commands::twisted(args),
        Command::ExportModel { model, out } => commands::export_model(model, out),
        Command::ImportModel { path } => commands::import_model(&path),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
