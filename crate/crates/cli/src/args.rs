//! Clap surface. Every subcommand parses to plain typed fields; the handlers
//! in `commands` never touch argv.

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use schatten_widths::widths::TargetNorm;
use schatten_widths::SpectrumExponent;

#[derive(Debug, Parser)]
#[command(
    name = "schatten-widths",
    version,
    about = "Schatten and mixed norms, flat-spectrum constructions, width estimates, and rate envelopes"
)]
pub struct Cli {
    /// Master seed; every randomized subcommand derives its streams from it.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Worker threads (default: logical cores). The SCHATTEN_WIDTHS_THREADS
    /// environment variable takes precedence when set.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Write JSON with an embedded run manifest to this file instead of CSV
    /// to stdout.
    #[arg(long, global = true, value_name = "FILE")]
    pub out: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Schatten or mixed norm of a matrix read from a file.
    Norms(NormsArgs),
    /// Build a subspace member with a flat leading spectrum and certify it.
    FlatTop(FlatTopArgs),
    /// Estimate one Gelfand width, or sweep all of them.
    Gelfand(GelfandArgs),
    /// Kolmogorov width of a finite test set against a target norm.
    Kolmogorov(KolmogorovArgs),
    /// Exact orthogonality verification for the averaged orbit set.
    Orthocheck(OrthocheckArgs),
    /// Monte Carlo mean of the Schatten norm of a Gaussian matrix.
    Gaussian(GaussianArgs),
    /// Norm-ratio concentration bands on random subspaces.
    Dvoretzky(DvoretzkyArgs),
    /// Piecewise rate envelope at one parameter point.
    Envelope(EnvelopeArgs),
    /// Rate envelope over a parameter grid.
    PhaseDiagram(PhaseDiagramArgs),
    /// Run the acceptance suite.
    Verify(VerifyArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Norms(_) => "norms",
            Command::FlatTop(_) => "flat-top",
            Command::Gelfand(_) => "gelfand",
            Command::Kolmogorov(_) => "kolmogorov",
            Command::Orthocheck(_) => "orthocheck",
            Command::Gaussian(_) => "gaussian",
            Command::Dvoretzky(_) => "dvoretzky",
            Command::Envelope(_) => "envelope",
            Command::PhaseDiagram(_) => "phase-diagram",
            Command::Verify(_) => "verify",
        }
    }
}

fn parse_exponent(s: &str) -> Result<SpectrumExponent, String> {
    s.parse::<SpectrumExponent>().map_err(|e| e.to_string())
}

/// Comma-separated exponent list, e.g. "0.5,1,2,inf".
fn parse_exponent_grid(s: &str) -> Result<ExponentGrid, String> {
    let mut values = Vec::new();
    for part in s.split(',') {
        let part = part.trim();
        if part.is_empty() {
            return Err("empty grid entry".to_string());
        }
        values.push(parse_exponent(part)?);
    }
    Ok(ExponentGrid(values))
}

/// Comma-separated positive integer list, e.g. "1,4,16".
fn parse_index_grid(s: &str) -> Result<IndexGrid, String> {
    let mut values = Vec::new();
    for part in s.split(',') {
        let part = part.trim();
        values.push(
            part.parse::<usize>()
                .map_err(|e| format!("bad index {part:?}: {e}"))?,
        );
    }
    Ok(IndexGrid(values))
}

/// "schatten:P" or "mixed:P" with P an exponent (inner exponent of the mixed
/// norm is fixed to 2).
fn parse_target(s: &str) -> Result<TargetNorm, String> {
    let (kind, exp) = s
        .split_once(':')
        .ok_or_else(|| format!("expected schatten:P or mixed:P, got {s:?}"))?;
    let e = parse_exponent(exp)?;
    match kind {
        "schatten" => Ok(TargetNorm::Schatten(e)),
        "mixed" => Ok(TargetNorm::MixedColumn(e)),
        other => Err(format!("unknown target kind {other:?}")),
    }
}

#[derive(Debug, Clone)]
pub struct ExponentGrid(pub Vec<SpectrumExponent>);

#[derive(Debug, Clone)]
pub struct IndexGrid(pub Vec<usize>);

#[derive(Debug, clap::Args)]
pub struct NormsArgs {
    /// Matrix file: first line N, then N comma-separated rows.
    #[arg(long)]
    pub file: PathBuf,

    /// Schatten exponent, or the outer exponent when --mixed is set.
    #[arg(long, value_parser = parse_exponent, default_value = "2")]
    pub p: SpectrumExponent,

    /// Evaluate the columns-inner mixed norm with this inner exponent
    /// instead of the Schatten norm.
    #[arg(long, value_name = "INNER", value_parser = parse_exponent)]
    pub mixed: Option<SpectrumExponent>,
}

#[derive(Debug, clap::Args)]
pub struct FlatTopArgs {
    /// Matrix order.
    #[arg(long = "N")]
    pub order: usize,

    /// Number of leading singular values to flatten; defaults to the largest
    /// value the subspace dimension guarantees.
    #[arg(long)]
    pub k: Option<usize>,

    /// Dimension of the seeded random subspace; defaults to N^2.
    #[arg(long)]
    pub dim: Option<usize>,

    /// Certificate tolerance.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
}

#[derive(Debug, clap::Args)]
pub struct GelfandArgs {
    #[arg(long, value_parser = parse_exponent)]
    pub p: SpectrumExponent,

    #[arg(long, value_parser = parse_exponent)]
    pub q: SpectrumExponent,

    /// Matrix order.
    #[arg(long = "N")]
    pub order: usize,

    /// Width index in 1..=N^2. Required unless --sweep is set.
    #[arg(long, conflicts_with = "sweep")]
    pub n: Option<usize>,

    /// Estimate every n in 1..=N^2 with a monotone post-pass.
    #[arg(long)]
    pub sweep: bool,

    /// Random inner restarts on top of the deterministic starts.
    #[arg(long, default_value_t = 64)]
    pub restarts: usize,

    /// Outer subspace refinement budget.
    #[arg(long = "outer-iters", default_value_t = 50)]
    pub outer_iters: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SetChoice {
    /// Signed coordinate matrices, the extreme points of the nuclear ball.
    Vasileva,
    /// Orbit of the rank-r diagonal under signed double permutations.
    Averaged,
}

#[derive(Debug, clap::Args)]
pub struct KolmogorovArgs {
    /// Which finite test set to measure.
    #[arg(long, value_enum)]
    pub set: SetChoice,

    /// Matrix order.
    #[arg(long = "N")]
    pub order: usize,

    /// Rank of the averaged-set diagonal (ignored for vasileva).
    #[arg(long, default_value_t = 1)]
    pub r: usize,

    /// Draw this many sampled orbit members instead of enumerating.
    #[arg(long)]
    pub sample: Option<usize>,

    /// Distance norm: schatten:P or mixed:P.
    #[arg(long, value_parser = parse_target)]
    pub target: TargetNorm,

    /// Width index in 1..=N^2.
    #[arg(long)]
    pub n: usize,

    /// Outer subspace search budget.
    #[arg(long = "outer-iters", default_value_t = 50)]
    pub outer_iters: usize,
}

#[derive(Debug, clap::Args)]
pub struct OrthocheckArgs {
    /// Matrix order.
    #[arg(long = "N")]
    pub order: usize,

    /// Diagonal rank.
    #[arg(long)]
    pub r: usize,
}

#[derive(Debug, clap::Args)]
pub struct GaussianArgs {
    /// Matrix order.
    #[arg(long = "N")]
    pub order: usize,

    #[arg(long, value_parser = parse_exponent)]
    pub q: SpectrumExponent,

    #[arg(long, default_value_t = 2000)]
    pub trials: usize,
}

#[derive(Debug, clap::Args)]
pub struct DvoretzkyArgs {
    /// Matrix order.
    #[arg(long = "N")]
    pub order: usize,

    /// Band exponent, at least 2.
    #[arg(long, value_parser = parse_exponent)]
    pub q: SpectrumExponent,

    /// Random subspace dimension.
    #[arg(long)]
    pub k: usize,

    #[arg(long, default_value_t = 200)]
    pub trials: usize,
}

#[derive(Debug, clap::Args)]
pub struct EnvelopeArgs {
    #[arg(long, value_parser = parse_exponent)]
    pub p: SpectrumExponent,

    #[arg(long, value_parser = parse_exponent)]
    pub q: SpectrumExponent,

    /// Matrix order.
    #[arg(long = "N")]
    pub order: usize,

    /// Width index in 1..=N^2.
    #[arg(long)]
    pub n: usize,

    /// Codimension fraction below which a width counts as small.
    #[arg(long = "cfg-small-frac", default_value_t = 0.5)]
    pub small_frac: f64,

    /// Fraction of N^(1+2/s) marking the critical-dimension edge.
    #[arg(long = "cfg-crit-frac", default_value_t = 0.1)]
    pub crit_frac: f64,
}

#[derive(Debug, clap::Args)]
pub struct PhaseDiagramArgs {
    /// Matrix order.
    #[arg(long = "N")]
    pub order: usize,

    /// Comma-separated exponents, e.g. "0.5,1,2,inf".
    #[arg(long = "p-grid", value_parser = parse_exponent_grid)]
    pub p_grid: ExponentGrid,

    #[arg(long = "q-grid", value_parser = parse_exponent_grid)]
    pub q_grid: ExponentGrid,

    /// Comma-separated width indices, e.g. "1,4,16".
    #[arg(long = "n-grid", value_parser = parse_index_grid)]
    pub n_grid: IndexGrid,

    #[arg(long = "cfg-small-frac", default_value_t = 0.5)]
    pub small_frac: f64,

    #[arg(long = "cfg-crit-frac", default_value_t = 0.1)]
    pub crit_frac: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SuiteChoice {
    Primary,
}

#[derive(Debug, clap::Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value = "primary")]
    pub suite: SuiteChoice,
}
