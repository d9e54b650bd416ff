use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

mod commands;
mod output;

use output::{CliError, Outcome};

#[derive(Debug, Parser, Serialize)]
#[command(name = "slplab", version, about = "Verification suites for linear propagation of logical edits")]
struct Cli {
    /// Seed for every random draw in the run.
    #[arg(long, global = true, env = "SLPLAB_SEED", default_value_t = 0)]
    seed: u64,

    /// Report destination; stdout when omitted.
    #[arg(long, global = true)]
    #[serde(skip)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args, Serialize)]
struct SpaceArgs {
    /// Relation file: `{"entities": [...], "relations": {"name": [["h", "t"], ...]}}`.
    #[arg(long)]
    relations: PathBuf,
}

#[derive(Debug, Args, Serialize)]
struct MapArgs {
    #[command(flatten)]
    space: SpaceArgs,
    /// Block specification: `[{"context_dim": k, "m": m, "parity": "+" | "-" | null}]`.
    /// Defaults to an even and an odd block sized for the space.
    #[arg(long)]
    blocks: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct ConjArgs {
    #[arg(long, default_value_t = 2)]
    atoms: usize,
    /// Number of possible worlds (feature dimension).
    #[arg(long, default_value_t = 8)]
    dim: usize,
    /// Conjunction depth of the truncated closure.
    #[arg(long, default_value_t = slplab_core::conjunction::DEFAULT_DEPTH)]
    depth: usize,
}

#[derive(Debug, Subcommand, Serialize)]
enum Command {
    /// Relation-algebra laws, exhaustive for small entity sets or sampled.
    RelalgLaws {
        #[arg(long, default_value_t = 3)]
        entities: usize,
        #[arg(long)]
        exhaustive: bool,
        #[arg(long, default_value_t = 10_000)]
        pair_samples: usize,
        #[arg(long, default_value_t = 1_000)]
        triple_samples: usize,
    },
    /// Logical families of the query space.
    Families(SpaceArgs),
    /// Sample a factorized SLP map and check it.
    BuildSlp {
        #[command(flatten)]
        map: MapArgs,
        /// Write the feature matrix as CSV.
        #[arg(long, requires = "index_out")]
        features_out: Option<PathBuf>,
        /// Write the row-order sidecar for the CSV.
        #[arg(long, requires = "features_out")]
        index_out: Option<PathBuf>,
    },
    /// Check equivariance, SLP and the kernel decomposition of a stored feature map.
    VerifySlp {
        #[command(flatten)]
        space: SpaceArgs,
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        index: PathBuf,
        /// Equivariance tolerance.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Verify the tensor-factorized form and the negation split of a sampled map.
    Factorize(MapArgs),
    /// Isotypic decomposition of the span under entity renamings.
    Isotypic {
        #[command(flatten)]
        map: MapArgs,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Converse-parity decomposition of a sampled map.
    Parity(MapArgs),
    /// Kernel stability and substitution under conjunction.
    KernelStability(ConjArgs),
    /// Fit a symmetric bilinear conjunction operator.
    FitBilinear(ConjArgs),
    /// Collapse certificate for idempotent conjunction.
    Collapse {
        #[arg(long, default_value_t = 1)]
        atoms: usize,
        #[arg(long, default_value_t = 4)]
        dim: usize,
        /// Impose negation equivariance (signed features, `¬u = −u`).
        #[arg(long)]
        neg_equiv: bool,
    },
    /// Train a scorer on a synthetic KB and measure gradient alignment.
    Gradlab(GradlabArgs),
    /// First-order edit propagation across families.
    Audit {
        #[command(flatten)]
        space: SpaceArgs,
        /// Stored feature map; a sampled SLP map is used when omitted.
        #[arg(long, requires = "index")]
        features: Option<PathBuf>,
        #[arg(long, requires = "features")]
        index: Option<PathBuf>,
        /// Index of the edited family.
        #[arg(long, default_value_t = 0)]
        family: usize,
        #[arg(long, default_value_t = 1.0)]
        eta: f64,
    },
}

#[derive(Debug, Args, Serialize)]
struct GradlabArgs {
    /// Run configuration JSON; its seed overrides `--seed`.
    #[arg(long, conflicts_with_all = ["entity_count", "relation_count", "density", "arch", "hidden", "epochs", "lr", "eta", "block"])]
    config: Option<PathBuf>,
    #[arg(long)]
    entity_count: Option<usize>,
    /// Number of base relations.
    #[arg(long = "relation-count")]
    relation_count: Option<usize>,
    #[arg(long)]
    density: Option<f64>,
    /// `mlp` or `slp_linear`.
    #[arg(long)]
    arch: Option<String>,
    #[arg(long)]
    hidden: Option<usize>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    eta: Option<f64>,
    /// `embedding`, `hidden`, `head` or `all`.
    #[arg(long)]
    block: Option<String>,
    /// Histogram CSV destination.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Full alignment report destination.
    #[arg(long)]
    alignment_out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return ExitCode::from(code.clamp(0, 255) as u8);
        }
    };
    match run(&cli) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Fail) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let (report, seed) = commands::execute(&cli.command, cli.seed)?;
    let config = serde_json::to_string(cli).map_err(|e| CliError::Runtime(e.into()))?;
    let report = output::with_provenance(report, &config, seed);
    output::emit_report(&report, cli.out.as_deref())?;
    Ok(if report.pass { Outcome::Pass } else { Outcome::Fail })
}
