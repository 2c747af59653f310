//! `myopic` — operator surface for the closest-neighbor swarm simulator.
//!
//! Four commands cover the workflow:
//!
//! * `run` executes one scenario and exports a JSONL trace, a CSV metrics
//!   table, and a JSON summary that echoes the effective manifest, so any
//!   run can be reproduced from its own output.
//! * `verify` drives the named certificate suites and reports violations,
//!   printing the first counterexample with a full configuration dump.
//! * `scenario list|render` catalogs the scenario kinds and materializes
//!   parameterized specs into concrete configuration files.
//! * `oracle seb` computes smallest enclosing balls stand-alone, optionally
//!   cross-checked against the exhaustive oracle.
//!
//! Exit codes are a stable contract: 0 success, 1 certificate violation,
//! 2 usage error. All randomness flows from one `--seed` (environment
//! default `MYOPIC_SEED`) through named sub-streams.

mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "myopic",
    version,
    about = "Simulate swarms that see only their closest neighbor, and verify their certificates",
    propagate_version = true
)]
struct Cli {
    /// Root seed; scenario sampling, seeded policies, and suite trials all
    /// derive named sub-streams from it. Overrides a manifest's seed.
    #[arg(long, global = true, env = "MYOPIC_SEED", value_name = "SEED")]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute one scenario; export trace, metrics, and summary files.
    Run(RunArgs),
    /// Run certificate suites and report violations.
    Verify(VerifyArgs),
    /// Inspect and materialize scenarios.
    Scenario {
        #[command(subcommand)]
        action: ScenarioAction,
    },
    /// Stand-alone geometric oracles.
    Oracle {
        #[command(subcommand)]
        action: OracleAction,
    },
}

#[derive(Subcommand)]
enum ScenarioAction {
    /// List scenario kinds with their parameters and defaults.
    List,
    /// Materialize a scenario into a runnable configuration file.
    Render(RenderArgs),
}

#[derive(Subcommand)]
enum OracleAction {
    /// Smallest enclosing ball of a point set.
    Seb(SebArgs),
}

#[derive(Args)]
pub(crate) struct RunArgs {
    /// Run manifest (.json or .toml); flags override its fields.
    #[arg(long, value_name = "FILE")]
    pub manifest: Option<PathBuf>,

    /// Scenario file (.json/.toml) or a bare kind name with defaults.
    #[arg(long, value_name = "FILE|KIND")]
    pub scenario: Option<String>,

    /// Move rule: `mm` (exact midpoint) or `linear:AX,AY`.
    #[arg(long, visible_alias = "algo", value_name = "RULE")]
    pub rule: Option<String>,

    /// Tie policy: order | lowest-id | random[:SEED] | cyclic.
    #[arg(long, value_name = "POLICY")]
    pub tie: Option<String>,

    /// Orthogonal-direction policy: positive | negative | random[:SEED] | cyclic.
    #[arg(long, value_name = "POLICY")]
    pub ortho: Option<String>,

    /// Step budget.
    #[arg(long, value_name = "N")]
    pub steps: Option<u64>,

    /// Width of the tie band for candidate selection.
    #[arg(long, value_name = "EPS")]
    pub eps_tie: Option<f64>,

    /// Enclosing radius at or below which the run counts as gathered.
    #[arg(long, value_name = "EPS")]
    pub eps_gather: Option<f64>,

    /// Write the trace as JSONL (one configuration per line).
    #[arg(long, value_name = "FILE")]
    pub trace: Option<PathBuf>,

    /// Write per-round metrics as CSV.
    #[arg(long, value_name = "FILE")]
    pub metrics: Option<PathBuf>,

    /// Write the summary JSON to a file instead of stdout.
    #[arg(long, value_name = "FILE")]
    pub summary: Option<PathBuf>,

    /// Check the monotonicity certificates on the produced trace; any
    /// violation makes the command exit 1.
    #[arg(long)]
    pub check: bool,

    /// Comma-separated subset of trace checks to run
    /// (radius-monotone, diameter-monotone). Implies --check.
    #[arg(long, value_delimiter = ',', value_name = "LIST")]
    pub checks: Vec<String>,
}

#[derive(Args)]
pub(crate) struct VerifyArgs {
    /// Suite name, or `all` for every suite.
    #[arg(value_name = "SUITE")]
    pub suite: String,

    /// Trials per suite (default 200).
    #[arg(long, value_name = "N")]
    pub trials: Option<u64>,

    /// Worker threads when several suites run (default: one per CPU).
    #[arg(long, value_name = "N")]
    pub jobs: Option<usize>,
}

#[derive(Args)]
pub(crate) struct RenderArgs {
    /// Scenario kind (unambiguous fragments work: `chain`, `cloud`, ...).
    #[arg(long, value_name = "KIND")]
    pub kind: String,

    /// Side length (triangle kinds).
    #[arg(long, value_name = "LEN")]
    pub side: Option<f64>,

    /// Barycenter distance in side lengths (two-triangles).
    #[arg(long, value_name = "FACTOR")]
    pub separation: Option<f64>,

    /// Ambient dimension.
    #[arg(long = "d", visible_alias = "dimension", value_name = "D")]
    pub dimension: Option<usize>,

    /// Rotation in radians (equilateral-triangle).
    #[arg(long, value_name = "RAD")]
    pub rotation: Option<f64>,

    /// Rotation of the first triangle (two-triangles).
    #[arg(long, value_name = "RAD")]
    pub rotation_first: Option<f64>,

    /// Rotation of the second triangle (two-triangles).
    #[arg(long, value_name = "RAD")]
    pub rotation_second: Option<f64>,

    /// Number of processes (collinear-chain, random-cloud).
    #[arg(long = "n", value_name = "N")]
    pub n: Option<usize>,

    /// Spacing between chain positions (collinear-chain).
    #[arg(long = "D", visible_alias = "spacing", value_name = "LEN")]
    pub spacing: Option<f64>,

    /// Half-width of the sampling box (random-cloud).
    #[arg(long, value_name = "LEN")]
    pub scale: Option<f64>,

    /// Seed for the cloud coordinates (random-cloud); defaults to the
    /// "scenario" sub-stream of the root seed.
    #[arg(long, value_name = "SEED")]
    pub cloud_seed: Option<u64>,

    /// Positions as a JSON array of coordinate arrays (explicit).
    #[arg(long, value_name = "JSON")]
    pub positions: Option<String>,

    /// Emit the parametric spec instead of materialized positions.
    #[arg(long)]
    pub spec: bool,

    /// Output file (.json or .toml; default: JSON on stdout).
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub(crate) struct SebArgs {
    /// Point source: a scenario file or a JSON array of coordinate arrays.
    #[arg(long, value_name = "FILE")]
    pub input: Option<PathBuf>,

    /// Points inline, as a JSON array of coordinate arrays.
    #[arg(long, value_name = "JSON")]
    pub points: Option<String>,

    /// Cross-check against the exhaustive oracle; disagreement exits 1.
    #[arg(long)]
    pub brute: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let seed = cli.seed;
    let outcome = match cli.command {
        Command::Run(args) => commands::cmd_run(&args, seed),
        Command::Verify(args) => commands::cmd_verify(&args, seed),
        Command::Scenario { action } => match action {
            ScenarioAction::List => commands::cmd_scenario_list(),
            ScenarioAction::Render(args) => commands::cmd_scenario_render(&args, seed),
        },
        Command::Oracle { action } => match action {
            OracleAction::Seb(args) => commands::cmd_oracle_seb(&args),
        },
    };
    match outcome {
        Ok(code) => code,
        Err(error) => {
            eprintln!("error: {error:#}");
            ExitCode::from(2)
        }
    }
}
