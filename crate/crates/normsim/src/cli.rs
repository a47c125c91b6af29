//! Argument definitions and dispatch for the `normsim` binary.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use normsim_core::{NormConfig, TieRule};

use crate::config::{load_json, parse_counts, parse_reals};
use crate::experiment::{self, ExperimentSpec, Mode};
use crate::{output, verify, CliError, Result};

/// Reputation-based social norms: best responses, exact chains, protocol
/// design and agent simulations.
///
/// Set NORMSIM_THREADS to cap worker threads. Exit status is 0 on success,
/// 1 on invariant violations and 2 on configuration errors.
#[derive(Debug, Parser)]
#[command(name = "normsim", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run an experiment spec and write CSV/JSON outputs.
    Simulate(SimulateArgs),
    /// Exact Markov-chain analysis for a small community.
    Chain(ChainArgs),
    /// Feasible region of the design problem over a (δ, c/b) grid.
    Design(DesignArgs),
    /// Best response against one opponent census, printed as JSON.
    Bestresponse(BestResponseArgs),
    /// Cross-check independent computations; exits 1 on any disagreement.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Experiment spec (JSON).
    #[arg(long)]
    pub spec: PathBuf,
    /// Seed; overrides the spec's `seed`.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ChainArgs {
    /// Norm parameters (JSON with N, L, b, c, delta, epsilon, gamma, h).
    /// Defaults to N=6, L=3, b=3, c=1, delta=0.6, epsilon=0.01, gamma=1, h=1.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Community size; overrides the config.
    #[arg(long = "N")]
    pub n: Option<usize>,
    /// Strictly decreasing comma-separated ε values.
    #[arg(long, default_value = "1e-2,1e-3,1e-4,1e-5")]
    pub eps_ladder: String,
    /// Resolve indifference by a fair coin instead of the larger threshold.
    #[arg(long)]
    pub fair_coin: bool,
    /// Output directory for chain.json and omega.csv.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct DesignArgs {
    /// δ grid as start:stop:step (inclusive).
    #[arg(long, default_value = "0.1:0.95:0.05")]
    pub delta_grid: String,
    /// c/b grid as start:stop:step (inclusive).
    #[arg(long, default_value = "0.05:0.9:0.05")]
    pub cb_grid: String,
    /// Highest reputation; caps max_feasible_h.
    #[arg(long = "L", default_value_t = 3)]
    pub l: usize,
    /// Accept g(h) = 0 as feasible.
    #[arg(long)]
    pub boundary_lenient: bool,
    /// Output CSV (delta, c_over_b, H, max_feasible_h).
    #[arg(long, default_value = "region.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct BestResponseArgs {
    /// Norm parameters (JSON).
    #[arg(long)]
    pub config: PathBuf,
    /// Opponent census n(0..=L), e.g. 2,0,0,7; must sum to N-1.
    #[arg(long)]
    pub eta: String,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Smaller grids and budgets.
    #[arg(long)]
    pub quick: bool,
    /// Also write the report as JSON.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

/// Default norm of the `chain` subcommand.
pub fn default_chain_config() -> NormConfig {
    NormConfig {
        n: 6,
        l: 3,
        b: 3.0,
        c: 1.0,
        delta: 0.6,
        epsilon: 0.01,
        gamma: 1.0,
        h: 1,
    }
}

/// Executes one command, writing human-readable output to `out`.
pub fn run(cli: Cli, out: &mut dyn Write) -> Result<()> {
    let say = |out: &mut dyn Write, s: String| -> Result<()> {
        writeln!(out, "{s}").map_err(|e| CliError::io(std::path::Path::new("<stdout>"), e))
    };
    match cli.command {
        Command::Simulate(a) => {
            let mut spec = ExperimentSpec::load(&a.spec)?;
            if let Some(seed) = a.seed {
                spec.seed = seed;
            }
            experiment::run_experiment(&spec, &a.out)?;
            say(out, format!("wrote {:?} outputs to {}", spec.mode, a.out.display()))
        }
        Command::Chain(a) => {
            let mut cfg = match &a.config {
                Some(p) => load_json::<NormConfig>(p)?,
                None => default_chain_config(),
            };
            if let Some(n) = a.n {
                cfg.n = n;
            }
            let norm = cfg.build()?;
            let ladder = parse_reals(&a.eps_ladder)?;
            let tie = if a.fair_coin {
                TieRule::FairCoin
            } else {
                TieRule::LargerThreshold
            };
            let report = experiment::run_chain(&norm, &ladder, tie, &a.out)?;
            output::write_json(&a.out.join("chain.json"), &report)?;
            say(
                out,
                format!(
                    "{} states; SSC support {:?}; wrote chain.json and omega.csv to {}",
                    report.states,
                    report.ssc_support,
                    a.out.display()
                ),
            )
        }
        Command::Design(a) => {
            let spec = ExperimentSpec {
                mode: Mode::Design,
                params: NormConfig {
                    l: a.l,
                    ..default_chain_config()
                },
                delta_grid: Some(a.delta_grid),
                cb_grid: Some(a.cb_grid),
                boundary_lenient: a.boundary_lenient,
                ..design_template()
            };
            spec.validate()?;
            let report = experiment::run_design(&spec, spec.norm()?, &a.out)?;
            say(out, format!("wrote {} cells to {}", report.cells, a.out.display()))
        }
        Command::Bestresponse(a) => {
            let cfg: NormConfig = load_json(&a.config)?;
            let norm = cfg.build()?;
            let eta = parse_counts(&a.eta)?;
            let report = experiment::run_bestresponse(&norm, &eta)?;
            let text = serde_json::to_string_pretty(&output::Versioned::new(report))?;
            say(out, text)
        }
        Command::Verify(a) => {
            let report = verify::run(a.quick)?;
            for s in &report.suites {
                say(out, s.to_string())?;
            }
            if let Some(p) = &a.json {
                output::write_json(p, &report)?;
            }
            if report.passed() {
                Ok(())
            } else {
                let failed: Vec<&str> = report
                    .suites
                    .iter()
                    .filter(|s| !s.passed())
                    .map(|s| s.name.as_str())
                    .collect();
                Err(CliError::Invariant(failed.join(", ")))
            }
        }
    }
}

fn design_template() -> ExperimentSpec {
    ExperimentSpec {
        mode: Mode::Design,
        params: default_chain_config(),
        periods: 0,
        sample_stride: 0,
        seed: 0,
        replicates: 1,
        initial: Default::default(),
        tie: TieRule::default(),
        groups: Vec::new(),
        benefit_variance: None,
        deltas: Vec::new(),
        benefits: Vec::new(),
        eps_ladder: Vec::new(),
        delta_grid: None,
        cb_grid: None,
        boundary_lenient: false,
        eta: None,
    }
}
