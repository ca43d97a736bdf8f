//! Command-line front end: Shtarkov sums, game values, forecaster play,
//! covers, truncation checks, the linear-class experiment, and the one-shot
//! verification suite. Reports are JSON on stdout (deterministic for a fixed
//! config and seed); timing goes to stderr.

mod files;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use shtarkov_lab::cnml::{self, ForecasterFactory, ForecasterKind, SequenceAdversary};
use shtarkov_lab::verify::{self, VerifyConfig};
use shtarkov_lab::{covers, game, linlab, shtarkov, truncation};
use shtarkov_lab::{Error, Prefix, Problem, Result};

use report::{ConfigEcho, Report};

/// Environment variable acting as a global ceiling on every enumeration
/// budget.
const BUDGET_ENV: &str = "SHTARKOV_LAB_BUDGET";

#[derive(Parser)]
#[command(
    name = "shtarkov-lab",
    version,
    about = "Exact minimax sequential probability assignment under log loss"
)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct GlobalArgs {
    /// Class-spec JSON file.
    #[arg(long, global = true)]
    spec: Option<PathBuf>,
    /// Horizon T.
    #[arg(long, global = true)]
    horizon: Option<usize>,
    /// RNG seed for the randomized commands.
    #[arg(long, global = true, default_value_t = 7)]
    seed: u64,
    /// Budget for context-tree enumeration.
    #[arg(long, global = true, default_value_t = 1_000_000)]
    budget_trees: u64,
    /// Budget for sequence enumeration and lattice sizes.
    #[arg(long, global = true, default_value_t = 1_000_000)]
    budget_seqs: u64,
    /// Simplex-lattice resolution for the grid game oracle.
    #[arg(long, global = true)]
    grid: Option<f64>,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = OutFormat::Json)]
    out: OutFormat,
    /// Tolerance echoed into reports (checks use their own pinned values).
    #[arg(long, global = true, default_value_t = 1e-9)]
    tolerance: f64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutFormat {
    Json,
    Table,
}

#[derive(Subcommand)]
enum Command {
    /// Shtarkov sums in every variant.
    #[command(subcommand)]
    Shtarkov(ShtarkovCmd),
    /// Extensive-form game values.
    #[command(subcommand)]
    Game(GameCmd),
    /// The minimax forecaster and the play harness.
    #[command(subcommand)]
    Cnml(CnmlCmd),
    /// Sequential covers, fat-shattering, and entropy bounds.
    #[command(subcommand)]
    Covers(CoversCmd),
    /// Smooth-truncation checks.
    #[command(subcommand)]
    Truncate(TruncateCmd),
    /// Linear-class experiments.
    #[command(subcommand)]
    Linlab(LinlabCmd),
    /// Run every cross-module check and print the pass/fail matrix.
    Verify {
        /// Number of seeded random classes per suite.
        #[arg(long, default_value_t = 200)]
        classes: usize,
        /// Monte Carlo repetitions.
        #[arg(long, default_value_t = 200)]
        mc_runs: usize,
        /// Samples per Monte Carlo repetition.
        #[arg(long, default_value_t = 100_000)]
        mc_samples: usize,
    },
}

#[derive(Subcommand)]
enum ShtarkovCmd {
    /// Classical context-free sum.
    Contextfree,
    /// Sum conditioned on a fixed context sequence.
    Conditional {
        /// Comma-separated context ids, length T (e.g. `0,1,0`).
        #[arg(long)]
        contexts: String,
    },
    /// Sum on a context tree.
    Contextual {
        #[arg(long)]
        tree: PathBuf,
    },
    /// Sum over continuations of an observed prefix routed through a tree.
    Prefix {
        #[arg(long)]
        tree: PathBuf,
        #[arg(long)]
        prefix: PathBuf,
    },
    /// Worst case over context trees (backward recursion).
    Worstcase {
        #[arg(long)]
        prefix: Option<PathBuf>,
        #[arg(long)]
        constraint: Option<PathBuf>,
        /// Also run the brute-force enumeration and report the first argmax
        /// tree.
        #[arg(long)]
        witness: bool,
    },
    /// Monte Carlo estimate of the contextual sum.
    Mc {
        #[arg(long)]
        tree: PathBuf,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
    },
    /// General sum of the sub-probability class induced on a tree, against
    /// the direct contextual sum.
    General {
        #[arg(long)]
        tree: PathBuf,
        #[arg(long)]
        prefix: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum GameCmd {
    /// Primal, dual, and worst-case tree-sum values (optionally the lattice
    /// oracle) with their maximum pairwise gap.
    Solve {
        #[arg(long)]
        constraint: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum CnmlCmd {
    /// Play the forecaster against an adversary and emit the transcript.
    Play {
        /// `sequence:FILE` or `worstcase`.
        #[arg(long)]
        adversary: String,
        #[arg(long, value_enum, default_value_t = ForecasterArg::Cnml)]
        forecaster: ForecasterArg,
    },
    /// Exhaustive worst-case realized regret of a forecaster.
    Worst {
        #[arg(long, value_enum, default_value_t = ForecasterArg::Cnml)]
        forecaster: ForecasterArg,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ForecasterArg {
    Cnml,
    Uniform,
    Bayes,
}

impl ForecasterArg {
    fn kind(self) -> ForecasterKind {
        match self {
            ForecasterArg::Cnml => ForecasterKind::Cnml,
            ForecasterArg::Uniform => ForecasterKind::Uniform,
            ForecasterArg::Bayes => ForecasterKind::Bayes,
        }
    }
}

#[derive(Subcommand)]
enum CoversCmd {
    /// Worst-case log minimal sequential cover size.
    Entropy {
        #[arg(long)]
        alpha: f64,
    },
    /// Log minimal global sequential cover size.
    Global {
        #[arg(long)]
        alpha: f64,
    },
    /// Sequential fat-shattering dimension.
    Fat {
        #[arg(long)]
        alpha: f64,
    },
    /// Every entropy-based regret bound over a scale grid.
    Bounds {
        /// Comma-separated scales (e.g. `0.05,0.1,0.2`).
        #[arg(long)]
        alpha_grid: String,
    },
}

#[derive(Subcommand)]
enum TruncateCmd {
    /// Compare game values and tree sums of a class against its truncations.
    Check {
        /// Comma-separated levels (default `0.1,0.03,0.01,0.003,0.001`).
        #[arg(long)]
        delta_grid: Option<String>,
        #[arg(long)]
        constraint: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum LinlabCmd {
    /// Conditional sum of the linear class on the orthonormal design against
    /// its closed-form and square-root floors.
    Lowerbound {
        #[arg(long)]
        dim: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    match run(&cli) {
        Ok(exit) => {
            eprintln!("completed in {} ms", start.elapsed().as_millis());
            exit
        }
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::BudgetExceeded { .. } => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}

fn effective_budget(requested: u64) -> u64 {
    match std::env::var(BUDGET_ENV) {
        Ok(v) => match v.parse::<u64>() {
            Ok(ceiling) => requested.min(ceiling),
            Err(_) => requested,
        },
        Err(_) => requested,
    }
}

struct Ctx {
    global: GlobalArgs,
    budget_trees: u64,
    budget_seqs: u64,
}

impl Ctx {
    fn config_echo(&self, extra: Vec<(String, String)>) -> ConfigEcho {
        ConfigEcho {
            spec: self.global.spec.as_ref().map(|p| p.display().to_string()),
            horizon: self.global.horizon,
            seed: self.global.seed,
            budget_trees: self.budget_trees,
            budget_seqs: self.budget_seqs,
            grid: self.global.grid,
            out: match self.global.out {
                OutFormat::Json => "json".into(),
                OutFormat::Table => "table".into(),
            },
            tolerance: self.global.tolerance,
            extra,
        }
    }

    fn problem(&self) -> Result<Problem> {
        let path = self.global.spec.as_ref().ok_or_else(|| Error::ClassSpec {
            path: "--spec".into(),
            message: "a class-spec file is required".into(),
        })?;
        files::load_spec(path)
    }

    fn horizon(&self) -> Result<usize> {
        self.global.horizon.ok_or_else(|| Error::ClassSpec {
            path: "--horizon".into(),
            message: "a horizon is required".into(),
        })
    }

    fn emit<T: Serialize>(&self, command: &str, extra: Vec<(String, String)>, result: T) {
        let report = Report::new(command, self.config_echo(extra), result);
        match self.global.out {
            OutFormat::Json => println!("{}", report.to_json()),
            OutFormat::Table => print!("{}", report.to_table()),
        }
    }
}

fn value_payload(value: shtarkov_lab::LogValue) -> serde_json::Value {
    let log = value.log();
    let mut payload = json!({ "value_log": log });
    if log < 700.0 {
        payload["value_linear"] = json!(value.linear());
    }
    payload
}

fn run(cli: &Cli) -> Result<ExitCode> {
    let ctx = Ctx {
        global: cli.global.clone(),
        budget_trees: effective_budget(cli.global.budget_trees),
        budget_seqs: effective_budget(cli.global.budget_seqs),
    };
    match &cli.command {
        Command::Shtarkov(cmd) => run_shtarkov(&ctx, cmd)?,
        Command::Game(GameCmd::Solve { constraint }) => {
            let problem = ctx.problem()?;
            let horizon = ctx.horizon()?;
            let constraint = constraint
                .as_ref()
                .map(|p| files::load_constraint(p))
                .transpose()?;
            let report = game::solve(
                &problem,
                horizon,
                ctx.global.grid,
                constraint.as_ref(),
                ctx.budget_seqs,
            )?;
            ctx.emit("game solve", vec![], report);
        }
        Command::Cnml(cmd) => run_cnml(&ctx, cmd)?,
        Command::Covers(cmd) => run_covers(&ctx, cmd)?,
        Command::Truncate(TruncateCmd::Check {
            delta_grid,
            constraint,
        }) => {
            let problem = ctx.problem()?;
            let horizon = ctx.horizon()?;
            let constraint = constraint
                .as_ref()
                .map(|p| files::load_constraint(p))
                .transpose()?;
            let grid = match delta_grid {
                Some(raw) => files::parse_float_list(raw).map_err(|m| Error::ClassSpec {
                    path: "--delta-grid".into(),
                    message: m,
                })?,
                None => truncation::DEFAULT_DELTA_GRID.to_vec(),
            };
            let report = truncation::truncated_regret_gap_check(
                &problem,
                horizon,
                &grid,
                constraint.as_ref(),
            )?;
            let extra = vec![("delta_grid".into(), format!("{grid:?}"))];
            ctx.emit("truncate check", extra, report);
        }
        Command::Linlab(LinlabCmd::Lowerbound { dim }) => {
            let horizon = ctx.horizon()?;
            let report = linlab::lin_lower_bound_experiment(horizon, *dim, ctx.budget_seqs)?;
            let extra = vec![("dim".into(), dim.to_string())];
            ctx.emit("linlab lowerbound", extra, report);
        }
        Command::Verify {
            classes,
            mc_runs,
            mc_samples,
        } => {
            let config = VerifyConfig {
                seed: ctx.global.seed,
                class_count: *classes,
                budget_trees: ctx.budget_trees,
                budget_seqs: ctx.budget_seqs,
                budget_cover: effective_budget(1 << 22),
                mc_runs: *mc_runs,
                mc_samples: *mc_samples,
                tolerance: ctx.global.tolerance,
            };
            let report = verify::run(&config);
            let exit = if report.failed > 0 {
                ExitCode::from(2)
            } else if report.skipped > 0 {
                ExitCode::from(3)
            } else {
                ExitCode::SUCCESS
            };
            ctx.emit("verify", vec![], report);
            return Ok(exit);
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn run_shtarkov(ctx: &Ctx, cmd: &ShtarkovCmd) -> Result<()> {
    let problem = ctx.problem()?;
    match cmd {
        ShtarkovCmd::Contextfree => {
            let horizon = ctx.horizon()?;
            let v = shtarkov::contextfree(&problem, horizon)?;
            ctx.emit("shtarkov contextfree", vec![], value_payload(v));
        }
        ShtarkovCmd::Conditional { contexts } => {
            let contexts = files::parse_id_list(contexts).map_err(|m| Error::ClassSpec {
                path: "--contexts".into(),
                message: m,
            })?;
            let v = shtarkov::conditional(&problem, &contexts)?;
            let extra = vec![("contexts".into(), format!("{contexts:?}"))];
            ctx.emit("shtarkov conditional", extra, value_payload(v));
        }
        ShtarkovCmd::Contextual { tree } => {
            let horizon = ctx.horizon()?;
            let tree = files::load_tree(tree, horizon, problem.k(), problem.x_size())?;
            let v = shtarkov::contextual(&problem, &tree)?;
            ctx.emit("shtarkov contextual", vec![], value_payload(v));
        }
        ShtarkovCmd::Prefix { tree, prefix } => {
            let horizon = ctx.horizon()?;
            let prefix = files::load_prefix(prefix)?;
            let depth =
                horizon
                    .checked_sub(prefix.rounds())
                    .ok_or(Error::DepthMismatch {
                        tree_depth: 0,
                        prefix_len: prefix.rounds(),
                        horizon,
                    })?;
            let tree = files::load_tree(tree, depth, problem.k(), problem.x_size())?;
            let v = shtarkov::prefix_sum(&problem, &tree, &prefix, horizon)?;
            ctx.emit("shtarkov prefix", vec![], value_payload(v));
        }
        ShtarkovCmd::Worstcase {
            prefix,
            constraint,
            witness,
        } => {
            let horizon = ctx.horizon()?;
            let prefix = match prefix {
                Some(p) => files::load_prefix(p)?,
                None => Prefix::empty(),
            };
            let constraint = constraint
                .as_ref()
                .map(|p| files::load_constraint(p))
                .transpose()?;
            let v = shtarkov::worst_case(&problem, horizon, &prefix, constraint.as_ref())?;
            let mut payload = value_payload(v);
            if *witness {
                if prefix.rounds() != 0 {
                    return Err(Error::Unsupported {
                        required: "an empty prefix for --witness".into(),
                        got: format!("{} observed rounds", prefix.rounds()),
                    });
                }
                let (bf, tree) = shtarkov::worst_case_bruteforce(
                    &problem,
                    horizon,
                    constraint.as_ref(),
                    ctx.budget_trees,
                )?;
                payload["witness_tree"] = serde_json::to_value(tree.nodes())?;
                payload["witness_value_log"] = serde_json::to_value(bf.log())?;
            }
            ctx.emit("shtarkov worstcase", vec![], payload);
        }
        ShtarkovCmd::Mc { tree, samples } => {
            let horizon = ctx.horizon()?;
            let tree = files::load_tree(tree, horizon, problem.k(), problem.x_size())?;
            let est = shtarkov::mc_estimate(&problem, &tree, *samples, ctx.global.seed)?;
            let extra = vec![("samples".into(), samples.to_string())];
            ctx.emit("shtarkov mc", extra, est);
        }
        ShtarkovCmd::General { tree, prefix } => {
            let horizon = ctx.horizon()?;
            let prefix = prefix.as_ref().map(|p| files::load_prefix(p)).transpose()?;
            let prefix_len = prefix.as_ref().map_or(0, |p| p.rounds());
            let depth = horizon.checked_sub(prefix_len).ok_or(Error::DepthMismatch {
                tree_depth: 0,
                prefix_len,
                horizon,
            })?;
            let tree = files::load_tree(tree, depth, problem.k(), problem.x_size())?;
            let induced = shtarkov::induce_subprob(&problem, &tree, prefix.as_ref())?;
            let general = shtarkov::general_shtarkov(&induced);
            let direct = match &prefix {
                Some(p) => shtarkov::prefix_sum(&problem, &tree, p, horizon)?,
                None => shtarkov::contextual(&problem, &tree)?,
            };
            let gap = if general.log() == direct.log() {
                0.0
            } else {
                (general.log() - direct.log()).abs()
            };
            let payload = json!({
                "value_log": general.log(),
                "value_linear": general.linear(),
                "contextual_value_log": direct.log(),
                "max_abs_gap": gap,
                "members": induced.members().len(),
                "ground_size": induced.ground(),
            });
            ctx.emit("shtarkov general", vec![], payload);
        }
    }
    Ok(())
}

fn run_cnml(ctx: &Ctx, cmd: &CnmlCmd) -> Result<()> {
    let problem = ctx.problem()?;
    let horizon = ctx.horizon()?;
    match cmd {
        CnmlCmd::Play {
            adversary,
            forecaster,
        } => {
            let factory = ForecasterFactory::new(&problem, horizon, None, forecaster.kind())?;
            let (contexts, labels) = if let Some(path) = adversary.strip_prefix("sequence:") {
                files::load_sequence(std::path::Path::new(path))?
            } else if adversary == "worstcase" {
                let worst = cnml::exhaustive_worst_regret(&factory, ctx.budget_seqs)?;
                (worst.contexts, worst.labels)
            } else {
                return Err(Error::Unsupported {
                    required: "an adversary of the form sequence:FILE or worstcase".into(),
                    got: adversary.clone(),
                });
            };
            if contexts.len() != horizon || labels.len() != horizon {
                return Err(Error::LengthMismatch {
                    contexts: contexts.len(),
                    labels: labels.len(),
                });
            }
            let mut f = factory.fresh();
            let mut adversary = SequenceAdversary { contexts, labels };
            let transcript = cnml::play_game(&mut *f, &mut adversary, &problem, horizon)?;
            ctx.emit("cnml play", vec![], transcript);
        }
        CnmlCmd::Worst { forecaster } => {
            let factory = ForecasterFactory::new(&problem, horizon, None, forecaster.kind())?;
            let worst = cnml::exhaustive_worst_regret(&factory, ctx.budget_seqs)?;
            let extra = vec![("forecaster".into(), factory.name())];
            ctx.emit("cnml worst", extra, worst);
        }
    }
    Ok(())
}

fn run_covers(ctx: &Ctx, cmd: &CoversCmd) -> Result<()> {
    let problem = ctx.problem()?;
    let horizon = ctx.horizon()?;
    let class = covers::BinaryClass::from_problem(&problem)?;
    let budget = effective_budget(ctx.budget_trees.max(1 << 22));
    match cmd {
        CoversCmd::Entropy { alpha } => {
            let h = covers::sequential_entropy(&class, *alpha, horizon, budget)?;
            let payload = json!({ "alpha": alpha, "entropy": h, "cover_size": h.exp().round() });
            ctx.emit("covers entropy", vec![], payload);
        }
        CoversCmd::Global { alpha } => {
            let (h, cover) = covers::global_entropy(&class, *alpha, horizon, budget)?;
            let payload = json!({
                "alpha": alpha,
                "entropy": h,
                "cover_size": cover.elements.len(),
            });
            ctx.emit("covers global", vec![], payload);
        }
        CoversCmd::Fat { alpha } => {
            let d = covers::fat_shattering_dim(&class, *alpha, horizon, budget)?;
            let payload = json!({ "alpha": alpha, "dimension": d });
            ctx.emit("covers fat", vec![], payload);
        }
        CoversCmd::Bounds { alpha_grid } => {
            let alpha_grid = files::parse_float_list(alpha_grid).map_err(|m| Error::ClassSpec {
                path: "--alpha-grid".into(),
                message: m,
            })?;
            let report = covers::entropy_regret_bounds(&problem, horizon, &alpha_grid, budget)?;
            ctx.emit("covers bounds", vec![], report);
        }
    }
    Ok(())
}
