use std::path::{Path, PathBuf};
use std::process::ExitCode;

use activesg::commands::{edges_text, evaluate, gen_world, load_graph_or_scene};
use activesg::config::{load_predicates, ExperimentConfig, SimilarityKind, SimilaritySection};
use activesg::runner::run_experiment;
use activesg::{CliError, FileError};
use activesg_core::eval::MatchConfig;
use activesg_core::graph::PredicateConfig;
use activesg_core::world::generate::Family;
use clap::{Parser, Subcommand, ValueEnum};

/// Active 3D scene-graph construction on synthetic worlds.
#[derive(Debug, Parser)]
#[command(name = "activesg", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SimilarityArg {
    Exact,
    Synonyms,
    Embedding,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic world and write it as a scene file.
    GenWorld {
        /// `room` or `apartment`.
        #[arg(long)]
        family: Family,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run an experiment config.
    Run {
        config: PathBuf,
        /// Override a config value, e.g. `--set planner.steps=10`. Repeatable.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        /// Runs executed in parallel (across scenes and seeds only).
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Associate detections by ground-truth instance (test mode).
        #[arg(long)]
        oracle_association: bool,
        /// Disable all sensing noise and label flips.
        #[arg(long)]
        zero_noise: bool,
    },
    /// Evaluate a predicted graph against a ground-truth graph or scene.
    Eval {
        pred: PathBuf,
        /// Graph snapshot or scene file.
        gt: PathBuf,
        #[arg(long, default_value_t = MatchConfig::default().tau_geo)]
        tau_geo: f64,
        #[arg(long)]
        tau_sem: Option<f64>,
        #[arg(long, value_enum, default_value = "exact")]
        similarity: SimilarityArg,
        /// Synonym or embedding table for the non-exact modes.
        #[arg(long)]
        table: Option<PathBuf>,
        /// Predicate thresholds used for a scene's ground-truth edges.
        #[arg(long)]
        predicates: Option<PathBuf>,
        /// Also write the report as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the edges derived from a graph snapshot or scene file.
    Edges {
        file: PathBuf,
        /// JSON file with predicate thresholds.
        #[arg(long)]
        predicates: Option<PathBuf>,
    },
}

fn predicates(path: Option<&Path>) -> Result<PredicateConfig, FileError> {
    path.map_or_else(|| Ok(PredicateConfig::default()), load_predicates)
}

fn execute(command: Command) -> Result<(), CliError> {
    match command {
        Command::GenWorld { family, seed, out } => gen_world(family, seed, &out),
        Command::Run { config, overrides, jobs, oracle_association, zero_noise } => {
            if jobs == 0 {
                return Err(CliError::Usage("--jobs must be at least 1".into()));
            }
            let mut overrides = overrides;
            if oracle_association {
                overrides.push("conditions.oracle_association=true".into());
            }
            if zero_noise {
                overrides.push("conditions.zero_noise=true".into());
            }
            let cfg = ExperimentConfig::load(&config, &overrides)?;
            let out = run_experiment(&cfg, &config, jobs)?;
            println!("{}", out.display());
            Ok(())
        }
        Command::Eval { pred, gt, tau_geo, tau_sem, similarity, table, predicates: pfile, out } => {
            let matching = MatchConfig { tau_geo };
            matching.validate().map_err(|e| CliError::Usage(e.to_string()))?;
            let mode = match similarity {
                SimilarityArg::Exact => SimilarityKind::Exact,
                SimilarityArg::Synonyms => SimilarityKind::Synonyms,
                SimilarityArg::Embedding => SimilarityKind::Embedding,
            };
            let mut section = SimilaritySection { mode, table, ..SimilaritySection::default() };
            if let Some(t) = tau_sem {
                section.tau_sem = t;
            }
            let sim = section.resolve(Path::new("--table"))?;
            sim.validate().map_err(|e| CliError::Usage(e.to_string()))?;
            let p = predicates(pfile.as_deref())?;
            let pred_graph = load_graph_or_scene(&pred, &p)?;
            let gt_graph = load_graph_or_scene(&gt, &p)?;
            let report = evaluate(&pred_graph, &gt_graph, &sim, &matching);
            print!("{}", report.to_text());
            if let Some(out) = out {
                std::fs::write(&out, report.to_json()).map_err(|source| FileError::Io { path: out, source })?;
            }
            Ok(())
        }
        Command::Edges { file, predicates: pfile } => {
            let p = predicates(pfile.as_deref())?;
            print!("{}", edges_text(&file, &p)?);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.to_string();
            let msg = msg.strip_prefix("error: ").unwrap_or(&msg);
            eprint!("error: {msg}");
            return ExitCode::from(1);
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
