//! `ctgvd`: batch front end for the commit-level vulnerability detector.

mod commands;
mod config;
mod error;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ctgvd::synth::SynthConfig;

use commands::{ExplainFormat, GraphFormat, Output};
use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "ctgvd", version, about = "Just-in-time vulnerability detection on code transformation graphs")]
struct Cli {
    /// TOML pipeline configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for every randomized step; overrides the config's seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory for written artifacts.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Relational code graph of one MiniC file.
    Graph {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "json")]
        format: GraphFormat,
    },
    /// Code transformation graph of a before/after pair. Use /dev/null for a
    /// missing side.
    Ctg {
        before: PathBuf,
        after: PathBuf,
        #[arg(long)]
        no_trim: bool,
        /// File name recorded in the graph.
        #[arg(long)]
        name: Option<String>,
        #[arg(long, value_enum, default_value = "json")]
        format: GraphFormat,
    },
    /// Label the commits of a corpus from its vulnerability fixes.
    Mine { corpus: PathBuf },
    /// Train a model on the training split of a labeled corpus.
    Train {
        corpus: PathBuf,
        /// Labels file; defaults to the corpus's labels.json, else mined.
        #[arg(long)]
        labels: Option<PathBuf>,
    },
    /// Classify a before/after pair.
    Predict {
        checkpoint: PathBuf,
        before: PathBuf,
        after: PathBuf,
        #[arg(long)]
        name: Option<String>,
    },
    /// Rank the statements of a before/after pair by suspiciousness.
    Explain {
        checkpoint: PathBuf,
        before: PathBuf,
        after: PathBuf,
        #[arg(long)]
        name: Option<String>,
        #[arg(long)]
        top_k: Option<usize>,
        #[arg(long, value_enum, default_value = "json")]
        format: ExplainFormat,
    },
    /// Evaluate a checkpoint on both splits of a labeled corpus.
    Eval {
        checkpoint: PathBuf,
        corpus: PathBuf,
        #[arg(long)]
        labels: Option<PathBuf>,
        /// Also retrain on 1..5 cumulative folds for the training-size curve.
        #[arg(long)]
        curve: bool,
    },
    /// Write a synthetic benchmark corpus with ground-truth labels.
    Synth {
        #[arg(long, default_value_t = 50)]
        projects: usize,
        #[arg(long, default_value_t = 10)]
        commits_per_project: usize,
        #[arg(long, default_value_t = 0.5)]
        dangerous_rate: f64,
    },
}

fn run(cli: Cli) -> Result<String, CliError> {
    let cfg = config::load(cli.config.as_deref(), cli.seed)?;
    let out = Output { dir: cli.out_dir };
    match cli.command {
        Command::Graph { file, format } => commands::cmd_graph(&file, format, cfg.as_ref(), &out),
        Command::Ctg {
            before,
            after,
            no_trim,
            name,
            format,
        } => {
            let change = commands::file_change(&before, &after, name.as_deref())?;
            commands::cmd_ctg(&change, no_trim, format, cfg.as_ref(), &out)
        }
        Command::Mine { corpus } => commands::cmd_mine(&corpus, cfg.as_ref(), &out),
        Command::Train { corpus, labels } => {
            let cfg = commands::require_config(cfg, "train")?;
            commands::cmd_train(&corpus, labels.as_deref(), &cfg, &out)
        }
        Command::Predict {
            checkpoint,
            before,
            after,
            name,
        } => {
            let change = commands::file_change(&before, &after, name.as_deref())?;
            commands::cmd_predict(&checkpoint, &change, cfg.as_ref(), &out)
        }
        Command::Explain {
            checkpoint,
            before,
            after,
            name,
            top_k,
            format,
        } => {
            let change = commands::file_change(&before, &after, name.as_deref())?;
            commands::cmd_explain(&checkpoint, &change, format, top_k, cfg.as_ref(), &out)
        }
        Command::Eval {
            checkpoint,
            corpus,
            labels,
            curve,
        } => {
            let cfg = commands::require_config(cfg, "eval")?;
            commands::cmd_eval(&checkpoint, &corpus, labels.as_deref(), curve, &cfg, &out)
        }
        Command::Synth {
            projects,
            commits_per_project,
            dangerous_rate,
        } => {
            let cfg = commands::require_config(cfg, "synth")?;
            if !(0.0..=1.0).contains(&dangerous_rate) {
                return Err(CliError::config("dangerous-rate must lie in [0, 1]"));
            }
            let sc = SynthConfig {
                projects,
                commits_per_project,
                dangerous_rate,
                seed: cfg.seed,
            };
            commands::cmd_synth(&sc, &out)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let err = CliError::input("usage", e.to_string().trim_end());
            eprintln!("{}", err.to_json());
            return ExitCode::from(err.exit_code() as u8);
        }
    };
    match run(cli) {
        Ok(text) => {
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(text.as_bytes()).and_then(|_| stdout.flush()).is_err() {
                return ExitCode::from(error::EXIT_INTERNAL as u8);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            log::debug!("{e}");
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
