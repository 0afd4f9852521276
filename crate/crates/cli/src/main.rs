//! Pipeline driver: generate data, fit the reduction pipelines, benchmark
//! the learning strategies and emit tables and figures.

// `!(x > 0.0)` in validations also rejects NaN; `x <= 0.0` would not.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod artifact;
mod commands;
mod config;
mod svg;
mod table;

use std::path::{Path, PathBuf};

use anyhow::Result;
use clap::{Parser, Subcommand};

use config::{Method, RunConfig};

#[derive(Parser)]
#[command(name = "smdd", version, about = "Stretched-manifold domain decomposition pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the train/test datasets for the configured case.
    Generate {
        #[arg(long)]
        config: PathBuf,
        /// Override a config key, e.g. --set seed=7 (repeatable).
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Fit the latent pipelines and write the predictor artifact.
    Fit {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        train: PathBuf,
        /// Artifact path (default: <out_dir>/predictor.art).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Run the benchmark table over the selected methods.
    Evaluate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        artifact: PathBuf,
        #[arg(long)]
        test: PathBuf,
        /// Comma-separated method selector overriding the config.
        #[arg(long)]
        methods: Option<String>,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Emit the diagnostic figures for a fitted artifact.
    Plot {
        #[arg(long)]
        artifact: PathBuf,
        /// Test dataset for the prediction figure.
        #[arg(long)]
        test: Option<PathBuf>,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Tabulate the domain count per threshold constant.
    SweepGamma {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        train: PathBuf,
        /// Comma-separated threshold constants overriding the config list.
        #[arg(long)]
        gammas: Option<String>,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

fn load_config(path: &Path, set: &[String], out_dir: Option<PathBuf>) -> Result<RunConfig> {
    let mut cfg = RunConfig::from_file(path, set)?;
    if let Some(dir) = out_dir {
        cfg.out_dir = dir;
    }
    Ok(cfg)
}

fn main() -> Result<()> {
    // single-threaded BLAS keeps end-to-end runs bit-reproducible
    if std::env::var_os("OPENBLAS_NUM_THREADS").is_none() {
        std::env::set_var("OPENBLAS_NUM_THREADS", "1");
    }
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match cli.command {
        Command::Generate { config, set, out_dir } => {
            let cfg = load_config(&config, &set, out_dir)?;
            commands::generate::run(&cfg)
        }
        Command::Fit {
            config,
            train,
            out,
            set,
            out_dir,
        } => {
            let cfg = load_config(&config, &set, out_dir)?;
            commands::fit::run(&cfg, &train, out)
        }
        Command::Evaluate {
            config,
            artifact,
            test,
            methods,
            set,
            out_dir,
        } => {
            let cfg = load_config(&config, &set, out_dir)?;
            let methods = methods
                .map(|s| {
                    s.split(',')
                        .map(|tok| Method::parse(tok.trim()))
                        .collect::<Result<Vec<_>>>()
                })
                .transpose()?;
            commands::evaluate::run(&cfg, &artifact, &test, methods)
        }
        Command::Plot {
            artifact,
            test,
            out_dir,
        } => commands::plot::run(&artifact, test.as_deref(), &out_dir),
        Command::SweepGamma {
            config,
            train,
            gammas,
            set,
            out_dir,
        } => {
            let cfg = load_config(&config, &set, out_dir)?;
            let gammas = gammas
                .map(|s| {
                    s.split(',')
                        .map(|tok| {
                            tok.trim()
                                .parse::<f64>()
                                .map_err(|e| anyhow::anyhow!("bad gamma `{tok}`: {e}"))
                        })
                        .collect::<Result<Vec<_>>>()
                })
                .transpose()?;
            commands::sweep::run(&cfg, &train, gammas)
        }
    }
}
