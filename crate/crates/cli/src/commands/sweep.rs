use std::path::Path;

use anyhow::{Context, Result};
use log::info;
use smdd_core::dataset::Dataset;
use smdd_core::predict::{fit_predictor, ReductionKind};

use crate::commands::fit::gamma_sweep;
use crate::commands::write_manifest;
use crate::config::RunConfig;

/// Fits the curve once and tabulates the domain count per threshold constant.
pub fn run(cfg: &RunConfig, train_path: &Path, gammas: Option<Vec<f64>>) -> Result<()> {
    std::fs::create_dir_all(&cfg.out_dir)
        .with_context(|| format!("creating {}", cfg.out_dir.display()))?;
    let mut cfg = cfg.clone();
    if let Some(gammas) = gammas {
        cfg.gamma_list = gammas;
    }
    let train = Dataset::load(train_path)
        .with_context(|| format!("loading training data {}", train_path.display()))?;
    let pred = fit_predictor(&train, &cfg.fit_options(ReductionKind::Iterative))?;
    let table = gamma_sweep(&pred, &cfg)?;
    std::fs::write(cfg.out_dir.join("gamma_sweep.csv"), &table)?;
    info!("gamma sweep:\n{table}");
    println!("{table}");
    write_manifest(
        &cfg.out_dir,
        "sweep-gamma",
        &cfg,
        &[(
            "gammas",
            cfg.gamma_list
                .iter()
                .map(|g| format!("{g}"))
                .collect::<Vec<_>>()
                .join(","),
        )],
    )?;
    Ok(())
}
