use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use log::info;
use smdd_core::dataset::Dataset;
use smdd_core::decompose::{lissda, DecompositionConfig};
use smdd_core::manifold::export_edges_csv;
use smdd_core::predict::{fit_predictor, LatentPredictor, ReductionKind};

use crate::artifact::Artifact;
use crate::commands::write_manifest;
use crate::config::RunConfig;

pub fn run(cfg: &RunConfig, train_path: &Path, out: Option<PathBuf>) -> Result<()> {
    std::fs::create_dir_all(&cfg.out_dir)
        .with_context(|| format!("creating {}", cfg.out_dir.display()))?;
    let train = Dataset::load(train_path)
        .with_context(|| format!("loading training data {}", train_path.display()))?;
    let ipca = fit_predictor(&train, &cfg.fit_options(ReductionKind::Iterative))
        .context("fitting the iterative pipeline")?;
    let pca = fit_predictor(&train, &cfg.fit_options(ReductionKind::SingleStepPca))
        .context("fitting the PCA baseline pipeline")?;
    let artifact_path = out.unwrap_or_else(|| cfg.out_dir.join("predictor.art"));
    let artifact = Artifact {
        train,
        ipca,
        pca,
        config_hash: cfg.hash(),
    };
    artifact.save(&artifact_path)?;

    write_evr_report(&cfg.out_dir.join("evr_report.csv"), &artifact.ipca)?;
    let sweep = gamma_sweep(&artifact.ipca, cfg)?;
    std::fs::write(cfg.out_dir.join("gamma_sweep.csv"), &sweep)?;
    artifact
        .ipca
        .dec
        .export_csv(&artifact.ipca.sm, &cfg.out_dir.join("segments.csv"))?;
    artifact
        .ipca
        .sm
        .export_csv(&cfg.out_dir.join("stretched.csv"))?;
    let reduced_points = reduced_points_by_row(&artifact.ipca);
    export_edges_csv(
        &artifact.ipca.triangulation,
        &reduced_points,
        &cfg.out_dir.join("triangulation.csv"),
    )?;

    info!(
        "fit: {} turning points, {} jumps, {} domains at gamma={}, retained EVR {:.6}",
        artifact.ipca.sm.turning_points.len(),
        artifact.ipca.sm.source.jump_count,
        artifact.ipca.dec.domain_count(),
        cfg.gamma,
        artifact.ipca.proj_x.total_retained_evr()
    );
    write_manifest(
        &cfg.out_dir,
        "fit",
        cfg,
        &[
            ("artifact", artifact_path.display().to_string()),
            ("turning_points", artifact.ipca.sm.turning_points.len().to_string()),
            ("jump_count", artifact.ipca.sm.source.jump_count.to_string()),
            ("domains", artifact.ipca.dec.domain_count().to_string()),
            (
                "x_steps",
                artifact.ipca.proj_x.steps.len().to_string(),
            ),
            (
                "retained_evr_x",
                format!("{}", artifact.ipca.proj_x.total_retained_evr()),
            ),
        ],
    )?;
    Ok(())
}

/// Original-row-indexed reduced coordinates (undoing the curve ordering).
pub fn reduced_points_by_row(pred: &LatentPredictor) -> Vec<[f64; 2]> {
    let mut out = vec![[0.0, 0.0]; pred.sm.source.points.len()];
    for (pos, &row) in pred.sm.source.order.iter().enumerate() {
        out[row] = pred.sm.source.points[pos];
    }
    out
}

fn write_evr_report(path: &Path, pred: &LatentPredictor) -> Result<()> {
    let mut out = String::from("side,step,kept_dim,evr_kept\n");
    for row in pred.proj_x.evr_report() {
        let _ = writeln!(out, "x,{},{},{}", row.step, row.kept_dim, row.evr_kept);
    }
    for row in pred.proj_y.evr_report() {
        let _ = writeln!(out, "y,{},{},{}", row.step, row.kept_dim, row.evr_kept);
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Table of domain counts per threshold constant.
pub fn gamma_sweep(pred: &LatentPredictor, cfg: &RunConfig) -> Result<String> {
    let mut out = String::from("gamma,epsilon,domains\n");
    for &gamma in &cfg.gamma_list {
        let dec = lissda(
            &pred.sm,
            &DecompositionConfig {
                gamma,
                min_points_per_domain: cfg.min_domain_points,
            },
        )?;
        let _ = writeln!(out, "{gamma},{},{}", dec.epsilon, dec.domain_count());
    }
    Ok(out)
}
