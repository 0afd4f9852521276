use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use anyhow::{Context, Result};
use log::info;
use ndarray::{Array1, Array2, Axis};
use smdd_core::dataset::Dataset;
use smdd_core::mlp::{mlp_predict, train_mlp, train_per_domain, MlpModel};
use smdd_core::predict::{
    weighted_error, DomainError, ErrorMetric, ErrorReport, InverseMode, LatentPredictor,
};

use crate::artifact::Artifact;
use crate::commands::write_manifest;
use crate::config::{Method, RunConfig};
use crate::table::{render_text, write_csv, BenchRow};

pub fn run(
    cfg: &RunConfig,
    artifact_path: &Path,
    test_path: &Path,
    methods_override: Option<Vec<Method>>,
) -> Result<()> {
    std::fs::create_dir_all(&cfg.out_dir)
        .with_context(|| format!("creating {}", cfg.out_dir.display()))?;
    let artifact = Artifact::load(artifact_path)?;
    let test = Dataset::load(test_path)
        .with_context(|| format!("loading test data {}", test_path.display()))?;
    let methods = methods_override.unwrap_or_else(|| cfg.methods.clone());
    let q = artifact.ipca.q;
    let mut rows: Vec<BenchRow> = Vec::new();
    let mut domain_csv = String::from("method,domain,n_test,mean_error\n");

    for method in &methods {
        match method {
            Method::InterpIpca => {
                let mode = scalar_or(q, InverseMode::PseudoInverse);
                let rep = artifact.ipca.evaluate_with_mode(&test, cfg.metric, mode)?;
                push_interp(&mut rows, &mut domain_csv, "interp-ipca", &rep);
            }
            Method::InterpPca => {
                let mode = scalar_or(q, InverseMode::PseudoInverse);
                let rep = artifact.pca.evaluate_with_mode(&test, cfg.metric, mode)?;
                push_interp(&mut rows, &mut domain_csv, "interp-pca", &rep);
            }
            Method::InterpIpcaPinv => {
                let rep =
                    artifact
                        .ipca
                        .evaluate_with_mode(&test, cfg.metric, InverseMode::PseudoInverse)?;
                push_interp(&mut rows, &mut domain_csv, "interp-ipca-pinv", &rep);
            }
            Method::InterpIpcaComplement => {
                let rep = artifact.ipca.evaluate_with_mode(
                    &test,
                    cfg.metric,
                    InverseMode::Complement(cfg.knn),
                )?;
                push_interp(&mut rows, &mut domain_csv, "interp-ipca-complement", &rep);
            }
            Method::MlpFull => {
                let model = train_mlp(
                    artifact.train.x.view(),
                    artifact.train.y.view(),
                    &cfg.mlp_config(cfg.mlp_lr, 0),
                )
                .context("training the full-domain MLP")?;
                model.export_training_curve(&cfg.out_dir.join("training_curve_full.csv"))?;
                let (errors, seconds) = eval_mlp(&model, &artifact.ipca, &test, cfg.metric)?;
                let (mean, variance) = mean_var(&errors);
                rows.push(BenchRow {
                    section: "mlp".into(),
                    method: "mlp-full".into(),
                    mean,
                    variance,
                    seconds,
                });
            }
            Method::MlpDomains => {
                run_domain_mlps(cfg, &artifact, &test, &mut rows, &mut domain_csv)?;
            }
        }
    }

    write_csv(&cfg.out_dir.join("benchmark.csv"), &rows, cfg.record_timing)?;
    let text = render_text(&rows, cfg.record_timing);
    std::fs::write(cfg.out_dir.join("benchmark.txt"), &text)?;
    std::fs::write(cfg.out_dir.join("per_domain.csv"), &domain_csv)?;
    info!("benchmark:\n{text}");
    write_manifest(
        &cfg.out_dir,
        "evaluate",
        cfg,
        &[
            ("artifact_hash", artifact.config_hash.clone()),
            (
                "methods",
                methods.iter().map(|m| m.as_str()).collect::<Vec<_>>().join(","),
            ),
            ("n_test", test.n().to_string()),
        ],
    )?;
    Ok(())
}

fn scalar_or(q: usize, fallback: InverseMode) -> InverseMode {
    if q == 1 {
        InverseMode::None
    } else {
        fallback
    }
}

fn push_interp(rows: &mut Vec<BenchRow>, domain_csv: &mut String, name: &str, rep: &ErrorReport) {
    rows.push(BenchRow {
        section: "interpolant".into(),
        method: name.into(),
        mean: rep.mean_relative_error,
        variance: rep.variance,
        seconds: rep.inference_time_seconds,
    });
    for d in &rep.per_domain {
        let _ = writeln!(domain_csv, "{name},{},{},{}", d.domain, d.n_test, d.mean_error);
    }
}

/// Test parameters standardized with the training statistics.
fn standardized_test_x(pred: &LatentPredictor, test: &Dataset) -> Array2<f64> {
    let raw = test.raw_x();
    let mut out = raw;
    for j in 0..out.ncols() {
        for i in 0..out.nrows() {
            out[[i, j]] = (out[[i, j]] - pred.x_mean[j]) / pred.x_std[j];
        }
    }
    out
}

fn destandardized_row(pred: &LatentPredictor, row: ndarray::ArrayView1<'_, f64>) -> Array1<f64> {
    Array1::from_shape_fn(row.len(), |j| row[j] * pred.y_std[j] + pred.y_mean[j])
}

fn metric_error(
    pred: ndarray::ArrayView1<'_, f64>,
    truth: ndarray::ArrayView1<'_, f64>,
    metric: ErrorMetric,
) -> f64 {
    let (num, den) = match metric {
        ErrorMetric::RelativeL2 => (
            pred.iter()
                .zip(truth.iter())
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt(),
            truth.iter().map(|b| b * b).sum::<f64>().sqrt(),
        ),
        ErrorMetric::LInfty => (
            pred.iter()
                .zip(truth.iter())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max),
            truth.iter().map(|b| b.abs()).fold(0.0, f64::max),
        ),
    };
    if num == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Per-sample relative errors of an MLP on the raw test outputs, plus the
/// mean forward time per sample.
fn eval_mlp(
    model: &MlpModel,
    pred: &LatentPredictor,
    test: &Dataset,
    metric: ErrorMetric,
) -> Result<(Vec<f64>, f64)> {
    let xs = standardized_test_x(pred, test);
    let raw_y = test.raw_y();
    let mut errors = Vec::with_capacity(xs.nrows());
    let mut elapsed = 0.0;
    for i in 0..xs.nrows() {
        let row = xs.row(i).insert_axis(Axis(0));
        let timer = Instant::now();
        let out = mlp_predict(model, row)?;
        elapsed += timer.elapsed().as_secs_f64();
        let y_hat = destandardized_row(pred, out.row(0));
        errors.push(metric_error(y_hat.view(), raw_y.row(i), metric));
    }
    let per_sample = elapsed / xs.nrows() as f64;
    Ok((errors, per_sample))
}

fn mean_var(errors: &[f64]) -> (f64, f64) {
    let n = errors.len() as f64;
    let mean = errors.iter().sum::<f64>() / n;
    let var = errors.iter().map(|e| (e - mean) * (e - mean)).sum::<f64>() / n;
    (mean, var)
}

/// One MLP per decomposed domain; test rows routed by nearest-neighbor
/// classification, aggregated with the weighted error.
fn run_domain_mlps(
    cfg: &RunConfig,
    artifact: &Artifact,
    test: &Dataset,
    rows: &mut Vec<BenchRow>,
    domain_csv: &mut String,
) -> Result<()> {
    let predictor = &artifact.ipca;
    let assignments = predictor.training_domain_assignments()?;
    let domains = predictor.dec.domain_count();
    let lrs = cfg.domain_lrs(domains)?;
    let configs: Vec<_> = lrs
        .iter()
        .enumerate()
        .map(|(d, &lr)| cfg.mlp_config(lr, d as u64 + 1))
        .collect();
    // adjacent segments share one curve point, so a domain owns one row
    // fewer than its point count
    let min_rows = cfg.min_domain_points.saturating_sub(1).max(1);
    let models = train_per_domain(
        artifact.train.x.view(),
        artifact.train.y.view(),
        &assignments,
        &configs,
        min_rows,
    )
    .context("training per-domain MLPs")?;
    for (d, model) in models.iter().enumerate() {
        model.export_training_curve(&cfg.out_dir.join(format!("training_curve_domain_{d}.csv")))?;
    }
    let xs = standardized_test_x(predictor, test);
    let raw_y = test.raw_y();
    let mut per_sample = Vec::with_capacity(xs.nrows());
    let mut sample_domain = Vec::with_capacity(xs.nrows());
    let mut elapsed = 0.0;
    for i in 0..xs.nrows() {
        let domain = predictor.classify_domain(xs.row(i))?;
        let row = xs.row(i).insert_axis(Axis(0));
        let timer = Instant::now();
        let out = mlp_predict(&models[domain], row)?;
        elapsed += timer.elapsed().as_secs_f64();
        let y_hat = destandardized_row(predictor, out.row(0));
        per_sample.push(metric_error(y_hat.view(), raw_y.row(i), cfg.metric));
        sample_domain.push(domain);
    }
    let seconds = elapsed / xs.nrows() as f64;
    let mut per_domain = Vec::new();
    for d in 0..domains {
        let errs: Vec<f64> = per_sample
            .iter()
            .zip(sample_domain.iter())
            .filter(|&(_, &sd)| sd == d)
            .map(|(&e, _)| e)
            .collect();
        if errs.is_empty() {
            continue;
        }
        let (mean, variance) = mean_var(&errs);
        per_domain.push(DomainError {
            domain: d,
            n_test: errs.len(),
            mean_error: mean,
        });
        let _ = writeln!(domain_csv, "mlp-domains,{d},{},{mean}", errs.len());
        rows.push(BenchRow {
            section: "mlp".into(),
            method: format!("mlp-domain-{d}"),
            mean,
            variance,
            seconds,
        });
    }
    let weighted = weighted_error(&per_domain, xs.nrows());
    let (_, variance) = mean_var(&per_sample);
    rows.push(BenchRow {
        section: "mlp".into(),
        method: "mlp-weighted".into(),
        mean: weighted,
        variance,
        seconds,
    });
    Ok(())
}
