use std::path::Path;

use anyhow::{Context, Result};
use log::info;
use smdd_core::dataset::Dataset;

use crate::artifact::Artifact;
use crate::commands::fit::reduced_points_by_row;
use crate::svg::{save_figure, Panel, PALETTE};

pub fn run(artifact_path: &Path, test_path: Option<&Path>, out_dir: &Path) -> Result<()> {
    std::fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    let artifact = Artifact::load(artifact_path)?;
    let pred = &artifact.ipca;

    // triangulated reduced cloud
    let points = reduced_points_by_row(pred);
    let mut panel = Panel::new(
        "Ball-pivot triangulation of the reduced cloud",
        points.iter().map(|p| p[0]),
        points.iter().map(|p| p[1]),
    );
    for &(a, b) in &pred.triangulation {
        panel.segment(points[a], points[b], "#9ecae1", 0.7);
    }
    for p in &points {
        panel.circle(p[0], p[1], 1.6, "#08519c");
    }
    save_figure(&out_dir.join("triangulation.svg"), &[panel])?;

    // connected curve
    let curve = &pred.sm.source;
    let mut panel = Panel::new(
        "Connected curve through the reduced cloud",
        curve.points.iter().map(|p| p[0]),
        curve.points.iter().map(|p| p[1]),
    );
    panel.polyline(&curve.points, "#6baed6", 0.8);
    for p in &curve.points {
        panel.circle(p[0], p[1], 1.4, "#08306b");
    }
    save_figure(&out_dir.join("connected_curve.svg"), &[panel])?;

    // stretched manifold colored by decomposed domain
    let mut panel = Panel::new(
        "Stretched manifold and decomposed domains",
        pred.sm.points.iter().map(|p| p[0]),
        pred.sm.points.iter().map(|p| p[1]),
    );
    for (pos, p) in pred.sm.points.iter().enumerate() {
        let domain = pred.dec.classify_index(pos).unwrap_or(0);
        panel.circle(p[0], p[1], 1.8, PALETTE[domain % PALETTE.len()]);
    }
    save_figure(&out_dir.join("stretched_manifold.svg"), &[panel])?;

    if let Some(test_path) = test_path {
        let test = Dataset::load(test_path)?;
        plot_predictions(pred, &test, &out_dir.join("predictions.svg"))?;
        info!("wrote 4 figures to {}", out_dir.display());
    } else {
        info!(
            "wrote 3 figures to {} (pass --test for the prediction figure)",
            out_dir.display()
        );
    }
    Ok(())
}

fn plot_predictions(
    pred: &smdd_core::predict::LatentPredictor,
    test: &Dataset,
    path: &Path,
) -> Result<()> {
    let raw_x = test.raw_x();
    let raw_y = test.raw_y();
    let mut refs = Vec::new();
    let mut hats = Vec::new();
    let mut errs = Vec::new();
    for i in 0..raw_x.nrows() {
        let mut x_std = ndarray::Array1::zeros(raw_x.ncols());
        for j in 0..raw_x.ncols() {
            x_std[j] = (raw_x[[i, j]] - pred.x_mean[j]) / pred.x_std[j];
        }
        let p = pred.predict_row(x_std.view())?;
        if pred.q == 1 {
            refs.push([p.x_bar, raw_y[[i, 0]]]);
            hats.push([p.x_bar, p.y[0]]);
            errs.push([p.x_bar, (p.y[0] - raw_y[[i, 0]]).abs()]);
        } else {
            let num = p
                .y
                .iter()
                .zip(raw_y.row(i).iter())
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            let den = raw_y.row(i).iter().map(|b| b * b).sum::<f64>().sqrt();
            errs.push([i as f64, if den > 0.0 { num / den } else { num }]);
        }
    }
    let mut panels = Vec::new();
    if pred.q == 1 {
        let mut top = Panel::new(
            "References and predictions over the stretched axis",
            refs.iter().chain(hats.iter()).map(|p| p[0]),
            refs.iter().chain(hats.iter()).map(|p| p[1]),
        );
        for p in &refs {
            top.circle(p[0], p[1], 2.2, "#1f77b4");
        }
        for p in &hats {
            top.circle(p[0], p[1], 1.8, "#ff7f0e");
        }
        panels.push(top);
    }
    let mut bottom = Panel::new(
        "Absolute error",
        errs.iter().map(|p| p[0]),
        errs.iter().map(|p| p[1]),
    );
    for p in &errs {
        bottom.circle(p[0], p[1], 1.8, "#d62728");
    }
    panels.push(bottom);
    save_figure(path, &panels)?;
    Ok(())
}
