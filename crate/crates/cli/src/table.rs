//! Benchmark table emission: CSV plus an aligned plain-text rendering.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::Result;

#[derive(Debug, Clone)]
pub struct BenchRow {
    pub section: String,
    pub method: String,
    pub mean: f64,
    pub variance: f64,
    pub seconds: f64,
}

/// `method,mean,variance,t_s`; the time column is zeroed when timing is off
/// so reruns stay byte-identical.
pub fn write_csv(path: &Path, rows: &[BenchRow], record_timing: bool) -> Result<()> {
    let mut out = String::from("method,mean,variance,t_s\n");
    for row in rows {
        let t = if record_timing { row.seconds } else { 0.0 };
        let _ = writeln!(out, "{},{},{},{}", row.method, row.mean, row.variance, t);
    }
    std::fs::write(path, out)?;
    Ok(())
}

pub fn render_text(rows: &[BenchRow], record_timing: bool) -> String {
    let name_w = rows
        .iter()
        .map(|r| r.method.len())
        .chain(["method".len()])
        .max()
        .unwrap_or(10)
        + 2;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<name_w$} {:>12} {:>12} {:>12}",
        "method", "mean", "variance", "t(s)"
    );
    let mut section = String::new();
    for row in rows {
        if row.section != section {
            section = row.section.clone();
            let _ = writeln!(out, "-- {section} --");
        }
        let t = if record_timing { row.seconds } else { 0.0 };
        let _ = writeln!(
            out,
            "{:<name_w$} {:>12.6} {:>12.6} {:>12.3e}",
            row.method, row.mean, row.variance, t
        );
    }
    out
}
