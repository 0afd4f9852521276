//! Minimal standalone SVG scatter/line plots, no display dependency.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::Result;

pub const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];

pub struct Panel {
    pub title: String,
    x_lo: f64,
    x_hi: f64,
    y_lo: f64,
    y_hi: f64,
    shapes: String,
}

impl Panel {
    pub fn new(title: &str, xs: impl Iterator<Item = f64>, ys: impl Iterator<Item = f64>) -> Panel {
        let (mut x_lo, mut x_hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in xs {
            x_lo = x_lo.min(v);
            x_hi = x_hi.max(v);
        }
        let (mut y_lo, mut y_hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in ys {
            y_lo = y_lo.min(v);
            y_hi = y_hi.max(v);
        }
        for (lo, hi) in [(&mut x_lo, &mut x_hi), (&mut y_lo, &mut y_hi)] {
            if !lo.is_finite() || !hi.is_finite() {
                *lo = 0.0;
                *hi = 1.0;
            }
            if *hi - *lo <= 0.0 {
                *lo -= 0.5;
                *hi += 0.5;
            }
            let pad = 0.04 * (*hi - *lo);
            *lo -= pad;
            *hi += pad;
        }
        Panel {
            title: title.to_string(),
            x_lo,
            x_hi,
            y_lo,
            y_hi,
            shapes: String::new(),
        }
    }

    const W: f64 = 760.0;
    const H: f64 = 420.0;
    const ML: f64 = 70.0;
    const MB: f64 = 45.0;
    const MT: f64 = 30.0;
    const MR: f64 = 20.0;

    fn map(&self, x: f64, y: f64) -> (f64, f64) {
        let px = Self::ML + (x - self.x_lo) / (self.x_hi - self.x_lo) * (Self::W - Self::ML - Self::MR);
        let py = Self::MT + (self.y_hi - y) / (self.y_hi - self.y_lo) * (Self::H - Self::MT - Self::MB);
        (px, py)
    }

    pub fn circle(&mut self, x: f64, y: f64, radius: f64, color: &str) {
        let (px, py) = self.map(x, y);
        let _ = writeln!(
            self.shapes,
            r#"<circle cx="{px:.2}" cy="{py:.2}" r="{radius}" fill="{color}" fill-opacity="0.75"/>"#
        );
    }

    pub fn segment(&mut self, a: [f64; 2], b: [f64; 2], color: &str, width: f64) {
        let (x1, y1) = self.map(a[0], a[1]);
        let (x2, y2) = self.map(b[0], b[1]);
        let _ = writeln!(
            self.shapes,
            r#"<line x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}" stroke="{color}" stroke-width="{width}"/>"#
        );
    }

    pub fn polyline(&mut self, points: &[[f64; 2]], color: &str, width: f64) {
        let coords: Vec<String> = points
            .iter()
            .map(|p| {
                let (x, y) = self.map(p[0], p[1]);
                format!("{x:.2},{y:.2}")
            })
            .collect();
        let _ = writeln!(
            self.shapes,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="{width}"/>"#,
            coords.join(" ")
        );
    }

    fn render(&self, y_offset: f64, out: &mut String) {
        let _ = writeln!(out, r#"<g transform="translate(0,{y_offset})">"#);
        let _ = writeln!(
            out,
            r##"<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="#333" stroke-width="1"/>"##,
            Self::ML,
            Self::MT,
            Self::W - Self::ML - Self::MR,
            Self::H - Self::MT - Self::MB
        );
        let _ = writeln!(
            out,
            r##"<text x="{}" y="18" font-family="sans-serif" font-size="14" fill="#111">{}</text>"##,
            Self::ML,
            self.title
        );
        for (value, frac) in [(self.x_lo, 0.0), (self.x_hi, 1.0)] {
            let px = Self::ML + frac * (Self::W - Self::ML - Self::MR);
            let _ = writeln!(
                out,
                r##"<text x="{px:.1}" y="{}" font-family="sans-serif" font-size="11" fill="#444" text-anchor="middle">{value:.4}</text>"##,
                Self::H - Self::MB + 16.0
            );
        }
        for (value, frac) in [(self.y_lo, 1.0), (self.y_hi, 0.0)] {
            let py = Self::MT + frac * (Self::H - Self::MT - Self::MB);
            let _ = writeln!(
                out,
                r##"<text x="{}" y="{py:.1}" font-family="sans-serif" font-size="11" fill="#444" text-anchor="end">{value:.4}</text>"##,
                Self::ML - 6.0
            );
        }
        out.push_str(&self.shapes);
        let _ = writeln!(out, "</g>");
    }
}

/// Writes one or more stacked panels as a standalone SVG document.
pub fn save_figure(path: &Path, panels: &[Panel]) -> Result<()> {
    let total_h = Panel::H * panels.len() as f64;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}">"#,
        Panel::W,
        total_h,
        Panel::W,
        total_h
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for (i, panel) in panels.iter().enumerate() {
        panel.render(i as f64 * Panel::H, &mut out);
    }
    let _ = writeln!(out, "</svg>");
    std::fs::write(path, out)?;
    Ok(())
}
