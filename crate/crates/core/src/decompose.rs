//! Line-similarity segmentation of the stretched curve.
//!
//! Three points are line-similar when the cross-product magnitude of the two
//! vectors they span from the anchor stays below a threshold derived from the
//! curve itself: `gamma` times the average inverse slope
//! `sum |dx| / sum |dy|` over all consecutive pairs. A scan grows each
//! segment from its anchor until a triple breaks the predicate, restarts at
//! the overlap point, and finally undersized segments are merged into their
//! smaller neighbor.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::manifold::StretchedManifold;

/// Segmentation parameters.
#[derive(Debug, Clone, Copy)]
pub struct DecompositionConfig {
    pub gamma: f64,
    /// Segments below this point count are merged away (benchmark parity
    /// default is 100).
    pub min_points_per_domain: usize,
}

impl Default for DecompositionConfig {
    fn default() -> Self {
        DecompositionConfig {
            gamma: 4.0,
            min_points_per_domain: 100,
        }
    }
}

/// Inclusive index range over the stretched curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Segment {
    pub start: usize,
    pub end: usize,
}

impl Segment {
    pub fn point_count(&self) -> usize {
        self.end - self.start + 1
    }

    pub fn contains(&self, idx: usize) -> bool {
        idx >= self.start && idx <= self.end
    }
}

/// Output of the segmentation.
#[derive(Debug, Clone)]
pub struct SegmentDecomposition {
    /// Final segments after the minimum-size merge pass.
    pub segments: Vec<Segment>,
    /// Segments exactly as the scan produced them, before merging.
    pub raw_segments: Vec<Segment>,
    /// The realized threshold.
    pub epsilon: f64,
    pub gamma: f64,
}

/// `gamma * sum |dx_bar| / sum |dy_bar|` over consecutive stretched points.
pub fn similarity_threshold(sm: &StretchedManifold, gamma: f64) -> Result<f64> {
    if sm.points.len() < 2 {
        return Err(Error::EmptyInput);
    }
    let mut dx = 0.0;
    let mut dy = 0.0;
    for w in sm.points.windows(2) {
        dx += (w[1][0] - w[0][0]).abs();
        dy += (w[1][1] - w[0][1]).abs();
    }
    if dy == 0.0 {
        return Err(Error::FlatCurve);
    }
    Ok(gamma * dx / dy)
}

/// `|(p2 - p1) x (p3 - p1)|`, the 2D wedge magnitude of the triple.
pub fn cross_magnitude(p1: [f64; 2], p2: [f64; 2], p3: [f64; 2]) -> f64 {
    ((p2[0] - p1[0]) * (p3[1] - p1[1]) - (p2[1] - p1[1]) * (p3[0] - p1[0])).abs()
}

/// One scan of the line-similarity predicate from a fixed anchor.
///
/// Returns `(segment, remainder, exhausted)`. On a break past the third
/// point the segment is the prefix up to the breaking point and the
/// remainder restarts at the previous point (one-point overlap). A break at
/// the very first triple returns an empty segment and leaves the input
/// untouched; a completed scan sets `exhausted`.
pub fn lisp(points: &[[f64; 2]], epsilon: f64) -> (&[[f64; 2]], &[[f64; 2]], bool) {
    if points.len() < 3 {
        return (&points[..0], points, true);
    }
    let n = points.len() - 1;
    let p1 = points[0];
    let mut i = 1usize;
    while i < n {
        i += 1;
        let p2 = points[i - 1];
        let p3 = points[i];
        if cross_magnitude(p1, p2, p3) > epsilon {
            if i > 2 {
                return (&points[..i], &points[i - 1..], false);
            }
            return (&points[..0], points, false);
        }
    }
    (&points[..0], points, true)
}

/// Full decomposition: repeated scans, two-point fragments for immediate
/// breaks, then the minimum-size merge pass.
pub fn lissda(sm: &StretchedManifold, cfg: &DecompositionConfig) -> Result<SegmentDecomposition> {
    if !(cfg.gamma > 0.0) {
        return Err(Error::Config(format!("gamma must be positive, got {}", cfg.gamma)));
    }
    if cfg.min_points_per_domain < 2 {
        return Err(Error::Config(
            "min_points_per_domain must be at least 2".into(),
        ));
    }
    let epsilon = similarity_threshold(sm, cfg.gamma)?;
    let mut raw = Vec::new();
    let mut base = 0usize;
    let mut rest: &[[f64; 2]] = &sm.points;
    while !rest.is_empty() {
        let (seg, remainder, exhausted) = lisp(rest, epsilon);
        if exhausted {
            raw.push(Segment {
                start: base,
                end: base + rest.len() - 1,
            });
            break;
        } else if !seg.is_empty() {
            raw.push(Segment {
                start: base,
                end: base + seg.len() - 1,
            });
            base += seg.len() - 1;
            rest = remainder;
        } else {
            // the second point already broke away: keep the pair as a
            // two-point group and restart the scan on it
            raw.push(Segment {
                start: base,
                end: base + 1,
            });
            base += 1;
            rest = &rest[1..];
        }
    }
    let segments = merge_undersized(raw.clone(), cfg.min_points_per_domain);
    Ok(SegmentDecomposition {
        segments,
        raw_segments: raw,
        epsilon,
        gamma: cfg.gamma,
    })
}

/// Folds every segment below the size floor into its smaller neighbor
/// (ties: the earlier one) until all segments qualify or one remains.
fn merge_undersized(mut segs: Vec<Segment>, min_points: usize) -> Vec<Segment> {
    loop {
        if segs.len() <= 1 {
            return segs;
        }
        let Some(i) = segs.iter().position(|s| s.point_count() < min_points) else {
            return segs;
        };
        let j = if i == 0 {
            1
        } else if i == segs.len() - 1 || segs[i - 1].point_count() <= segs[i + 1].point_count() {
            i - 1
        } else {
            i + 1
        };
        let (a, b) = (i.min(j), i.max(j));
        let merged = Segment {
            start: segs[a].start,
            end: segs[b].end,
        };
        segs.splice(a..=b, [merged]);
    }
}

impl SegmentDecomposition {
    /// The segment containing a curve position; shared boundary points map
    /// to the earlier segment.
    pub fn classify_index(&self, index: usize) -> Result<usize> {
        for (id, seg) in self.segments.iter().enumerate() {
            if seg.contains(index) {
                return Ok(id);
            }
        }
        Err(Error::OutOfRange {
            index,
            len: self.segments.last().map(|s| s.end + 1).unwrap_or(0),
        })
    }

    pub fn domain_count(&self) -> usize {
        self.segments.len()
    }

    /// Checks that the segments tile `0..n_points` with exactly one shared
    /// index between neighbors.
    pub fn tiling_is_exact(&self, n_points: usize) -> bool {
        let Some(first) = self.segments.first() else {
            return n_points == 0;
        };
        if first.start != 0 || self.segments.last().unwrap().end != n_points - 1 {
            return false;
        }
        self.segments
            .windows(2)
            .all(|w| w[0].end == w[1].start && w[0].end > w[0].start)
    }

    /// Re-runs the scan predicate over every raw segment: each tested triple
    /// `(anchor, p_{i-1}, p_i)` must sit at or below the threshold.
    pub fn predicate_holds(&self, sm: &StretchedManifold) -> bool {
        for seg in &self.raw_segments {
            let anchor = sm.points[seg.start];
            for i in seg.start + 2..=seg.end {
                if cross_magnitude(anchor, sm.points[i - 1], sm.points[i]) > self.epsilon {
                    return false;
                }
            }
        }
        true
    }

    /// CSV rows `segment_id,start_index,end_index,point_count,x_bar_span`.
    pub fn export_csv(&self, sm: &StretchedManifold, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        writeln!(w, "segment_id,start_index,end_index,point_count,x_bar_span")?;
        for (id, seg) in self.segments.iter().enumerate() {
            let span = sm.points[seg.end][0] - sm.points[seg.start][0];
            writeln!(
                w,
                "{},{},{},{},{}",
                id,
                seg.start,
                seg.end,
                seg.point_count(),
                span
            )?;
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::{stretch, Curve1M};
    use approx::assert_relative_eq;

    fn manifold_from_points(points: Vec<[f64; 2]>) -> StretchedManifold {
        let curve = Curve1M {
            order: (0..points.len()).collect(),
            points,
            jump_count: 0,
        };
        stretch(&curve)
    }

    #[test]
    fn staircase_threshold() {
        let pts: Vec<[f64; 2]> = (0..10).map(|i| [i as f64, i as f64]).collect();
        let sm = manifold_from_points(pts);
        assert_relative_eq!(similarity_threshold(&sm, 2.0).unwrap(), 2.0);
        // linear in gamma
        assert_relative_eq!(
            similarity_threshold(&sm, 4.0).unwrap(),
            2.0 * similarity_threshold(&sm, 2.0).unwrap()
        );
    }

    #[test]
    fn threshold_matches_direct_summation() {
        let pts: Vec<[f64; 2]> = (0..50)
            .map(|i| {
                let t = i as f64 * 0.13;
                [t + (t * 3.0).sin().abs() * 0.01, (t * 0.7).cos()]
            })
            .collect();
        let sm = manifold_from_points(pts.clone());
        let mut dx = 0.0;
        let mut dy = 0.0;
        for w in sm.points.windows(2) {
            dx += (w[1][0] - w[0][0]).abs();
            dy += (w[1][1] - w[0][1]).abs();
        }
        assert_relative_eq!(
            similarity_threshold(&sm, 4.0).unwrap(),
            4.0 * dx / dy,
            max_relative = 1e-15
        );
    }

    #[test]
    fn flat_curve_is_rejected() {
        let pts: Vec<[f64; 2]> = (0..5).map(|i| [i as f64, 1.0]).collect();
        let sm = manifold_from_points(pts);
        assert!(matches!(
            similarity_threshold(&sm, 1.0),
            Err(Error::FlatCurve)
        ));
    }

    #[test]
    fn collinear_scan_exhausts() {
        let pts: Vec<[f64; 2]> = (0..6).map(|i| [i as f64, 2.0 * i as f64]).collect();
        let (seg, rest, exhausted) = lisp(&pts, 1e-9);
        assert!(exhausted);
        assert!(seg.is_empty());
        assert_eq!(rest.len(), 6);
    }

    #[test]
    fn right_angle_breaks_at_first_triple() {
        let pts = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0]];
        assert_relative_eq!(cross_magnitude(pts[0], pts[1], pts[2]), 1.0);
        let (seg, rest, exhausted) = lisp(&pts, 0.5);
        assert!(!exhausted);
        assert!(seg.is_empty());
        assert_eq!(rest.len(), 3);
    }

    #[test]
    fn two_point_input_exhausts() {
        let pts = [[0.0, 0.0], [1.0, 1.0]];
        let (_, _, exhausted) = lisp(&pts, 0.1);
        assert!(exhausted);
    }

    #[test]
    fn break_past_third_point_overlaps_one_point() {
        // straight along y = 0 for four points, then a spike
        let pts = [
            [0.0, 0.0],
            [1.0, 0.0],
            [2.0, 0.0],
            [3.0, 0.0],
            [4.0, 5.0],
        ];
        let (seg, rest, exhausted) = lisp(&pts, 0.5);
        assert!(!exhausted);
        assert_eq!(seg.len(), 4);
        assert_eq!(rest.len(), 2);
        assert_eq!(seg[3], rest[0]); // shared overlap point
    }

    #[test]
    fn straight_line_is_one_segment() {
        let pts: Vec<[f64; 2]> = (0..40).map(|i| [i as f64, 0.5 * i as f64]).collect();
        let sm = manifold_from_points(pts);
        let dec = lissda(
            &sm,
            &DecompositionConfig {
                gamma: 1.0,
                min_points_per_domain: 2,
            },
        )
        .unwrap();
        assert_eq!(dec.domain_count(), 1);
        assert!(dec.tiling_is_exact(sm.points.len()));
    }

    fn zigzag_manifold(n: usize) -> StretchedManifold {
        // piecewise pattern with sharp slope changes, forcing several segments
        let pts: Vec<[f64; 2]> = (0..n)
            .map(|i| {
                let t = i as f64;
                let y = match (i / 10) % 3 {
                    0 => t * 0.05,
                    1 => t * 0.05 + (i % 10) as f64 * 0.9,
                    _ => t * 0.05 - (i % 10) as f64 * 0.4,
                };
                [t, y]
            })
            .collect();
        manifold_from_points(pts)
    }

    #[test]
    fn structural_invariants_and_determinism() {
        let sm = zigzag_manifold(90);
        let cfg = DecompositionConfig {
            gamma: 1.0,
            min_points_per_domain: 2,
        };
        let dec = lissda(&sm, &cfg).unwrap();
        assert!(dec.domain_count() > 1);
        assert!(dec.tiling_is_exact(sm.points.len()));
        assert!(dec.predicate_holds(&sm));
        let again = lissda(&sm, &cfg).unwrap();
        assert_eq!(dec.segments, again.segments);
        assert_eq!(dec.raw_segments, again.raw_segments);
        assert_eq!(dec.epsilon.to_bits(), again.epsilon.to_bits());
    }

    #[test]
    fn undersized_segments_merge_into_smaller_neighbor() {
        let sm = zigzag_manifold(90);
        let loose = lissda(
            &sm,
            &DecompositionConfig {
                gamma: 1.0,
                min_points_per_domain: 2,
            },
        )
        .unwrap();
        let merged = lissda(
            &sm,
            &DecompositionConfig {
                gamma: 1.0,
                min_points_per_domain: 25,
            },
        )
        .unwrap();
        assert!(merged.domain_count() <= loose.domain_count());
        assert!(merged.segments.iter().all(|s| s.point_count() >= 25) || merged.domain_count() == 1);
        assert!(merged.tiling_is_exact(sm.points.len()));
        // raw output unaffected by the merge floor
        assert_eq!(merged.raw_segments, loose.raw_segments);
    }

    #[test]
    fn classify_index_rules() {
        let sm = zigzag_manifold(60);
        let dec = lissda(
            &sm,
            &DecompositionConfig {
                gamma: 1.0,
                min_points_per_domain: 2,
            },
        )
        .unwrap();
        assert_eq!(dec.classify_index(0).unwrap(), 0);
        let boundary = dec.segments[0].end;
        assert_eq!(dec.classify_index(boundary).unwrap(), 0); // earlier segment wins
        assert_eq!(
            dec.classify_index(sm.points.len() - 1).unwrap(),
            dec.domain_count() - 1
        );
        assert!(dec.classify_index(sm.points.len()).is_err());
    }
}
