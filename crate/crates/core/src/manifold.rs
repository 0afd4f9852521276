//! From a reduced 2D point cloud to a stretched, function-like curve.
//!
//! The cloud is triangulated edge-wise by 2D ball pivoting, walked into an
//! ordered open curve starting from the lowest point, and then unfolded:
//! every index where the x-increment changes sign is a turning point, and the
//! curve beyond it is reflected about the turning point's current x-image.
//! Composing those reflections makes the x-coordinate monotone, so the curve
//! becomes the graph of a function. The interval between consecutive
//! (images of) turning points is a branched parametric domain carrying its
//! own composed affine map.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Ordered open curve through all cloud points.
#[derive(Debug, Clone)]
pub struct Curve1M {
    /// Points in walk order.
    pub points: Vec<[f64; 2]>,
    /// Permutation: `order[i]` is the original index of the i-th curve point.
    pub order: Vec<usize>,
    /// Times the walk had to jump to a non-adjacent point.
    pub jump_count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TurningPoint {
    /// Position on the curve (not the original cloud index).
    pub index: usize,
    pub coords: [f64; 2],
}

/// Composed affine map `x_bar = sign * x + offset` with `sign` in `{-1, +1}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MirrorMap {
    pub sign: f64,
    pub offset: f64,
}

impl MirrorMap {
    pub const IDENTITY: MirrorMap = MirrorMap {
        sign: 1.0,
        offset: 0.0,
    };

    /// Reflection about a fixed center: `x -> 2 c - x`.
    pub fn reflection(center: f64) -> MirrorMap {
        MirrorMap {
            sign: -1.0,
            offset: 2.0 * center,
        }
    }

    pub fn apply(&self, x: f64) -> f64 {
        self.sign * x + self.offset
    }

    pub fn invert(&self, x_bar: f64) -> f64 {
        self.sign * (x_bar - self.offset)
    }

    /// Composes a reflection about `center` (given in image coordinates)
    /// after this map.
    pub fn then_reflect(&self, center: f64) -> MirrorMap {
        MirrorMap {
            sign: -self.sign,
            offset: 2.0 * center - self.offset,
        }
    }
}

/// One tile of the stretched parameter axis.
#[derive(Debug, Clone, Copy)]
pub struct BranchedDomain {
    pub id: usize,
    pub x_lo: f64,
    pub x_hi: f64,
    pub mirror: MirrorMap,
    /// Inclusive curve-position range; neighbors share one endpoint.
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone)]
pub struct StretchedManifold {
    /// `(x_bar, y_bar)` in curve order; `x_bar` non-decreasing, `y_bar`
    /// equal to the source curve's y elementwise.
    pub points: Vec<[f64; 2]>,
    pub branches: Vec<BranchedDomain>,
    pub turning_points: Vec<TurningPoint>,
    /// Reflection centers in stretched coordinates, one per turning point.
    pub reflection_centers: Vec<f64>,
    pub source: Curve1M,
}

/// Scales both axes to `[0, 1]`; returns the scaled copy with the per-axis
/// minima and spans (a constant axis keeps span 1).
pub fn normalize_unit(points: &[[f64; 2]]) -> (Vec<[f64; 2]>, [f64; 2], [f64; 2]) {
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for p in points {
        for a in 0..2 {
            lo[a] = lo[a].min(p[a]);
            hi[a] = hi[a].max(p[a]);
        }
    }
    let mut span = [hi[0] - lo[0], hi[1] - lo[1]];
    for s in span.iter_mut() {
        if !(*s > 0.0) {
            *s = 1.0;
        }
    }
    let scaled = points
        .iter()
        .map(|p| [(p[0] - lo[0]) / span[0], (p[1] - lo[1]) / span[1]])
        .collect();
    (scaled, lo, span)
}

/// Median distance to the nearest other point.
pub fn median_nn_distance(points: &[[f64; 2]]) -> f64 {
    let n = points.len();
    if n < 2 {
        return 0.0;
    }
    let mut nn = Vec::with_capacity(n);
    for i in 0..n {
        let mut best = f64::INFINITY;
        for j in 0..n {
            if i != j {
                best = best.min(dist2(points[i], points[j]));
            }
        }
        nn.push(best.sqrt());
    }
    nn.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    nn[n / 2]
}

fn dist2(a: [f64; 2], b: [f64; 2]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    dx * dx + dy * dy
}

/// 2D ball pivoting: an undirected edge `(a, b)` is emitted when a circle of
/// the given radius passes through both points with no other point strictly
/// inside. Expects points already normalized per-axis (one radius must suit
/// both directions).
///
/// Fails with `DisconnectedCloud` when more than one connected component of
/// the edge graph covers over 1% of the points.
pub fn ball_pivot(points: &[[f64; 2]], radius: f64) -> Result<Vec<(usize, usize)>> {
    if points.is_empty() {
        return Err(Error::EmptyInput);
    }
    if !(radius > 0.0) {
        return Err(Error::Config(format!("pivot radius must be positive, got {radius}")));
    }
    let n = points.len();
    let cell = 2.0 * radius;
    let key = |p: [f64; 2]| -> (i64, i64) { ((p[0] / cell).floor() as i64, (p[1] / cell).floor() as i64) };
    let mut grid: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    for (i, &p) in points.iter().enumerate() {
        grid.entry(key(p)).or_default().push(i);
    }
    let neighbors = |p: [f64; 2]| -> Vec<usize> {
        let (cx, cy) = key(p);
        let mut out = Vec::new();
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(v) = grid.get(&(cx + dx, cy + dy)) {
                    out.extend_from_slice(v);
                }
            }
        }
        out
    };
    let r2 = radius * radius;
    // strict interior, shaved by a relative tolerance so on-circle points
    // do not block an edge
    let inside2 = r2 * (1.0 - 1e-12);
    let mut edges = Vec::new();
    for a in 0..n {
        for &b in &neighbors(points[a]) {
            if b <= a {
                continue;
            }
            let d2 = dist2(points[a], points[b]);
            if d2 > 4.0 * r2 || d2 == 0.0 {
                continue;
            }
            let mid = [
                0.5 * (points[a][0] + points[b][0]),
                0.5 * (points[a][1] + points[b][1]),
            ];
            let d = d2.sqrt();
            let normal = [
                -(points[b][1] - points[a][1]) / d,
                (points[b][0] - points[a][0]) / d,
            ];
            let off = (r2 - 0.25 * d2).max(0.0).sqrt();
            'sides: for side in [1.0, -1.0] {
                let c = [mid[0] + side * off * normal[0], mid[1] + side * off * normal[1]];
                for &q in &neighbors(c) {
                    if q != a && q != b && dist2(points[q], c) < inside2 {
                        continue 'sides;
                    }
                }
                edges.push((a, b));
                break;
            }
        }
    }
    check_components(&edges, n)?;
    Ok(edges)
}

fn check_components(edges: &[(usize, usize)], n: usize) -> Result<()> {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut a: usize) -> usize {
        while parent[a] != a {
            parent[a] = parent[parent[a]];
            a = parent[a];
        }
        a
    }
    for &(a, b) in edges {
        let ra = find(&mut parent, a);
        let rb = find(&mut parent, b);
        if ra != rb {
            parent[ra] = rb;
        }
    }
    let mut sizes: HashMap<usize, usize> = HashMap::new();
    for i in 0..n {
        *sizes.entry(find(&mut parent, i)).or_insert(0) += 1;
    }
    let mut large: Vec<usize> = sizes
        .values()
        .copied()
        .filter(|&s| s as f64 > 0.01 * n as f64)
        .collect();
    large.sort_unstable_by(|a, b| b.cmp(a));
    if large.len() > 1 {
        return Err(Error::DisconnectedCloud(large));
    }
    Ok(())
}

/// Walks the edge graph into an ordered open curve.
///
/// Starts at the point with minimal y; repeatedly moves to the unvisited
/// neighbor over the shortest edge (ties: lower y, then lower x, then lower
/// index). When stuck with unvisited points remaining it jumps to the nearest
/// unvisited point and counts the discontinuity.
pub fn extract_connected_curve(edges: &[(usize, usize)], points: &[[f64; 2]]) -> Result<Curve1M> {
    let n = points.len();
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for &(a, b) in edges {
        let d = dist2(points[a], points[b]).sqrt();
        adj[a].push((b, d));
        adj[b].push((a, d));
    }
    let start = (0..n)
        .min_by(|&i, &j| {
            (points[i][1], points[i][0], i)
                .partial_cmp(&(points[j][1], points[j][0], j))
                .unwrap()
        })
        .unwrap();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut jumps = 0usize;
    let mut cur = start;
    visited[cur] = true;
    order.push(cur);
    while order.len() < n {
        let next = adj[cur]
            .iter()
            .filter(|&&(b, _)| !visited[b])
            .min_by(|&&(b1, d1), &&(b2, d2)| {
                (d1, points[b1][1], points[b1][0], b1)
                    .partial_cmp(&(d2, points[b2][1], points[b2][0], b2))
                    .unwrap()
            })
            .map(|&(b, _)| b);
        let next = match next {
            Some(b) => b,
            None => {
                jumps += 1;
                (0..n)
                    .filter(|&i| !visited[i])
                    .min_by(|&i, &j| {
                        (dist2(points[cur], points[i]), points[i][1], points[i][0], i)
                            .partial_cmp(&(
                                dist2(points[cur], points[j]),
                                points[j][1],
                                points[j][0],
                                j,
                            ))
                            .unwrap()
                    })
                    .unwrap()
            }
        };
        visited[next] = true;
        order.push(next);
        cur = next;
    }
    Ok(Curve1M {
        points: order.iter().map(|&i| points[i]).collect(),
        order,
        jump_count: jumps,
    })
}

/// All strict sign alternations of the consecutive x-increments. Zero
/// increments are skipped: a plateau is not a sign change, and the turning
/// point lands on the last point before the direction actually reverses.
pub fn find_turning_points(curve: &Curve1M) -> Vec<TurningPoint> {
    let mut out = Vec::new();
    let mut last = 0.0f64;
    for j in 1..curve.points.len() {
        let d = curve.points[j][0] - curve.points[j - 1][0];
        if d == 0.0 {
            continue;
        }
        if last != 0.0 && d * last < 0.0 {
            out.push(TurningPoint {
                index: j - 1,
                coords: curve.points[j - 1],
            });
        }
        last = d;
    }
    out
}

/// Unfolds the curve into a non-decreasing-x point sequence by composing a
/// reflection at every turning point; records the branched domains.
pub fn stretch(curve: &Curve1M) -> StretchedManifold {
    let turning_points = find_turning_points(curve);
    let n = curve.points.len();
    // orient the first branch to increase in x
    let mut map = MirrorMap::IDENTITY;
    for w in curve.points.windows(2) {
        let d = w[1][0] - w[0][0];
        if d != 0.0 {
            if d < 0.0 {
                map = MirrorMap::reflection(curve.points[0][0]);
            }
            break;
        }
    }
    let mut points = Vec::with_capacity(n);
    let mut branches = Vec::new();
    let mut centers = Vec::with_capacity(turning_points.len());
    let mut branch_start = 0usize;
    let mut next_tp = 0usize;
    for j in 0..n {
        if next_tp < turning_points.len() && j > turning_points[next_tp].index {
            let tp_index = turning_points[next_tp].index;
            let center = map.apply(curve.points[tp_index][0]);
            centers.push(center);
            branches.push(BranchedDomain {
                id: branches.len(),
                x_lo: 0.0,
                x_hi: 0.0,
                mirror: map,
                start: branch_start,
                end: tp_index,
            });
            map = map.then_reflect(center);
            branch_start = tp_index;
            next_tp += 1;
        }
        points.push([map.apply(curve.points[j][0]), curve.points[j][1]]);
    }
    branches.push(BranchedDomain {
        id: branches.len(),
        x_lo: 0.0,
        x_hi: 0.0,
        mirror: map,
        start: branch_start,
        end: n.saturating_sub(1),
    });
    for b in branches.iter_mut() {
        b.x_lo = points[b.start][0];
        b.x_hi = points[b.end][0];
    }
    StretchedManifold {
        points,
        branches,
        turning_points,
        reflection_centers: centers,
        source: curve.clone(),
    }
}

impl StretchedManifold {
    /// The branch whose interval contains `x_bar`; boundary values resolve to
    /// the lower id, values outside the covered range clamp to the first or
    /// last branch with the flag set.
    pub fn branch_of(&self, x_bar: f64) -> (&BranchedDomain, bool) {
        let first = &self.branches[0];
        if x_bar < first.x_lo {
            return (first, true);
        }
        for b in &self.branches {
            if x_bar <= b.x_hi {
                return (b, false);
            }
        }
        (self.branches.last().unwrap(), true)
    }

    /// The branch owning a curve position; shared boundary positions resolve
    /// to the lower id.
    pub fn branch_of_position(&self, pos: usize) -> &BranchedDomain {
        self.branches
            .iter()
            .find(|b| pos >= b.start && pos <= b.end)
            .unwrap_or_else(|| self.branches.last().unwrap())
    }

    /// Inverts the per-branch maps; reproduces the source curve coordinates.
    pub fn unstretch(&self) -> Vec<[f64; 2]> {
        (0..self.points.len())
            .map(|pos| {
                let b = self.branch_of_position(pos);
                [b.mirror.invert(self.points[pos][0]), self.points[pos][1]]
            })
            .collect()
    }

    /// CSV rows `x_tilde,y_tilde,x_bar,y_bar,branch_id` in curve order.
    pub fn export_csv(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        writeln!(w, "x_tilde,y_tilde,x_bar,y_bar,branch_id")?;
        for (pos, (src, img)) in self
            .source
            .points
            .iter()
            .zip(self.points.iter())
            .enumerate()
        {
            let branch = self.branch_of_position(pos).id;
            writeln!(w, "{},{},{},{},{}", src[0], src[1], img[0], img[1], branch)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Debug dump of the triangulation edges.
pub fn export_edges_csv(edges: &[(usize, usize)], points: &[[f64; 2]], path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "a,b,ax,ay,bx,by")?;
    for &(a, b) in edges {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            a, b, points[a][0], points[a][1], points[b][0], points[b][1]
        )?;
    }
    w.flush()?;
    Ok(())
}
