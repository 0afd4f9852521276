//! Latent-space learning and prediction over the stretched manifold.
//!
//! Fitting reduces the standardized parameters (and, for vector outputs, the
//! outputs) to one dimension, walks the reduced cloud into a curve, stretches
//! it, decomposes it into line-similar domains and builds one piecewise
//! linear interpolant per branch. Prediction classifies a query to a branch
//! through its nearest training point, maps the reduced coordinate with that
//! branch's mirror, interpolates, and projects back to the original output
//! space.

use std::io::Write;
use std::time::Instant;

use ndarray::{Array1, Array2, ArrayView1, Axis};

use crate::dataset::Dataset;
use crate::decompose::{lissda, DecompositionConfig, SegmentDecomposition};
use crate::error::{Error, Result};
use crate::io;
use crate::ipca::{fit_ipca, IpcaConfig, Projector};
use crate::manifold::{
    ball_pivot, extract_connected_curve, median_nn_distance, normalize_unit, stretch,
    BranchedDomain, Curve1M, MirrorMap, StretchedManifold, TurningPoint,
};

const PREDICTOR_MAGIC: &str = "SMDD-PREDICTOR v1";

/// How reduced outputs are projected back to the original output space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InverseMode {
    /// Scalar outputs pass through unchanged (valid only for q = 1).
    None,
    /// Orthogonal back-projection through the chain.
    PseudoInverse,
    /// Complement estimation from the k nearest training points.
    Complement(usize),
}

/// Which reduction the x (and y) side uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReductionKind {
    Iterative,
    SingleStepPca,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorMetric {
    RelativeL2,
    LInfty,
}

/// Everything `fit_predictor` needs beyond the training data.
#[derive(Debug, Clone)]
pub struct FitOptions {
    pub ipca_x: IpcaConfig,
    pub ipca_y: IpcaConfig,
    pub reduction: ReductionKind,
    /// Pivot radius as a multiple of the median nearest-neighbor distance
    /// in the normalized reduced plane.
    pub radius_multiplier: f64,
    /// Absolute radius override (normalized coordinates).
    pub radius_override: Option<f64>,
    pub decomposition: DecompositionConfig,
    pub inverse_mode: InverseMode,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            ipca_x: IpcaConfig::new(1, 0.9, 1),
            ipca_y: IpcaConfig::new(1, 0.9, 1),
            reduction: ReductionKind::Iterative,
            radius_multiplier: 3.0,
            radius_override: None,
            decomposition: DecompositionConfig::default(),
            inverse_mode: InverseMode::None,
        }
    }
}

/// Piecewise-linear knots of one branch; duplicate abscissae are averaged.
#[derive(Debug, Clone)]
pub struct BranchInterpolant {
    pub knots_x: Vec<f64>,
    pub knots_y: Vec<f64>,
    /// How many curve points were folded into each knot.
    pub multiplicity: Vec<usize>,
}

impl BranchInterpolant {
    fn from_points(points: &[[f64; 2]]) -> BranchInterpolant {
        let mut sorted: Vec<[f64; 2]> = points.to_vec();
        sorted.sort_by(|a, b| a[0].partial_cmp(&b[0]).unwrap());
        let mut knots_x = Vec::new();
        let mut knots_y = Vec::new();
        let mut multiplicity = Vec::new();
        let mut i = 0;
        while i < sorted.len() {
            let x = sorted[i][0];
            let mut sum = 0.0;
            let mut count = 0usize;
            while i < sorted.len() && sorted[i][0] == x {
                sum += sorted[i][1];
                count += 1;
                i += 1;
            }
            knots_x.push(x);
            knots_y.push(sum / count as f64);
            multiplicity.push(count);
        }
        BranchInterpolant {
            knots_x,
            knots_y,
            multiplicity,
        }
    }

    /// Linear interpolation, exact on knots, held constant beyond the ends.
    pub fn eval(&self, x: f64) -> f64 {
        let xs = &self.knots_x;
        let ys = &self.knots_y;
        if x <= xs[0] {
            return ys[0];
        }
        if x >= xs[xs.len() - 1] {
            return ys[ys.len() - 1];
        }
        let hi = xs.partition_point(|&k| k < x);
        if xs[hi] == x {
            return ys[hi];
        }
        let lo = hi - 1;
        let t = (x - xs[lo]) / (xs[hi] - xs[lo]);
        ys[lo] + t * (ys[hi] - ys[lo])
    }
}

/// The fitted latent pipeline.
#[derive(Debug, Clone)]
pub struct LatentPredictor {
    pub proj_x: Projector,
    /// Zero-step identity when q = 1.
    pub proj_y: Projector,
    pub sm: StretchedManifold,
    pub dec: SegmentDecomposition,
    pub interpolants: Vec<BranchInterpolant>,
    /// Standardized training parameters, for nearest-neighbor classification.
    pub train_x: Array2<f64>,
    pub x_mean: Array1<f64>,
    pub x_std: Array1<f64>,
    pub y_mean: Array1<f64>,
    pub y_std: Array1<f64>,
    pub inverse_mode: InverseMode,
    /// Curve position of every training row.
    pub curve_position: Vec<usize>,
    /// Triangulation edges over the reduced cloud (original row indices).
    pub triangulation: Vec<(usize, usize)>,
    /// Pivot radius actually used, in normalized coordinates.
    pub radius_used: f64,
    pub q: usize,
}

/// One routed prediction.
#[derive(Debug, Clone)]
pub struct Prediction {
    /// Destandardized output row.
    pub y: Array1<f64>,
    /// Stretched coordinate the interpolant was evaluated at.
    pub x_bar: f64,
    pub branch_id: usize,
    pub domain_id: usize,
    pub nearest_row: usize,
    /// The stretched coordinate fell outside its branch and was clamped.
    pub clamped: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DomainError {
    pub domain: usize,
    pub n_test: usize,
    pub mean_error: f64,
}

#[derive(Debug, Clone)]
pub struct ErrorReport {
    pub mean_relative_error: f64,
    pub variance: f64,
    pub per_domain: Vec<DomainError>,
    /// Test-count-weighted mean of the per-domain errors.
    pub weighted_error: f64,
    pub inference_time_seconds: f64,
    pub clamped_count: usize,
    pub per_sample: Vec<f64>,
}

/// `sum N_i R_i / n` over the per-domain entries.
pub fn weighted_error(per_domain: &[DomainError], n_test: usize) -> f64 {
    per_domain
        .iter()
        .map(|d| d.n_test as f64 * d.mean_error)
        .sum::<f64>()
        / n_test as f64
}

/// Runs the full fit: reduction on both sides, curve, stretch, decomposition
/// and per-branch interpolants.
pub fn fit_predictor(train: &Dataset, opts: &FitOptions) -> Result<LatentPredictor> {
    if !train.standardized {
        return Err(Error::NotStandardized);
    }
    let q = train.q();
    if q == 0 {
        return Err(Error::EmptyInput);
    }
    if let InverseMode::None = opts.inverse_mode {
        if q != 1 {
            return Err(Error::Config(
                "inverse mode `none` is only valid for scalar outputs".into(),
            ));
        }
    }
    if let InverseMode::Complement(k) = opts.inverse_mode {
        if k < 1 {
            return Err(Error::Config("complement k_nn must be at least 1".into()));
        }
    }
    if opts.ipca_x.target_dim != 1 {
        return Err(Error::Config(format!(
            "the manifold pipeline needs a scalar reduced parameter; x target dimension {} is degenerate",
            opts.ipca_x.target_dim
        )));
    }
    let proj_x = match opts.reduction {
        ReductionKind::Iterative => fit_ipca(train.x.view(), &opts.ipca_x)?,
        ReductionKind::SingleStepPca => Projector::fit_pca(train.x.view(), 1)?,
    };
    let proj_y = if q == 1 {
        Projector {
            steps: Vec::new(),
            input_dim: 1,
            output_dim: 1,
            degenerate_rank: false,
            config: IpcaConfig::new(1, 1.0, 1),
        }
    } else {
        if opts.ipca_y.target_dim != 1 {
            return Err(Error::Config(format!(
                "the manifold pipeline needs a scalar reduced output; y target dimension {} is degenerate",
                opts.ipca_y.target_dim
            )));
        }
        match opts.reduction {
            ReductionKind::Iterative => fit_ipca(train.y.view(), &opts.ipca_y)?,
            ReductionKind::SingleStepPca => Projector::fit_pca(train.y.view(), 1)?,
        }
    };
    let x_red = proj_x.project(train.x.view())?;
    let y_red = proj_y.project(train.y.view())?;
    let points: Vec<[f64; 2]> = x_red
        .column(0)
        .iter()
        .zip(y_red.column(0).iter())
        .map(|(&a, &b)| [a, b])
        .collect();
    let (normalized, _, _) = normalize_unit(&points);
    let radius = match opts.radius_override {
        Some(r) => r,
        None => opts.radius_multiplier * median_nn_distance(&normalized),
    };
    let edges = ball_pivot(&normalized, radius)?;
    let walk = extract_connected_curve(&edges, &normalized)?;
    let curve = Curve1M {
        points: walk.order.iter().map(|&i| points[i]).collect(),
        order: walk.order,
        jump_count: walk.jump_count,
    };
    let mut curve_position = vec![0usize; curve.order.len()];
    for (pos, &row) in curve.order.iter().enumerate() {
        curve_position[row] = pos;
    }
    let sm = stretch(&curve);
    let dec = lissda(&sm, &opts.decomposition)?;
    let interpolants = sm
        .branches
        .iter()
        .map(|b| BranchInterpolant::from_points(&sm.points[b.start..=b.end]))
        .collect();
    Ok(LatentPredictor {
        proj_x,
        proj_y,
        sm,
        dec,
        interpolants,
        train_x: train.x.clone(),
        x_mean: train.x_mean.clone(),
        x_std: train.x_std.clone(),
        y_mean: train.y_mean.clone(),
        y_std: train.y_std.clone(),
        inverse_mode: opts.inverse_mode,
        curve_position,
        triangulation: edges,
        radius_used: radius,
        q,
    })
}

impl LatentPredictor {
    /// Nearest training row by Euclidean distance in the original
    /// standardized parameter space; exact ties resolve to the point that
    /// appears earlier on the curve.
    pub fn nearest_training_row(&self, x: ArrayView1<'_, f64>) -> Result<usize> {
        if self.train_x.nrows() == 0 {
            return Err(Error::EmptyTraining);
        }
        if x.len() != self.train_x.ncols() {
            return Err(Error::DimMismatch {
                expected: self.train_x.ncols(),
                actual: x.len(),
            });
        }
        let mut best_row = 0usize;
        let mut best = (f64::INFINITY, usize::MAX);
        for (row, train_row) in self.train_x.rows().into_iter().enumerate() {
            let d2: f64 = train_row
                .iter()
                .zip(x.iter())
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            let key = (d2, self.curve_position[row]);
            if key < best {
                best = key;
                best_row = row;
            }
        }
        Ok(best_row)
    }

    /// The branched domain a standardized query belongs to.
    pub fn classify_bpd(&self, x: ArrayView1<'_, f64>) -> Result<&BranchedDomain> {
        let row = self.nearest_training_row(x)?;
        Ok(self.sm.branch_of_position(self.curve_position[row]))
    }

    /// The decomposed-domain id of a standardized query.
    pub fn classify_domain(&self, x: ArrayView1<'_, f64>) -> Result<usize> {
        let row = self.nearest_training_row(x)?;
        self.dec.classify_index(self.curve_position[row])
    }

    /// Decomposed-domain id of every training row.
    pub fn training_domain_assignments(&self) -> Result<Vec<usize>> {
        (0..self.train_x.nrows())
            .map(|row| self.dec.classify_index(self.curve_position[row]))
            .collect()
    }

    /// Training rows whose stretched coordinate forms a knot of its own
    /// (not folded with another point by duplicate averaging).
    pub fn deduplicated_training_rows(&self) -> Vec<usize> {
        let mut out = Vec::new();
        for row in 0..self.train_x.nrows() {
            let pos = self.curve_position[row];
            let branch = self.sm.branch_of_position(pos);
            let interp = &self.interpolants[branch.id];
            let x = self.sm.points[pos][0];
            let idx = interp.knots_x.partition_point(|&k| k < x);
            if idx < interp.knots_x.len()
                && interp.knots_x[idx] == x
                && interp.multiplicity[idx] == 1
            {
                out.push(row);
            }
        }
        out
    }

    pub fn predict_row(&self, x: ArrayView1<'_, f64>) -> Result<Prediction> {
        self.predict_row_with_mode(x, self.inverse_mode)
    }

    /// Full pipeline on one standardized parameter row, with an explicit
    /// inverse strategy.
    pub fn predict_row_with_mode(
        &self,
        x: ArrayView1<'_, f64>,
        mode: InverseMode,
    ) -> Result<Prediction> {
        if let InverseMode::None = mode {
            if self.q != 1 {
                return Err(Error::Config(
                    "inverse mode `none` is only valid for scalar outputs".into(),
                ));
            }
        }
        let nearest = self.nearest_training_row(x)?;
        let pos = self.curve_position[nearest];
        let branch = self.sm.branch_of_position(pos);
        let domain_id = self.dec.classify_index(pos)?;
        let x_mat = x.insert_axis(Axis(0));
        let reduced = self.proj_x.project(x_mat)?;
        let x_bar_raw = branch.mirror.apply(reduced[[0, 0]]);
        let x_bar = x_bar_raw.clamp(branch.x_lo, branch.x_hi);
        let clamped = x_bar != x_bar_raw;
        let y_bar = self.interpolants[branch.id].eval(x_bar);
        let y_red = Array2::from_elem((1, 1), y_bar);
        let y_std_row = match mode {
            InverseMode::None => y_red,
            InverseMode::PseudoInverse => self.proj_y.pinv_reconstruct(y_red.view())?,
            InverseMode::Complement(k) => self.proj_y.complement_reconstruct(y_red.view(), k)?,
        };
        let mut y = Array1::zeros(self.q);
        for j in 0..self.q {
            y[j] = y_std_row[[0, j]] * self.y_std[j] + self.y_mean[j];
        }
        Ok(Prediction {
            y,
            x_bar,
            branch_id: branch.id,
            domain_id,
            nearest_row: nearest,
            clamped,
        })
    }

    pub fn evaluate(&self, test: &Dataset, metric: ErrorMetric) -> Result<ErrorReport> {
        self.evaluate_with_mode(test, metric, self.inverse_mode)
    }

    /// Per-sample relative errors against the raw test outputs, aggregated
    /// per decomposed domain; test parameters are standardized with the
    /// training statistics, never refit.
    pub fn evaluate_with_mode(
        &self,
        test: &Dataset,
        metric: ErrorMetric,
        mode: InverseMode,
    ) -> Result<ErrorReport> {
        let raw_x = test.raw_x();
        let raw_y = test.raw_y();
        if raw_x.ncols() != self.train_x.ncols() {
            return Err(Error::DimMismatch {
                expected: self.train_x.ncols(),
                actual: raw_x.ncols(),
            });
        }
        let n = raw_x.nrows();
        let mut per_sample = Vec::with_capacity(n);
        let mut domain_ids = Vec::with_capacity(n);
        let mut clamped_count = 0usize;
        let mut elapsed = 0.0f64;
        for i in 0..n {
            let mut x_std = Array1::zeros(raw_x.ncols());
            for j in 0..raw_x.ncols() {
                x_std[j] = (raw_x[[i, j]] - self.x_mean[j]) / self.x_std[j];
            }
            let timer = Instant::now();
            let pred = self.predict_row_with_mode(x_std.view(), mode)?;
            elapsed += timer.elapsed().as_secs_f64();
            if pred.clamped {
                clamped_count += 1;
            }
            per_sample.push(sample_error(pred.y.view(), raw_y.row(i), metric));
            domain_ids.push(pred.domain_id);
        }
        let mean = per_sample.iter().sum::<f64>() / n as f64;
        let variance = per_sample.iter().map(|e| (e - mean) * (e - mean)).sum::<f64>() / n as f64;
        let mut per_domain = Vec::new();
        for domain in 0..self.dec.domain_count() {
            let errs: Vec<f64> = per_sample
                .iter()
                .zip(domain_ids.iter())
                .filter(|&(_, &d)| d == domain)
                .map(|(&e, _)| e)
                .collect();
            if !errs.is_empty() {
                per_domain.push(DomainError {
                    domain,
                    n_test: errs.len(),
                    mean_error: errs.iter().sum::<f64>() / errs.len() as f64,
                });
            }
        }
        let weighted = weighted_error(&per_domain, n);
        Ok(ErrorReport {
            mean_relative_error: mean,
            variance,
            per_domain,
            weighted_error: weighted,
            inference_time_seconds: elapsed / n as f64,
            clamped_count,
            per_sample,
        })
    }

    pub fn write_to<W: Write>(&self, w: &mut W) -> Result<()> {
        io::write_header(
            w,
            PREDICTOR_MAGIC,
            &[
                ("q", self.q.to_string()),
                ("inverse_mode", inverse_mode_tag(self.inverse_mode)),
                ("radius_used", format!("{}", self.radius_used)),
                ("jump_count", self.sm.source.jump_count.to_string()),
            ],
        )?;
        self.proj_x.write_to(w)?;
        self.proj_y.write_to(w)?;
        io::write_usize_vec(w, &self.sm.source.order)?;
        write_points(w, &self.sm.source.points)?;
        write_points(w, &self.sm.points)?;
        io::write_u64(w, self.sm.branches.len() as u64)?;
        for b in &self.sm.branches {
            io::write_f64(w, b.x_lo)?;
            io::write_f64(w, b.x_hi)?;
            io::write_f64(w, b.mirror.sign)?;
            io::write_f64(w, b.mirror.offset)?;
            io::write_u64(w, b.start as u64)?;
            io::write_u64(w, b.end as u64)?;
        }
        io::write_usize_vec(w, &self.sm.turning_points.iter().map(|t| t.index).collect::<Vec<_>>())?;
        io::write_vec1(w, &Array1::from_vec(self.sm.reflection_centers.clone()))?;
        io::write_u64(w, self.dec.segments.len() as u64)?;
        for s in &self.dec.segments {
            io::write_u64(w, s.start as u64)?;
            io::write_u64(w, s.end as u64)?;
        }
        io::write_u64(w, self.dec.raw_segments.len() as u64)?;
        for s in &self.dec.raw_segments {
            io::write_u64(w, s.start as u64)?;
            io::write_u64(w, s.end as u64)?;
        }
        io::write_f64(w, self.dec.epsilon)?;
        io::write_f64(w, self.dec.gamma)?;
        io::write_u64(w, self.interpolants.len() as u64)?;
        for interp in &self.interpolants {
            io::write_vec1(w, &Array1::from_vec(interp.knots_x.clone()))?;
            io::write_vec1(w, &Array1::from_vec(interp.knots_y.clone()))?;
            io::write_usize_vec(w, &interp.multiplicity)?;
        }
        io::write_mat(w, &self.train_x)?;
        io::write_vec1(w, &self.x_mean)?;
        io::write_vec1(w, &self.x_std)?;
        io::write_vec1(w, &self.y_mean)?;
        io::write_vec1(w, &self.y_std)?;
        io::write_usize_vec(w, &self.curve_position)?;
        io::write_u64(w, self.triangulation.len() as u64)?;
        for &(a, b) in &self.triangulation {
            io::write_u64(w, a as u64)?;
            io::write_u64(w, b as u64)?;
        }
        Ok(())
    }

    pub fn read_from<R: std::io::BufRead>(r: &mut R) -> Result<LatentPredictor> {
        let fields = io::read_header(r, PREDICTOR_MAGIC)?;
        let q: usize = io::parse_field(&fields, "q")?;
        let inverse_mode = parse_inverse_mode(io::header_field(&fields, "inverse_mode")?)?;
        let radius_used: f64 = io::parse_field(&fields, "radius_used")?;
        let jump_count: usize = io::parse_field(&fields, "jump_count")?;
        let proj_x = Projector::read_from(r)?;
        let proj_y = Projector::read_from(r)?;
        let order = io::read_usize_vec(r)?;
        let source_points = read_points(r)?;
        let stretched_points = read_points(r)?;
        let n_branches = io::read_u64(r)? as usize;
        let mut branches = Vec::with_capacity(n_branches);
        for id in 0..n_branches {
            let x_lo = io::read_f64(r)?;
            let x_hi = io::read_f64(r)?;
            let sign = io::read_f64(r)?;
            let offset = io::read_f64(r)?;
            let start = io::read_u64(r)? as usize;
            let end = io::read_u64(r)? as usize;
            branches.push(BranchedDomain {
                id,
                x_lo,
                x_hi,
                mirror: MirrorMap { sign, offset },
                start,
                end,
            });
        }
        let tp_indices = io::read_usize_vec(r)?;
        let centers = io::read_vec1(r)?.to_vec();
        let turning_points = tp_indices
            .iter()
            .map(|&i| TurningPoint {
                index: i,
                coords: source_points[i],
            })
            .collect();
        let n_segments = io::read_u64(r)? as usize;
        let mut segments = Vec::with_capacity(n_segments);
        for _ in 0..n_segments {
            let start = io::read_u64(r)? as usize;
            let end = io::read_u64(r)? as usize;
            segments.push(crate::decompose::Segment { start, end });
        }
        let n_raw = io::read_u64(r)? as usize;
        let mut raw_segments = Vec::with_capacity(n_raw);
        for _ in 0..n_raw {
            let start = io::read_u64(r)? as usize;
            let end = io::read_u64(r)? as usize;
            raw_segments.push(crate::decompose::Segment { start, end });
        }
        let epsilon = io::read_f64(r)?;
        let gamma = io::read_f64(r)?;
        let n_interp = io::read_u64(r)? as usize;
        let mut interpolants = Vec::with_capacity(n_interp);
        for _ in 0..n_interp {
            let knots_x = io::read_vec1(r)?.to_vec();
            let knots_y = io::read_vec1(r)?.to_vec();
            let multiplicity = io::read_usize_vec(r)?;
            interpolants.push(BranchInterpolant {
                knots_x,
                knots_y,
                multiplicity,
            });
        }
        let train_x = io::read_mat(r)?;
        let x_mean = io::read_vec1(r)?;
        let x_std = io::read_vec1(r)?;
        let y_mean = io::read_vec1(r)?;
        let y_std = io::read_vec1(r)?;
        let curve_position = io::read_usize_vec(r)?;
        let n_edges = io::read_u64(r)? as usize;
        let mut triangulation = Vec::with_capacity(n_edges);
        for _ in 0..n_edges {
            let a = io::read_u64(r)? as usize;
            let b = io::read_u64(r)? as usize;
            triangulation.push((a, b));
        }
        let source = Curve1M {
            points: source_points,
            order,
            jump_count,
        };
        let sm = StretchedManifold {
            points: stretched_points,
            branches,
            turning_points,
            reflection_centers: centers,
            source,
        };
        let dec = SegmentDecomposition {
            segments,
            raw_segments,
            epsilon,
            gamma,
        };
        Ok(LatentPredictor {
            proj_x,
            proj_y,
            sm,
            dec,
            interpolants,
            train_x,
            x_mean,
            x_std,
            y_mean,
            y_std,
            inverse_mode,
            curve_position,
            triangulation,
            radius_used,
            q,
        })
    }
}

fn inverse_mode_tag(mode: InverseMode) -> String {
    match mode {
        InverseMode::None => "none".to_string(),
        InverseMode::PseudoInverse => "pinv".to_string(),
        InverseMode::Complement(k) => format!("complement:{k}"),
    }
}

fn parse_inverse_mode(s: &str) -> Result<InverseMode> {
    if s == "none" {
        return Ok(InverseMode::None);
    }
    if s == "pinv" {
        return Ok(InverseMode::PseudoInverse);
    }
    if let Some(k) = s.strip_prefix("complement:") {
        return Ok(InverseMode::Complement(k.parse().map_err(|_| {
            Error::Format(format!("bad inverse mode `{s}`"))
        })?));
    }
    Err(Error::Format(format!("bad inverse mode `{s}`")))
}

fn write_points<W: Write>(w: &mut W, points: &[[f64; 2]]) -> Result<()> {
    io::write_u64(w, points.len() as u64)?;
    for p in points {
        io::write_f64(w, p[0])?;
        io::write_f64(w, p[1])?;
    }
    Ok(())
}

fn read_points<R: std::io::Read>(r: &mut R) -> Result<Vec<[f64; 2]>> {
    let n = io::read_u64(r)? as usize;
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let a = io::read_f64(r)?;
        let b = io::read_f64(r)?;
        out.push([a, b]);
    }
    Ok(out)
}

fn sample_error(pred: ArrayView1<'_, f64>, truth: ArrayView1<'_, f64>, metric: ErrorMetric) -> f64 {
    let (num, den) = match metric {
        ErrorMetric::RelativeL2 => {
            let num = pred
                .iter()
                .zip(truth.iter())
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            let den = truth.iter().map(|b| b * b).sum::<f64>().sqrt();
            (num, den)
        }
        ErrorMetric::LInfty => {
            let num = pred
                .iter()
                .zip(truth.iter())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            let den = truth.iter().map(|b| b.abs()).fold(0.0, f64::max);
            (num, den)
        }
    };
    if num == 0.0 {
        0.0
    } else {
        num / den
    }
}
