//! Iterative PCA reduction with two inverse-projection strategies.
//!
//! A fit repeatedly takes the SVD of the current data matrix and keeps the
//! minimal prefix of right singular vectors whose cumulative explained
//! variance ratio reaches the configured floor, until the target dimension is
//! reached. Each step also stores the complement basis and the training
//! coordinates along it, which makes the reduction exactly invertible on the
//! training set: the identity `I = V V^T + V^c V^cT` splits every vector into
//! its kept and discarded parts.
//!
//! Two reconstruction routes are provided:
//! - [`Projector::pinv_reconstruct`] multiplies by the transposed kept bases
//!   (the Moore-Penrose pseudo-inverse collapses to the transpose because the
//!   kept bases have orthonormal columns), i.e. orthogonal back-projection;
//! - [`Projector::complement_reconstruct`] estimates the discarded
//!   coordinates of a query from the nearest training points in the reduced
//!   space (inverse-distance weighting over `k_nn` neighbors) and applies the
//!   complement identity stepwise.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use ndarray::{s, Array1, Array2, ArrayView2};

use crate::error::{Error, Result};
use crate::io;
use crate::linalg::svd_full_v;

const PROJECTOR_MAGIC: &str = "SMDD-PROJECTOR v1";

/// Reduction schedule parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct IpcaConfig {
    /// Final number of coordinates.
    pub target_dim: usize,
    /// Minimum explained-variance ratio a step must keep, in `(0, 1]`.
    pub evr_floor: f64,
    /// Trailing columns dropped when the EVR rule would keep everything.
    pub fallback_drop: usize,
}

impl IpcaConfig {
    pub fn new(target_dim: usize, evr_floor: f64, fallback_drop: usize) -> Self {
        IpcaConfig {
            target_dim,
            evr_floor,
            fallback_drop,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.target_dim < 1 {
            return Err(Error::Config("target dimension must be at least 1".into()));
        }
        if !(self.evr_floor > 0.0 && self.evr_floor <= 1.0) {
            return Err(Error::Config(format!(
                "EVR floor must be in (0, 1], got {}",
                self.evr_floor
            )));
        }
        if self.fallback_drop < 1 {
            return Err(Error::Config("fallback drop must be at least 1".into()));
        }
        Ok(())
    }
}

/// One SVD reduction step.
#[derive(Debug, Clone)]
pub struct SvdStep {
    /// Kept right singular vectors, `p_prev x p_next`, orthonormal columns.
    pub v_kept: Array2<f64>,
    /// Complement basis, `p_prev x (p_prev - p_next)`; together with
    /// `v_kept` it spans the full input space of the step.
    pub v_comp: Array2<f64>,
    /// Training coordinates along the complement, `n x (p_prev - p_next)`.
    pub x_comp: Array2<f64>,
    /// Training coordinates after the step, `n x p_next`; nearest-neighbor
    /// reference set for complement estimation.
    pub x_out: Array2<f64>,
    /// All singular values of the step input, non-increasing.
    pub singular_values: Array1<f64>,
    /// Fraction of the step variance carried by the kept prefix.
    pub evr_kept: f64,
}

impl SvdStep {
    pub fn input_dim(&self) -> usize {
        self.v_kept.nrows()
    }

    pub fn kept_dim(&self) -> usize {
        self.v_kept.ncols()
    }
}

/// A fitted chain of SVD reduction steps.
#[derive(Debug, Clone)]
pub struct Projector {
    pub steps: Vec<SvdStep>,
    pub input_dim: usize,
    pub output_dim: usize,
    /// Set when the data was numerically rank-deficient below the target.
    pub degenerate_rank: bool,
    pub config: IpcaConfig,
}

/// One row of [`Projector::evr_report`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvrRow {
    pub step: usize,
    pub kept_dim: usize,
    pub evr_kept: f64,
}

/// Fits the iterative reduction down to `cfg.target_dim`.
pub fn fit_ipca(x: ArrayView2<'_, f64>, cfg: &IpcaConfig) -> Result<Projector> {
    cfg.validate()?;
    let n = x.nrows();
    let p = x.ncols();
    if n < 2 {
        return Err(Error::TooFewRows(n));
    }
    if p < cfg.target_dim {
        return Err(Error::DimMismatch {
            expected: cfg.target_dim,
            actual: p,
        });
    }
    let mut cur = x.to_owned();
    let mut steps = Vec::new();
    let mut degenerate = false;
    while cur.ncols() > cfg.target_dim {
        let (sv, v) = svd_full_v(cur.view())?;
        let p_prev = cur.ncols();
        let total: f64 = sv.iter().map(|&x| x * x).sum();
        let smax = sv.first().copied().unwrap_or(0.0);
        let rank = sv.iter().filter(|&&x| x > smax * 1e-12 && x > 0.0).count();
        if rank < cfg.target_dim && !degenerate {
            degenerate = true;
            log::warn!(
                "rank {rank} is below the target dimension {}; keeping zero singular directions",
                cfg.target_dim
            );
        }
        let kept = select_kept(&sv, total, p_prev, cfg);
        let v_kept = v.slice(s![.., ..kept]).to_owned();
        let v_comp = v.slice(s![.., kept..]).to_owned();
        let x_out = cur.dot(&v_kept);
        let x_comp = cur.dot(&v_comp);
        let evr_kept = if total > 0.0 {
            sv.iter().take(kept).map(|&x| x * x).sum::<f64>() / total
        } else {
            1.0
        };
        steps.push(SvdStep {
            v_kept,
            v_comp,
            x_comp,
            x_out: x_out.clone(),
            singular_values: sv,
            evr_kept,
        });
        cur = x_out;
    }
    Ok(Projector {
        steps,
        input_dim: p,
        output_dim: cfg.target_dim.min(p),
        degenerate_rank: degenerate,
        config: cfg.clone(),
    })
}

/// Minimal prefix whose cumulative EVR reaches the floor, clamped to the
/// target from below and forced to make progress from above.
fn select_kept(sv: &Array1<f64>, total: f64, p_prev: usize, cfg: &IpcaConfig) -> usize {
    let mut kept = p_prev;
    if total > 0.0 {
        let mut cum = 0.0;
        for j in 0..p_prev {
            cum += sv.get(j).map(|&x| x * x).unwrap_or(0.0);
            if cum / total >= cfg.evr_floor {
                kept = j + 1;
                break;
            }
        }
    }
    let kept = kept.max(cfg.target_dim);
    if kept >= p_prev {
        p_prev.saturating_sub(cfg.fallback_drop).max(cfg.target_dim)
    } else {
        kept
    }
}

impl Projector {
    /// Classical single-step PCA baseline: one SVD, keep `target_dim`
    /// components, run through the same interfaces as the iterative fit.
    pub fn fit_pca(x: ArrayView2<'_, f64>, target_dim: usize) -> Result<Projector> {
        let p = x.ncols();
        let cfg = IpcaConfig::new(target_dim, 1.0, p.saturating_sub(target_dim).max(1));
        if x.nrows() < 2 {
            return Err(Error::TooFewRows(x.nrows()));
        }
        if p < target_dim || target_dim < 1 {
            return Err(Error::DimMismatch {
                expected: target_dim,
                actual: p,
            });
        }
        if p == target_dim {
            return Ok(Projector {
                steps: Vec::new(),
                input_dim: p,
                output_dim: p,
                degenerate_rank: false,
                config: cfg,
            });
        }
        let (sv, v) = svd_full_v(x)?;
        let total: f64 = sv.iter().map(|&x| x * x).sum();
        let smax = sv.first().copied().unwrap_or(0.0);
        let rank = sv.iter().filter(|&&x| x > smax * 1e-12 && x > 0.0).count();
        let v_kept = v.slice(s![.., ..target_dim]).to_owned();
        let v_comp = v.slice(s![.., target_dim..]).to_owned();
        let x_out = x.dot(&v_kept);
        let x_comp = x.dot(&v_comp);
        let evr_kept = if total > 0.0 {
            sv.iter().take(target_dim).map(|&x| x * x).sum::<f64>() / total
        } else {
            1.0
        };
        Ok(Projector {
            steps: vec![SvdStep {
                v_kept,
                v_comp,
                x_comp,
                x_out,
                singular_values: sv,
                evr_kept,
            }],
            input_dim: p,
            output_dim: target_dim,
            degenerate_rank: rank < target_dim,
            config: cfg,
        })
    }

    /// Applies the kept bases stepwise: `X V_1 ... V_k`.
    pub fn project(&self, x: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        if x.ncols() != self.input_dim {
            return Err(Error::DimMismatch {
                expected: self.input_dim,
                actual: x.ncols(),
            });
        }
        let mut cur = x.to_owned();
        for step in &self.steps {
            cur = cur.dot(&step.v_kept);
        }
        Ok(cur)
    }

    /// Pseudo-inverse route: orthogonal back-projection through the chain.
    pub fn pinv_reconstruct(&self, xk: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        if xk.ncols() != self.output_dim {
            return Err(Error::DimMismatch {
                expected: self.output_dim,
                actual: xk.ncols(),
            });
        }
        let mut cur = xk.to_owned();
        for step in self.steps.iter().rev() {
            cur = cur.dot(&step.v_kept.t());
        }
        Ok(cur)
    }

    /// Complement route: per step (innermost outward) the discarded
    /// coordinates are taken from the `k_nn` nearest training points in the
    /// reduced coordinates, inverse-distance weighted; a query at distance
    /// zero reuses that training complement directly. Exact on training rows.
    pub fn complement_reconstruct(
        &self,
        xk: ArrayView2<'_, f64>,
        k_nn: usize,
    ) -> Result<Array2<f64>> {
        if k_nn < 1 {
            return Err(Error::Config("k_nn must be at least 1".into()));
        }
        if xk.ncols() != self.output_dim {
            return Err(Error::DimMismatch {
                expected: self.output_dim,
                actual: xk.ncols(),
            });
        }
        let mut cur = xk.to_owned();
        for step in self.steps.iter().rev() {
            let train = &step.x_out;
            if train.nrows() == 0 {
                return Err(Error::EmptyTraining);
            }
            let comp_dim = step.v_comp.ncols();
            let mut comp = Array2::zeros((cur.nrows(), comp_dim));
            for (r, row) in cur.rows().into_iter().enumerate() {
                let neighbors = nearest_rows(train, &row.to_vec(), k_nn);
                if neighbors[0].0 <= 0.0 || k_nn == 1 {
                    comp.row_mut(r).assign(&step.x_comp.row(neighbors[0].1));
                } else {
                    let weights: Vec<f64> =
                        neighbors.iter().map(|&(d2, _)| 1.0 / d2.sqrt()).collect();
                    let wsum: f64 = weights.iter().sum();
                    for (&(_, idx), &w) in neighbors.iter().zip(weights.iter()) {
                        let scale = w / wsum;
                        for c in 0..comp_dim {
                            comp[[r, c]] += scale * step.x_comp[[idx, c]];
                        }
                    }
                }
            }
            cur = cur.dot(&step.v_kept.t()) + comp.dot(&step.v_comp.t());
        }
        Ok(cur)
    }

    /// Per-step kept dimensions and EVR fractions.
    pub fn evr_report(&self) -> Vec<EvrRow> {
        self.steps
            .iter()
            .enumerate()
            .map(|(i, st)| EvrRow {
                step: i + 1,
                kept_dim: st.kept_dim(),
                evr_kept: st.evr_kept,
            })
            .collect()
    }

    /// Product of the per-step EVR fractions.
    pub fn total_retained_evr(&self) -> f64 {
        self.steps.iter().map(|st| st.evr_kept).product()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Projector> {
        let mut r = BufReader::new(File::open(path)?);
        Projector::read_from(&mut r)
    }

    pub fn write_to<W: Write>(&self, w: &mut W) -> Result<()> {
        io::write_header(
            w,
            PROJECTOR_MAGIC,
            &[
                ("input_dim", self.input_dim.to_string()),
                ("output_dim", self.output_dim.to_string()),
                ("steps", self.steps.len().to_string()),
                ("degenerate_rank", self.degenerate_rank.to_string()),
                ("target_dim", self.config.target_dim.to_string()),
                ("evr_floor", format!("{}", self.config.evr_floor)),
                ("fallback_drop", self.config.fallback_drop.to_string()),
            ],
        )?;
        for step in &self.steps {
            io::write_mat(w, &step.v_kept)?;
            io::write_mat(w, &step.v_comp)?;
            io::write_mat(w, &step.x_comp)?;
            io::write_mat(w, &step.x_out)?;
            io::write_vec1(w, &step.singular_values)?;
            io::write_f64(w, step.evr_kept)?;
        }
        Ok(())
    }

    pub fn read_from<R: std::io::BufRead>(r: &mut R) -> Result<Projector> {
        let fields = io::read_header(r, PROJECTOR_MAGIC)?;
        let input_dim: usize = io::parse_field(&fields, "input_dim")?;
        let output_dim: usize = io::parse_field(&fields, "output_dim")?;
        let n_steps: usize = io::parse_field(&fields, "steps")?;
        let degenerate_rank: bool = io::parse_field(&fields, "degenerate_rank")?;
        let config = IpcaConfig::new(
            io::parse_field(&fields, "target_dim")?,
            io::parse_field(&fields, "evr_floor")?,
            io::parse_field(&fields, "fallback_drop")?,
        );
        let mut steps = Vec::with_capacity(n_steps);
        for _ in 0..n_steps {
            let v_kept = io::read_mat(r)?;
            let v_comp = io::read_mat(r)?;
            let x_comp = io::read_mat(r)?;
            let x_out = io::read_mat(r)?;
            let singular_values = io::read_vec1(r)?;
            let evr_kept = io::read_f64(r)?;
            steps.push(SvdStep {
                v_kept,
                v_comp,
                x_comp,
                x_out,
                singular_values,
                evr_kept,
            });
        }
        Ok(Projector {
            steps,
            input_dim,
            output_dim,
            degenerate_rank,
            config,
        })
    }
}

/// `k` nearest rows of `train` to `query` by squared Euclidean distance,
/// ties broken by the lower row index.
fn nearest_rows(train: &Array2<f64>, query: &[f64], k: usize) -> Vec<(f64, usize)> {
    let mut dist: Vec<(f64, usize)> = train
        .rows()
        .into_iter()
        .enumerate()
        .map(|(i, row)| {
            let d2: f64 = row
                .iter()
                .zip(query.iter())
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            (d2, i)
        })
        .collect();
    dist.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    dist.truncate(k.min(dist.len()));
    dist
}
