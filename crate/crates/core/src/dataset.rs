//! Harmonic-transport dataset generation, standardization and persistence.
//!
//! The model problem is the 1D complex transport equation
//! `m(x) y'(x) - i k y(x) = g(x)` on `[0,1]` with `y(0) = 0`. Case 1 samples
//! six scalar parameters and records the norm of the discrete solution;
//! case 2 samples a mach field and a Chebyshev source per row and records the
//! full real/imaginary solution vector.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use ndarray::{Array1, Array2, Axis};
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::io;

const DATASET_MAGIC: &str = "SMDD-DATASET v1";

/// Which study case produced a dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseId {
    Case1,
    Case2,
}

impl CaseId {
    pub fn as_str(self) -> &'static str {
        match self {
            CaseId::Case1 => "case1",
            CaseId::Case2 => "case2",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "case1" => Ok(CaseId::Case1),
            "case2" => Ok(CaseId::Case2),
            other => Err(Error::Format(format!("unknown case id `{other}`"))),
        }
    }
}

/// Solver configuration shared by both cases.
#[derive(Debug, Clone, Copy)]
pub struct TransportConfig {
    /// Number of spatial nodes on the uniform grid over `[0,1]`.
    pub grid_size: usize,
    /// Wave number, must be positive.
    pub wave_number: f64,
    pub case_id: CaseId,
}

impl TransportConfig {
    pub fn validate(&self) -> Result<()> {
        if self.grid_size < 2 {
            return Err(Error::GridTooSmall(self.grid_size));
        }
        if self.wave_number <= 0.0 {
            return Err(Error::Config(format!(
                "wave number must be positive, got {}",
                self.wave_number
            )));
        }
        Ok(())
    }
}

/// Scalar parameters of a case-1 sample.
#[derive(Debug, Clone, Copy)]
pub struct Case1Params {
    pub mach: f64,
    pub source_center: f64,
    pub wave_number: f64,
    pub amplitude: f64,
    pub frequency: f64,
    pub width: f64,
}

/// Case-1 sampling ranges: (mach, source center, wave number, amplitude,
/// frequency, width).
pub const CASE1_RANGES: [(f64, f64); 6] = [
    (0.2, 0.7),
    (0.0, 1.0),
    (80.0, 100.0),
    (0.5, 1.0),
    (50.0, 150.0),
    (0.1, 0.5),
];

/// Case-2 per-node mach value range.
pub const CASE2_MACH_RANGE: (f64, f64) = (0.2, 0.7);
/// Case-2 source Chebyshev coefficient range.
pub const CASE2_SOURCE_COEFF_RANGE: (f64, f64) = (25.0, 150.0);

/// One case-2 sample: the mach field values at the grid nodes and the
/// Chebyshev coefficients of the real and imaginary source parts.
#[derive(Debug, Clone)]
pub struct FieldParams {
    pub mach_values: Vec<f64>,
    pub source_coeffs: Vec<f64>,
}

impl FieldParams {
    /// Splits a flat parameter row `(m, g_R)` of length `3M`.
    pub fn from_row(row: &[f64]) -> Result<Self> {
        if !row.len().is_multiple_of(3) || row.is_empty() {
            return Err(Error::DimMismatch {
                expected: 3,
                actual: row.len(),
            });
        }
        let m = row.len() / 3;
        Ok(FieldParams {
            mach_values: row[..m].to_vec(),
            source_coeffs: row[m..].to_vec(),
        })
    }
}

/// Solves `m y' - i k y = g` on the uniform grid with `y(0) = 0`.
///
/// Integrating-factor scheme: the `ik/m` term is propagated exactly over each
/// interval (coefficients frozen at the right node) while the source is
/// reconstructed linearly between nodes and integrated in two exponential
/// half-steps. Unconditionally stable for `m > 0`, first-order convergent,
/// and free of the spurious damping a plain upwind difference introduces on
/// oscillatory solutions.
pub fn solve_transport(m_field: &[f64], k: f64, g_field: &[Complex64]) -> Result<Vec<Complex64>> {
    let nodes = m_field.len();
    if nodes < 2 {
        return Err(Error::GridTooSmall(nodes));
    }
    if g_field.len() != nodes {
        return Err(Error::DimMismatch {
            expected: nodes,
            actual: g_field.len(),
        });
    }
    for (i, &m) in m_field.iter().enumerate() {
        if m <= 0.0 {
            return Err(Error::NonPositiveMach { index: i, value: m });
        }
    }
    let h = 1.0 / (nodes as f64 - 1.0);
    let mut y = vec![Complex64::new(0.0, 0.0); nodes];
    for i in 1..nodes {
        let m = m_field[i];
        let w = Complex64::new(0.0, k / m);
        let half = 0.5 * h;
        let z = w * half;
        let mu = z.exp();
        let weight = half * phi1(z);
        let f_mid = 0.5 * (g_field[i - 1] + g_field[i]) / m;
        let f_end = g_field[i] / m;
        let y_half = mu * y[i - 1] + weight * f_mid;
        y[i] = mu * y_half + weight * f_end;
    }
    Ok(y)
}

/// `(e^z - 1) / z`, stable near zero.
fn phi1(z: Complex64) -> Complex64 {
    if z.norm() < 1e-8 {
        Complex64::new(1.0, 0.0) + z * 0.5 + z * z / 6.0
    } else {
        (z.exp() - Complex64::new(1.0, 0.0)) / z
    }
}

/// Case-1 source `a e^{i alpha x} + e^{i alpha x - (x - x_m)^2 / (2 sigma^2)}`.
pub fn source_function(x: f64, p: &Case1Params) -> Complex64 {
    let osc = Complex64::new(0.0, p.frequency * x).exp();
    let gauss = (-(x - p.source_center).powi(2) / (2.0 * p.width * p.width)).exp();
    osc * p.amplitude + osc * gauss
}

/// Evaluates `sum_j c_j T_j(2x - 1)` at each grid point (Chebyshev polynomials
/// of the first kind mapped onto `[0,1]`), by Clenshaw recurrence.
pub fn chebyshev_field(coeffs: &[f64], grid: &[f64]) -> Vec<f64> {
    assert!(!coeffs.is_empty(), "chebyshev_field needs coefficients");
    grid.iter()
        .map(|&x| {
            let t = 2.0 * x - 1.0;
            let mut b1 = 0.0;
            let mut b2 = 0.0;
            for &c in coeffs.iter().rev() {
                let next = 2.0 * t * b1 - b2 + c;
                b2 = b1;
                b1 = next;
            }
            b1 - t * b2
        })
        .collect()
}

/// Latin hypercube sample: each column is split into `n` equal strata with
/// exactly one draw per stratum. Deterministic for a given seed.
pub fn lhs_sample(ranges: &[(f64, f64)], n: usize, seed: u64) -> Result<Array2<f64>> {
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    for &(lo, hi) in ranges {
        if !(lo < hi) {
            return Err(Error::InvalidRange { low: lo, high: hi });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Array2::zeros((n, ranges.len()));
    for (j, &(lo, hi)) in ranges.iter().enumerate() {
        let mut strata: Vec<usize> = (0..n).collect();
        strata.shuffle(&mut rng);
        for i in 0..n {
            let u: f64 = rng.random();
            out[[i, j]] = lo + (strata[i] as f64 + u) / n as f64 * (hi - lo);
        }
    }
    Ok(out)
}

/// A parameter/output pair with its standardization statistics.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub case_id: CaseId,
    pub x: Array2<f64>,
    pub y: Array2<f64>,
    pub x_mean: Array1<f64>,
    pub x_std: Array1<f64>,
    pub y_mean: Array1<f64>,
    pub y_std: Array1<f64>,
    /// Columns whose variance vanished; they are centered but not scaled.
    pub zero_var_x: Vec<usize>,
    pub zero_var_y: Vec<usize>,
    pub standardized: bool,
    pub seed: u64,
}

impl Dataset {
    pub fn from_raw(case_id: CaseId, x: Array2<f64>, y: Array2<f64>, seed: u64) -> Self {
        let p = x.ncols();
        let q = y.ncols();
        Dataset {
            case_id,
            x,
            y,
            x_mean: Array1::zeros(p),
            x_std: Array1::ones(p),
            y_mean: Array1::zeros(q),
            y_std: Array1::ones(q),
            zero_var_x: Vec::new(),
            zero_var_y: Vec::new(),
            standardized: false,
            seed,
        }
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    pub fn q(&self) -> usize {
        self.y.ncols()
    }

    /// Centers every column to mean 0 and scales to sample variance 1.
    /// Zero-variance columns are flagged and only centered.
    pub fn standardize(mut self) -> Result<Dataset> {
        if self.standardized {
            return Err(Error::AlreadyStandardized);
        }
        if self.n() < 2 {
            return Err(Error::TooFewRows(self.n()));
        }
        let (xm, xs, zx) = column_stats(&self.x);
        let (ym, ys, zy) = column_stats(&self.y);
        apply_standardize(&mut self.x, &xm, &xs);
        apply_standardize(&mut self.y, &ym, &ys);
        self.x_mean = xm;
        self.x_std = xs;
        self.y_mean = ym;
        self.y_std = ys;
        self.zero_var_x = zx;
        self.zero_var_y = zy;
        self.standardized = true;
        Ok(self)
    }

    /// Inverse of [`standardize`](Self::standardize) using the stored statistics.
    pub fn destandardize(mut self) -> Result<Dataset> {
        if !self.standardized {
            return Err(Error::NotStandardized);
        }
        apply_destandardize(&mut self.x, &self.x_mean, &self.x_std);
        apply_destandardize(&mut self.y, &self.y_mean, &self.y_std);
        self.standardized = false;
        Ok(self)
    }

    /// X in raw (destandardized) coordinates, regardless of the current state.
    pub fn raw_x(&self) -> Array2<f64> {
        let mut out = self.x.clone();
        if self.standardized {
            apply_destandardize(&mut out, &self.x_mean, &self.x_std);
        }
        out
    }

    /// Y in raw (destandardized) coordinates.
    pub fn raw_y(&self) -> Array2<f64> {
        let mut out = self.y.clone();
        if self.standardized {
            apply_destandardize(&mut out, &self.y_mean, &self.y_std);
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Dataset> {
        let mut r = BufReader::new(File::open(path)?);
        Self::read_from(&mut r)
    }

    pub fn write_to<W: Write>(&self, w: &mut W) -> Result<()> {
        io::write_header(
            w,
            DATASET_MAGIC,
            &[
                ("case", self.case_id.as_str().to_string()),
                ("n", self.n().to_string()),
                ("p", self.p().to_string()),
                ("q", self.q().to_string()),
                ("seed", self.seed.to_string()),
                ("standardized", self.standardized.to_string()),
                ("cheb_map", "t=2x-1".to_string()),
            ],
        )?;
        io::write_vec1(w, &self.x_mean)?;
        io::write_vec1(w, &self.x_std)?;
        io::write_vec1(w, &self.y_mean)?;
        io::write_vec1(w, &self.y_std)?;
        io::write_usize_vec(w, &self.zero_var_x)?;
        io::write_usize_vec(w, &self.zero_var_y)?;
        io::write_mat(w, &self.x)?;
        io::write_mat(w, &self.y)?;
        Ok(())
    }

    pub fn read_from<R: std::io::BufRead>(r: &mut R) -> Result<Dataset> {
        let fields = io::read_header(r, DATASET_MAGIC)?;
        let case_id = CaseId::parse(io::header_field(&fields, "case")?)?;
        let n: usize = io::parse_field(&fields, "n")?;
        let p: usize = io::parse_field(&fields, "p")?;
        let q: usize = io::parse_field(&fields, "q")?;
        let seed: u64 = io::parse_field(&fields, "seed")?;
        let standardized: bool = io::parse_field(&fields, "standardized")?;
        let x_mean = io::read_vec1(r)?;
        let x_std = io::read_vec1(r)?;
        let y_mean = io::read_vec1(r)?;
        let y_std = io::read_vec1(r)?;
        let zero_var_x = io::read_usize_vec(r)?;
        let zero_var_y = io::read_usize_vec(r)?;
        let x = io::read_mat(r)?;
        let y = io::read_mat(r)?;
        if x.dim() != (n, p) || y.dim() != (n, q) {
            return Err(Error::Format("matrix shapes disagree with header".into()));
        }
        Ok(Dataset {
            case_id,
            x,
            y,
            x_mean,
            x_std,
            y_mean,
            y_std,
            zero_var_x,
            zero_var_y,
            standardized,
            seed,
        })
    }

    /// CSV export: one header row, then `x` and `y` columns at full precision.
    pub fn export_csv(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        let mut header: Vec<String> = (0..self.p()).map(|j| format!("x{j}")).collect();
        header.extend((0..self.q()).map(|j| format!("y{j}")));
        writeln!(w, "{}", header.join(","))?;
        for i in 0..self.n() {
            let mut row: Vec<String> = self.x.row(i).iter().map(|v| format!("{v}")).collect();
            row.extend(self.y.row(i).iter().map(|v| format!("{v}")));
            writeln!(w, "{}", row.join(","))?;
        }
        w.flush()?;
        Ok(())
    }
}

fn column_stats(a: &Array2<f64>) -> (Array1<f64>, Array1<f64>, Vec<usize>) {
    let n = a.nrows() as f64;
    let mean = a.mean_axis(Axis(0)).expect("non-empty matrix");
    let mut std = Array1::zeros(a.ncols());
    let mut zero_var = Vec::new();
    for j in 0..a.ncols() {
        let mut ss = 0.0;
        for i in 0..a.nrows() {
            let d = a[[i, j]] - mean[j];
            ss += d * d;
        }
        let s = (ss / (n - 1.0)).sqrt();
        if s <= 1e-13 * (1.0 + mean[j].abs()) {
            zero_var.push(j);
            std[j] = 1.0;
        } else {
            std[j] = s;
        }
    }
    (mean, std, zero_var)
}

fn apply_standardize(a: &mut Array2<f64>, mean: &Array1<f64>, std: &Array1<f64>) {
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            a[[i, j]] = (a[[i, j]] - mean[j]) / std[j];
        }
    }
}

fn apply_destandardize(a: &mut Array2<f64>, mean: &Array1<f64>, std: &Array1<f64>) {
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            a[[i, j]] = a[[i, j]] * std[j] + mean[j];
        }
    }
}

/// Generates the case-1 dataset (p = 6, q = 1) on the default 2048-node grid.
pub fn sample_case1(n: usize, seed: u64) -> Result<Dataset> {
    sample_case1_with_grid(n, seed, 2048)
}

/// Case-1 generation with an explicit solver grid. The output per sample is
/// the L2 norm of the real/imaginary-concatenated discrete solution.
pub fn sample_case1_with_grid(n: usize, seed: u64, grid_size: usize) -> Result<Dataset> {
    if grid_size < 2 {
        return Err(Error::GridTooSmall(grid_size));
    }
    let x = lhs_sample(&CASE1_RANGES, n, seed)?;
    let grid: Vec<f64> = (0..grid_size)
        .map(|i| i as f64 / (grid_size as f64 - 1.0))
        .collect();
    let mut y = Array2::zeros((n, 1));
    for i in 0..n {
        let p = Case1Params {
            mach: x[[i, 0]],
            source_center: x[[i, 1]],
            wave_number: x[[i, 2]],
            amplitude: x[[i, 3]],
            frequency: x[[i, 4]],
            width: x[[i, 5]],
        };
        let g: Vec<Complex64> = grid.iter().map(|&xx| source_function(xx, &p)).collect();
        let m_field = vec![p.mach; grid_size];
        let sol = solve_transport(&m_field, p.wave_number, &g)?;
        y[[i, 0]] = sol.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    }
    Dataset::from_raw(CaseId::Case1, x, y, seed).standardize()
}

/// Generates the case-2 dataset (p = 3M, q = 2M) for a fixed wave number.
///
/// Each row samples the mach values at the grid nodes uniformly in
/// `[0.2, 0.7]` and the source as `2M` Chebyshev coefficients uniformly in
/// `[25, 150]`; the output row is the real/imaginary-concatenated solution.
pub fn sample_case2(n: usize, grid_size: usize, k: f64, seed: u64) -> Result<Dataset> {
    if grid_size < 2 {
        return Err(Error::GridTooSmall(grid_size));
    }
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let grid: Vec<f64> = (0..grid_size)
        .map(|i| i as f64 / (grid_size as f64 - 1.0))
        .collect();
    let m = grid_size;
    let mut x = Array2::zeros((n, 3 * m));
    let mut y = Array2::zeros((n, 2 * m));
    let (mach_lo, mach_hi) = CASE2_MACH_RANGE;
    let (c_lo, c_hi) = CASE2_SOURCE_COEFF_RANGE;
    for i in 0..n {
        for j in 0..m {
            x[[i, j]] = mach_lo + rng.random::<f64>() * (mach_hi - mach_lo);
        }
        for j in 0..2 * m {
            x[[i, m + j]] = c_lo + rng.random::<f64>() * (c_hi - c_lo);
        }
        let row = x.row(i);
        let mach: Vec<f64> = row.iter().take(m).cloned().collect();
        let re_coeffs: Vec<f64> = row.iter().skip(m).take(m).cloned().collect();
        let im_coeffs: Vec<f64> = row.iter().skip(2 * m).cloned().collect();
        let re = chebyshev_field(&re_coeffs, &grid);
        let im = chebyshev_field(&im_coeffs, &grid);
        let g: Vec<Complex64> = re
            .iter()
            .zip(im.iter())
            .map(|(&a, &b)| Complex64::new(a, b))
            .collect();
        let sol = solve_transport(&mach, k, &g)?;
        for j in 0..m {
            y[[i, j]] = sol[j].re;
            y[[i, m + j]] = sol[j].im;
        }
    }
    Dataset::from_raw(CaseId::Case2, x, y, seed).standardize()
}
