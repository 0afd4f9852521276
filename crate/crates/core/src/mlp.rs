//! Minimal feed-forward baseline trained by plain mini-batch SGD.
//!
//! Hidden layers use ELU (alpha = 1), the output layer is linear, and the
//! loss is mean squared error on standardized outputs. Initialization and
//! the shuffle sequence are seeded, so training is bit-reproducible on one
//! platform.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::io;

const MLP_MAGIC: &str = "SMDD-MLP v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Elu,
}

#[derive(Debug, Clone)]
pub struct MlpConfig {
    /// Hidden layer widths; the input/output widths come from the data.
    pub layer_sizes: Vec<usize>,
    pub activation: Activation,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
}

impl MlpConfig {
    pub fn validate(&self) -> Result<()> {
        if self.layer_sizes.contains(&0) {
            return Err(Error::Config("hidden layer sizes must be positive".into()));
        }
        if !(self.learning_rate > 0.0) {
            return Err(Error::Config("learning rate must be positive".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch size must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct MlpModel {
    /// Per layer, `fan_in x fan_out`.
    pub weights: Vec<Array2<f64>>,
    pub biases: Vec<Array1<f64>>,
    pub config: MlpConfig,
    /// Mean training loss per epoch.
    pub loss_history: Vec<f64>,
}

fn elu(x: f64) -> f64 {
    if x >= 0.0 {
        x
    } else {
        x.exp() - 1.0
    }
}

fn elu_prime(x: f64) -> f64 {
    if x >= 0.0 {
        1.0
    } else {
        x.exp()
    }
}

/// Seeded initialization: weights and biases uniform in
/// `(-1, 1) / sqrt(fan_in)`, drawn layer by layer.
pub fn init_model(input_dim: usize, output_dim: usize, cfg: &MlpConfig) -> Result<MlpModel> {
    cfg.validate()?;
    if input_dim == 0 || output_dim == 0 {
        return Err(Error::Config("input/output dimensions must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut dims = vec![input_dim];
    dims.extend_from_slice(&cfg.layer_sizes);
    dims.push(output_dim);
    let mut weights = Vec::new();
    let mut biases = Vec::new();
    for w in dims.windows(2) {
        let (fan_in, fan_out) = (w[0], w[1]);
        let scale = 1.0 / (fan_in as f64).sqrt();
        let weight =
            Array2::from_shape_fn((fan_in, fan_out), |_| (rng.random::<f64>() * 2.0 - 1.0) * scale);
        let bias = Array1::from_shape_fn(fan_out, |_| (rng.random::<f64>() * 2.0 - 1.0) * scale);
        weights.push(weight);
        biases.push(bias);
    }
    Ok(MlpModel {
        weights,
        biases,
        config: cfg.clone(),
        loss_history: Vec::new(),
    })
}

/// Forward pass; the shape contract is `m x p -> m x q`.
pub fn mlp_predict(model: &MlpModel, x: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
    let expected = model.weights[0].nrows();
    if x.ncols() != expected {
        return Err(Error::DimMismatch {
            expected,
            actual: x.ncols(),
        });
    }
    let last = model.weights.len() - 1;
    let mut a = x.to_owned();
    for (l, (w, b)) in model.weights.iter().zip(model.biases.iter()).enumerate() {
        let mut z = a.dot(w);
        z += b;
        if l < last {
            z.mapv_inplace(elu);
        }
        a = z;
    }
    Ok(a)
}

/// MSE of the forward pass against `y`.
pub fn mse_loss(model: &MlpModel, x: ArrayView2<'_, f64>, y: ArrayView2<'_, f64>) -> Result<f64> {
    let pred = mlp_predict(model, x)?;
    let m = (x.nrows() * y.ncols()) as f64;
    Ok((&pred - &y).iter().map(|d| d * d).sum::<f64>() / m)
}

/// Per-layer weight gradients, bias gradients, and the batch loss.
pub type Gradients = (Vec<Array2<f64>>, Vec<Array1<f64>>, f64);

/// Analytic MSE gradients for one batch, plus the batch loss.
pub fn gradients(
    model: &MlpModel,
    x: ArrayView2<'_, f64>,
    y: ArrayView2<'_, f64>,
) -> Result<Gradients> {
    let expected = model.weights[0].nrows();
    if x.ncols() != expected {
        return Err(Error::DimMismatch {
            expected,
            actual: x.ncols(),
        });
    }
    let last = model.weights.len() - 1;
    let mut activations = vec![x.to_owned()];
    let mut pre_activations = Vec::new();
    for (l, (w, b)) in model.weights.iter().zip(model.biases.iter()).enumerate() {
        let mut z = activations.last().unwrap().dot(w);
        z += b;
        pre_activations.push(z.clone());
        if l < last {
            z.mapv_inplace(elu);
        }
        activations.push(z);
    }
    let m = (x.nrows() * y.ncols()) as f64;
    let output = activations.last().unwrap();
    let loss = (output - &y).iter().map(|d| d * d).sum::<f64>() / m;
    let mut delta = (output - &y) * (2.0 / m);
    let mut grad_w = vec![Array2::zeros((0, 0)); model.weights.len()];
    let mut grad_b = vec![Array1::zeros(0); model.biases.len()];
    for l in (0..model.weights.len()).rev() {
        grad_w[l] = activations[l].t().dot(&delta);
        grad_b[l] = delta.sum_axis(Axis(0));
        if l > 0 {
            let mut back = delta.dot(&model.weights[l].t());
            back.zip_mut_with(&pre_activations[l - 1], |d, &z| *d *= elu_prime(z));
            delta = back;
        }
    }
    Ok((grad_w, grad_b, loss))
}

/// Mini-batch SGD on mean squared error. Deterministic for a fixed seed:
/// the initialization and every epoch's shuffle come from one seeded stream.
pub fn train_mlp(
    x: ArrayView2<'_, f64>,
    y: ArrayView2<'_, f64>,
    cfg: &MlpConfig,
) -> Result<MlpModel> {
    let n = x.nrows();
    if y.nrows() != n {
        return Err(Error::DimMismatch {
            expected: n,
            actual: y.nrows(),
        });
    }
    if n < cfg.batch_size {
        return Err(Error::Config(format!(
            "batch size {} exceeds the {} training rows",
            cfg.batch_size, n
        )));
    }
    let mut model = init_model(x.ncols(), y.ncols(), cfg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(1));
    let mut indices: Vec<usize> = (0..n).collect();
    for epoch in 0..cfg.epochs {
        indices.shuffle(&mut rng);
        let mut epoch_sse = 0.0;
        for (batch_id, chunk) in indices.chunks(cfg.batch_size).enumerate() {
            let xb = gather_rows(&x, chunk);
            let yb = gather_rows(&y, chunk);
            let (gw, gb, loss) = gradients(&model, xb.view(), yb.view())?;
            if !loss.is_finite() {
                return Err(Error::NonFiniteLoss {
                    epoch,
                    batch: batch_id,
                });
            }
            for (w, g) in model.weights.iter_mut().zip(gw.iter()) {
                w.scaled_add(-cfg.learning_rate, g);
            }
            for (b, g) in model.biases.iter_mut().zip(gb.iter()) {
                b.scaled_add(-cfg.learning_rate, g);
            }
            epoch_sse += loss * (chunk.len() * y.ncols()) as f64;
        }
        model.loss_history.push(epoch_sse / (n * y.ncols()) as f64);
    }
    Ok(model)
}

fn gather_rows(a: &ArrayView2<'_, f64>, rows: &[usize]) -> Array2<f64> {
    let mut out = Array2::zeros((rows.len(), a.ncols()));
    for (i, &r) in rows.iter().enumerate() {
        out.row_mut(i).assign(&a.row(r));
    }
    out
}

/// Independent models per decomposed domain, trained in parallel.
///
/// `assignments[i]` is the domain of training row `i`; `configs` supplies one
/// configuration per domain. Every domain must own at least `min_rows` rows.
pub fn train_per_domain(
    x: ArrayView2<'_, f64>,
    y: ArrayView2<'_, f64>,
    assignments: &[usize],
    configs: &[MlpConfig],
    min_rows: usize,
) -> Result<Vec<MlpModel>> {
    let domains = configs.len();
    if assignments.len() != x.nrows() {
        return Err(Error::DimMismatch {
            expected: x.nrows(),
            actual: assignments.len(),
        });
    }
    let mut rows_per_domain: Vec<Vec<usize>> = vec![Vec::new(); domains];
    for (row, &d) in assignments.iter().enumerate() {
        if d >= domains {
            return Err(Error::Config(format!(
                "row {row} assigned to domain {d}, but only {domains} configs given"
            )));
        }
        rows_per_domain[d].push(row);
    }
    for (d, rows) in rows_per_domain.iter().enumerate() {
        if rows.len() < min_rows {
            return Err(Error::UndersizedDomain {
                domain: d,
                rows: rows.len(),
                min: min_rows,
            });
        }
    }
    let subsets: Vec<(Array2<f64>, Array2<f64>)> = rows_per_domain
        .iter()
        .map(|rows| (gather_rows(&x, rows), gather_rows(&y, rows)))
        .collect();
    let mut results: Vec<Option<Result<MlpModel>>> = (0..domains).map(|_| None).collect();
    std::thread::scope(|scope| {
        let mut handles = Vec::new();
        for (d, ((xd, yd), cfg)) in subsets.iter().zip(configs.iter()).enumerate() {
            handles.push((d, scope.spawn(move || train_mlp(xd.view(), yd.view(), cfg))));
        }
        for (d, h) in handles {
            results[d] = Some(h.join().expect("training thread panicked"));
        }
    });
    results.into_iter().map(|r| r.unwrap()).collect()
}

impl MlpModel {
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<MlpModel> {
        let mut r = BufReader::new(File::open(path)?);
        MlpModel::read_from(&mut r)
    }

    pub fn write_to<W: Write>(&self, w: &mut W) -> Result<()> {
        io::write_header(
            w,
            MLP_MAGIC,
            &[
                (
                    "hidden",
                    self.config
                        .layer_sizes
                        .iter()
                        .map(|s| s.to_string())
                        .collect::<Vec<_>>()
                        .join(";"),
                ),
                ("activation", "elu".to_string()),
                ("learning_rate", format!("{}", self.config.learning_rate)),
                ("batch_size", self.config.batch_size.to_string()),
                ("epochs", self.config.epochs.to_string()),
                ("seed", self.config.seed.to_string()),
                ("layers", self.weights.len().to_string()),
            ],
        )?;
        for (weight, bias) in self.weights.iter().zip(self.biases.iter()) {
            io::write_mat(w, weight)?;
            io::write_vec1(w, bias)?;
        }
        let history = Array1::from_vec(self.loss_history.clone());
        io::write_vec1(w, &history)?;
        Ok(())
    }

    pub fn read_from<R: std::io::BufRead>(r: &mut R) -> Result<MlpModel> {
        let fields = io::read_header(r, MLP_MAGIC)?;
        let hidden_raw = io::header_field(&fields, "hidden")?;
        let layer_sizes: Vec<usize> = if hidden_raw.is_empty() {
            Vec::new()
        } else {
            hidden_raw
                .split(';')
                .map(|s| s.parse().map_err(|_| Error::Format("bad hidden sizes".into())))
                .collect::<Result<_>>()?
        };
        let config = MlpConfig {
            layer_sizes,
            activation: Activation::Elu,
            learning_rate: io::parse_field(&fields, "learning_rate")?,
            batch_size: io::parse_field(&fields, "batch_size")?,
            epochs: io::parse_field(&fields, "epochs")?,
            seed: io::parse_field(&fields, "seed")?,
        };
        let layers: usize = io::parse_field(&fields, "layers")?;
        let mut weights = Vec::with_capacity(layers);
        let mut biases = Vec::with_capacity(layers);
        for _ in 0..layers {
            weights.push(io::read_mat(r)?);
            biases.push(io::read_vec1(r)?);
        }
        let loss_history = io::read_vec1(r)?.to_vec();
        Ok(MlpModel {
            weights,
            biases,
            config,
            loss_history,
        })
    }

    /// Training-curve CSV: `epoch,loss`.
    pub fn export_training_curve(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        writeln!(w, "epoch,loss")?;
        for (e, loss) in self.loss_history.iter().enumerate() {
            writeln!(w, "{e},{loss}")?;
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn small_cfg(seed: u64) -> MlpConfig {
        MlpConfig {
            layer_sizes: vec![8],
            activation: Activation::Elu,
            learning_rate: 0.05,
            batch_size: 8,
            epochs: 400,
            seed,
        }
    }

    fn random_data(n: usize, p: usize, q: usize, seed: u64) -> (Array2<f64>, Array2<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = Array2::from_shape_fn((n, p), |_| rng.random::<f64>() * 2.0 - 1.0);
        let a = Array2::from_shape_fn((p, q), |_| rng.random::<f64>() * 2.0 - 1.0);
        let y = x.dot(&a);
        (x, y)
    }

    #[test]
    fn elu_is_continuous_at_zero() {
        assert_eq!(elu(0.0), 0.0);
        assert_eq!(elu_prime(0.0), 1.0);
        assert!((elu(-1e-12) - (-1e-12)).abs() < 1e-15);
        assert!((elu_prime(-1e-12) - 1.0).abs() < 1e-10);
        assert_eq!(elu(3.5), 3.5);
        assert_relative_eq!(elu(-2.0), (-2.0f64).exp() - 1.0);
    }

    #[test]
    fn linear_target_is_learned() {
        let (x, y) = random_data(64, 3, 2, 1);
        let model = train_mlp(x.view(), y.view(), &small_cfg(7)).unwrap();
        let pred = mlp_predict(&model, x.view()).unwrap();
        let num = (&pred - &y).iter().map(|d| d * d).sum::<f64>().sqrt();
        let den = y.iter().map(|d| d * d).sum::<f64>().sqrt();
        assert!(num / den < 0.05, "relative error {}", num / den);
        assert!(model.loss_history.last().unwrap() < model.loss_history.first().unwrap());
    }

    #[test]
    fn zero_epochs_equals_initialization() {
        let (x, y) = random_data(16, 2, 1, 2);
        let mut cfg = small_cfg(5);
        cfg.epochs = 0;
        let trained = train_mlp(x.view(), y.view(), &cfg).unwrap();
        let init = init_model(2, 1, &cfg).unwrap();
        assert_eq!(trained.weights, init.weights);
        assert_eq!(trained.biases, init.biases);
        assert!(trained.loss_history.is_empty());
    }

    #[test]
    fn training_is_deterministic_per_seed() {
        let (x, y) = random_data(32, 3, 2, 3);
        let mut cfg = small_cfg(11);
        cfg.epochs = 20;
        let a = train_mlp(x.view(), y.view(), &cfg).unwrap();
        let b = train_mlp(x.view(), y.view(), &cfg).unwrap();
        assert_eq!(a.weights, b.weights);
        assert_eq!(a.loss_history, b.loss_history);
    }

    #[test]
    fn bias_only_output_for_zero_weights() {
        let cfg = small_cfg(0);
        let mut model = init_model(3, 2, &cfg).unwrap();
        for w in model.weights.iter_mut() {
            w.fill(0.0);
        }
        model.biases[0].fill(0.0);
        model.biases[1] = ndarray::array![0.5, -1.5];
        let x = Array2::from_elem((4, 3), 2.0);
        let out = mlp_predict(&model, x.view()).unwrap();
        for row in out.rows() {
            assert_eq!(row[0], 0.5);
            assert_eq!(row[1], -1.5);
        }
        // single row equals the batch row
        let one = mlp_predict(&model, x.slice(ndarray::s![..1, ..])).unwrap();
        assert_eq!(one.row(0), out.row(0));
    }

    #[test]
    fn analytic_gradients_match_central_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for trial in 0..20 {
            let p = 1 + (trial % 4);
            let q = 1 + ((trial / 4) % 4);
            let hidden = 1 + (trial % 8);
            let cfg = MlpConfig {
                layer_sizes: vec![hidden],
                activation: Activation::Elu,
                learning_rate: 0.01,
                batch_size: 4,
                epochs: 0,
                seed: rng.random(),
            };
            let x = Array2::from_shape_fn((5, p), |_| rng.random::<f64>() * 2.0 - 1.0);
            let y = Array2::from_shape_fn((5, q), |_| rng.random::<f64>() * 2.0 - 1.0);
            let mut model = init_model(p, q, &cfg).unwrap();
            let (gw, gb, _) = gradients(&model, x.view(), y.view()).unwrap();
            let step = 1e-5;
            let mut analytic = Vec::new();
            let mut numeric = Vec::new();
            for l in 0..model.weights.len() {
                let (rows, cols) = model.weights[l].dim();
                for r in 0..rows {
                    for c in 0..cols {
                        let orig = model.weights[l][[r, c]];
                        model.weights[l][[r, c]] = orig + step;
                        let up = mse_loss(&model, x.view(), y.view()).unwrap();
                        model.weights[l][[r, c]] = orig - step;
                        let down = mse_loss(&model, x.view(), y.view()).unwrap();
                        model.weights[l][[r, c]] = orig;
                        numeric.push((up - down) / (2.0 * step));
                        analytic.push(gw[l][[r, c]]);
                    }
                }
                for (idx, g) in gb[l].iter().enumerate() {
                    let orig = model.biases[l][idx];
                    model.biases[l][idx] = orig + step;
                    let up = mse_loss(&model, x.view(), y.view()).unwrap();
                    model.biases[l][idx] = orig - step;
                    let down = mse_loss(&model, x.view(), y.view()).unwrap();
                    model.biases[l][idx] = orig;
                    numeric.push((up - down) / (2.0 * step));
                    analytic.push(*g);
                }
            }
            let diff: f64 = analytic
                .iter()
                .zip(numeric.iter())
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            let scale: f64 = analytic.iter().map(|a| a * a).sum::<f64>().sqrt();
            assert!(diff / scale.max(1e-12) < 1e-4, "gradient defect {}", diff / scale);
        }
    }

    #[test]
    fn per_domain_training_and_undersized_error() {
        let (x, y) = random_data(40, 3, 1, 4);
        let assignments: Vec<usize> = (0..40).map(|i| if i < 25 { 0 } else { 1 }).collect();
        let mut cfgs = vec![small_cfg(1), small_cfg(2)];
        cfgs[0].epochs = 10;
        cfgs[1].epochs = 10;
        let models = train_per_domain(x.view(), y.view(), &assignments, &cfgs, 10).unwrap();
        assert_eq!(models.len(), 2);
        // one-domain split equals full-domain training
        let one = train_per_domain(x.view(), y.view(), &vec![0; 40], &cfgs[..1], 10).unwrap();
        let full = train_mlp(x.view(), y.view(), &cfgs[0]).unwrap();
        assert_eq!(one[0].weights, full.weights);
        assert!(matches!(
            train_per_domain(x.view(), y.view(), &assignments, &cfgs, 20),
            Err(Error::UndersizedDomain { domain: 1, .. })
        ));
    }

    #[test]
    fn checkpoint_round_trip() {
        let (x, y) = random_data(16, 2, 2, 6);
        let mut cfg = small_cfg(3);
        cfg.epochs = 5;
        let model = train_mlp(x.view(), y.view(), &cfg).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.mlp");
        model.save(&path).unwrap();
        let back = MlpModel::load(&path).unwrap();
        assert_eq!(model.weights, back.weights);
        assert_eq!(model.biases, back.biases);
        assert_eq!(model.loss_history, back.loss_history);
        assert_eq!(model.config.layer_sizes, back.config.layer_sizes);
    }
}
