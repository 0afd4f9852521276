//! Acceptance suite: one test per gate criterion, each printing a PASS line.
//!
//! The benchmark seeds and scales are fixed; every tolerance is asserted at
//! the stated value. Run with `cargo test --test acceptance -- --nocapture`
//! to see the per-criterion lines.

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use ndarray::{Array1, Array2};
use num_complex::Complex64;
use smdd_core::dataset::{sample_case1_with_grid, sample_case2, solve_transport, Dataset};
use smdd_core::decompose::{cross_magnitude, lissda, DecompositionConfig};
use smdd_core::ipca::{fit_ipca, IpcaConfig};
use smdd_core::mlp::{gradients, init_model, mse_loss, train_mlp, train_per_domain, Activation, MlpConfig};
use smdd_core::predict::{
    fit_predictor, weighted_error, ErrorMetric, FitOptions, InverseMode, ReductionKind,
};

const BENCH_SEED: u64 = 1;

fn case1_train() -> Dataset {
    sample_case1_with_grid(1000, BENCH_SEED, 2048).expect("case-1 training generation")
}

fn case1_test() -> Dataset {
    sample_case1_with_grid(200, BENCH_SEED + 1, 2048).expect("case-1 test generation")
}

fn case1_options() -> FitOptions {
    FitOptions {
        decomposition: DecompositionConfig {
            gamma: 4.0,
            min_points_per_domain: 100,
        },
        ..FitOptions::default()
    }
}

fn row_rel_error(a: ndarray::ArrayView1<'_, f64>, b: ndarray::ArrayView1<'_, f64>) -> f64 {
    let num: f64 = a
        .iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt();
    let den: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    num / den
}

fn budget(name: &str, started: Instant, seconds: f64) {
    let elapsed = started.elapsed().as_secs_f64();
    assert!(
        elapsed < seconds,
        "{name} took {elapsed:.1}s, budget {seconds}s"
    );
}

/// Criterion 1: the complement route reproduces every case-1 training row.
#[test]
fn a01_complement_round_trip_on_training_data() {
    let train = case1_train();
    let started = Instant::now();
    let proj = fit_ipca(train.x.view(), &IpcaConfig::new(1, 0.9, 1)).unwrap();
    let reduced = proj.project(train.x.view()).unwrap();
    let rec = proj.complement_reconstruct(reduced.view(), 1).unwrap();
    let mut worst = 0.0f64;
    for i in 0..train.n() {
        worst = worst.max(row_rel_error(rec.row(i), train.x.row(i)));
    }
    assert!(worst <= 1e-8, "worst row relative error {worst:e}");
    budget("complement round trip", started, 5.0);
    println!("[acceptance] 01 complement round trip (n=1000, p=6->1, worst {worst:.2e}): PASS");
}

/// Criterion 2: reconstruction residual energy equals the discarded spectrum.
#[test]
fn a02_pseudo_inverse_energy_identity() {
    let test = case1_test();
    let started = Instant::now();
    assert_eq!(test.x.dim(), (200, 6));
    let proj = fit_ipca(test.x.view(), &IpcaConfig::new(1, 0.9, 1)).unwrap();
    let rec = proj
        .pinv_reconstruct(proj.project(test.x.view()).unwrap().view())
        .unwrap();
    let resid: f64 = (&rec - &test.x).iter().map(|v| v * v).sum();
    let discarded: f64 = proj
        .steps
        .iter()
        .map(|st| {
            st.singular_values
                .iter()
                .skip(st.kept_dim())
                .map(|&s| s * s)
                .sum::<f64>()
        })
        .sum();
    let rel = (resid - discarded).abs() / discarded;
    assert!(rel <= 1e-6, "relative defect {rel:e}");
    budget("energy identity", started, 1.0);
    println!("[acceptance] 02 pseudo-inverse energy identity (defect {rel:.2e}): PASS");
}

/// Criterion 3: solver matches the constant-coefficient closed form at
/// M = 2048 and converges at first order when M doubles.
#[test]
fn a03_solver_oracle_and_first_order_convergence() {
    let started = Instant::now();
    let solve_err = |nodes: usize| -> f64 {
        let grid: Vec<f64> = (0..nodes)
            .map(|i| i as f64 / (nodes as f64 - 1.0))
            .collect();
        let g: Vec<Complex64> = grid
            .iter()
            .map(|&x| Complex64::new(0.0, 50.0 * x).exp())
            .collect();
        let y = solve_transport(&vec![0.5; nodes], 90.0, &g).unwrap();
        // closed form y(x) = A (e^{i 50 x} - e^{i 180 x}), A = 1/(25i - 90i)
        let a = Complex64::new(0.0, 50.0 * 0.5 - 90.0);
        let mut num = 0.0;
        let mut den = 0.0;
        for (i, &x) in grid.iter().enumerate() {
            let exact = (Complex64::new(0.0, 50.0 * x).exp()
                - Complex64::new(0.0, 180.0 * x).exp())
                / a;
            num += (y[i] - exact).norm_sqr();
            den += exact.norm_sqr();
        }
        (num / den).sqrt()
    };
    let e2048 = solve_err(2048);
    let e4096 = solve_err(4096);
    assert!(e2048 < 1e-2, "relative L2 error {e2048:e} at M=2048");
    let ratio = e2048 / e4096;
    assert!(
        (1.7..=2.3).contains(&ratio),
        "convergence ratio {ratio} outside [1.7, 2.3]"
    );
    budget("solver oracle", started, 1.0);
    println!(
        "[acceptance] 03 solver oracle (err {e2048:.2e} at M=2048, ratio {ratio:.3}): PASS"
    );
}

/// Criterion 4: stretch correctness on the case-1 pipeline.
#[test]
fn a04_stretch_correctness() {
    let train = case1_train();
    let started = Instant::now();
    let pred = fit_predictor(&train, &case1_options()).unwrap();
    let sm = &pred.sm;
    for w in sm.points.windows(2) {
        assert!(w[1][0] >= w[0][0] - 1e-12, "x_bar not non-decreasing");
    }
    for (stretched, source) in sm.points.iter().zip(sm.source.points.iter()) {
        assert_eq!(stretched[1].to_bits(), source[1].to_bits(), "y_bar != y_tilde");
    }
    for b in &sm.branches {
        for pos in b.start..b.end {
            let dxb = (sm.points[pos + 1][0] - sm.points[pos][0]).abs();
            let dxt = (sm.source.points[pos + 1][0] - sm.source.points[pos][0]).abs();
            assert!(
                (dxb - dxt).abs() <= 1e-12 * (1.0 + dxt),
                "branch isometry violated at {pos}"
            );
        }
    }
    let unstretched = sm.unstretch();
    for (orig, rec) in sm.source.points.iter().zip(unstretched.iter()) {
        let scale = 1.0f64.max(orig[0].abs());
        assert!(
            (orig[0] - rec[0]).abs() <= 1e-12 * scale,
            "round trip defect {}",
            (orig[0] - rec[0]).abs()
        );
    }
    budget("stretch correctness", started, 5.0);
    println!(
        "[acceptance] 04 stretch correctness ({} turning points, {} branches): PASS",
        sm.turning_points.len(),
        sm.branches.len()
    );
}

/// Criterion 5: decomposition structure and the gamma sweep trend.
#[test]
fn a05_lissda_structure_and_gamma_sweep() {
    let train = case1_train();
    let started = Instant::now();
    let pred = fit_predictor(&train, &case1_options()).unwrap();
    let n_points = pred.sm.points.len();
    let mut counts = Vec::new();
    for gamma in [1.0, 1.5, 2.0, 3.0, 4.0, 14.0] {
        let dec = lissda(
            &pred.sm,
            &DecompositionConfig {
                gamma,
                min_points_per_domain: 100,
            },
        )
        .unwrap();
        assert!(dec.tiling_is_exact(n_points), "tiling broken at gamma {gamma}");
        for w in dec.segments.windows(2) {
            assert_eq!(w[0].end, w[1].start, "overlap is not a single point");
        }
        // every tested triple satisfies the threshold
        for seg in &dec.raw_segments {
            let anchor = pred.sm.points[seg.start];
            for i in seg.start + 2..=seg.end {
                assert!(
                    cross_magnitude(anchor, pred.sm.points[i - 1], pred.sm.points[i])
                        <= dec.epsilon,
                    "predicate violated inside a segment"
                );
            }
        }
        counts.push(dec.domain_count());
    }
    assert!(
        counts.windows(2).all(|w| w[0] >= w[1]),
        "domain counts not non-increasing: {counts:?}"
    );
    assert!(counts[0] >= 4, "sweep should start at >= 4 domains: {counts:?}");
    assert!(
        *counts.last().unwrap() <= 3,
        "sweep should end at <= 3 domains: {counts:?}"
    );
    budget("decomposition sweep", started, 10.0);
    println!("[acceptance] 05 decomposition structure (gamma sweep {counts:?}): PASS");
}

/// Criterion 6: the full predict pipeline with the complement inverse is
/// exact on deduplicated training knots, for case 1 and a case-2 smoke set.
#[test]
fn a06_latent_pipeline_exactness() {
    let started = Instant::now();
    let train1 = case1_train();
    let mut opts = case1_options();
    opts.inverse_mode = InverseMode::Complement(1);
    let pred1 = fit_predictor(&train1, &opts).unwrap();
    let raw_y1 = train1.raw_y();
    let mut worst1 = 0.0f64;
    for row in pred1.deduplicated_training_rows() {
        let p = pred1.predict_row(train1.x.row(row)).unwrap();
        worst1 = worst1.max(row_rel_error(p.y.view(), raw_y1.row(row)));
    }
    assert!(worst1 <= 1e-6, "case-1 worst knot error {worst1:e}");

    let train2 = sample_case2(200, 64, 90.0, BENCH_SEED).unwrap();
    let opts2 = FitOptions {
        decomposition: DecompositionConfig {
            gamma: 2.0,
            min_points_per_domain: 20,
        },
        inverse_mode: InverseMode::Complement(1),
        ..FitOptions::default()
    };
    let pred2 = fit_predictor(&train2, &opts2).unwrap();
    let raw_y2 = train2.raw_y();
    let mut worst2 = 0.0f64;
    for row in pred2.deduplicated_training_rows() {
        let p = pred2.predict_row(train2.x.row(row)).unwrap();
        worst2 = worst2.max(row_rel_error(p.y.view(), raw_y2.row(row)));
    }
    assert!(worst2 <= 1e-6, "case-2 worst knot error {worst2:e}");
    budget("pipeline exactness", started, 30.0);
    println!(
        "[acceptance] 06 latent pipeline exactness (case-1 {worst1:.2e}, case-2 {worst2:.2e}): PASS"
    );
}

/// Criterion 7: desk-scale analogue of the scalar-output comparison table.
#[test]
fn a07_case1_benchmark_band_and_reduction_comparison() {
    let started = Instant::now();
    let train = case1_train();
    let test = case1_test();
    let ipca = fit_predictor(&train, &case1_options()).unwrap();
    let pca = fit_predictor(
        &train,
        &FitOptions {
            reduction: ReductionKind::SingleStepPca,
            ..case1_options()
        },
    )
    .unwrap();
    let rep_ipca = ipca.evaluate(&test, ErrorMetric::RelativeL2).unwrap();
    let rep_pca = pca.evaluate(&test, ErrorMetric::RelativeL2).unwrap();
    let mean = rep_ipca.mean_relative_error;
    assert!(
        (0.2..=5.0).contains(&mean),
        "interpolant mean relative error {mean} outside [0.2, 5.0]"
    );
    assert!(
        rep_ipca.mean_relative_error <= rep_pca.mean_relative_error,
        "iterative reduction ({}) should not trail the single-step baseline ({})",
        rep_ipca.mean_relative_error,
        rep_pca.mean_relative_error
    );
    budget("case-1 benchmark", started, 120.0);
    println!(
        "[acceptance] 07 case-1 benchmark (iPCA {mean:.4}, PCA {:.4}): PASS",
        rep_pca.mean_relative_error
    );
}

/// Criterion 8: reduced-size analogue of the vector-output comparison table.
#[test]
fn a08_case2_reduced_benchmark() {
    let started = Instant::now();
    let train = sample_case2(300, 256, 90.0, BENCH_SEED).unwrap();
    let test = sample_case2(60, 256, 90.0, BENCH_SEED + 1).unwrap();
    let opts = FitOptions {
        decomposition: DecompositionConfig {
            gamma: 2.0,
            min_points_per_domain: 30,
        },
        inverse_mode: InverseMode::Complement(1),
        ..FitOptions::default()
    };
    let pred = fit_predictor(&train, &opts).unwrap();
    let pca = fit_predictor(
        &train,
        &FitOptions {
            reduction: ReductionKind::SingleStepPca,
            ..opts.clone()
        },
    )
    .unwrap();
    let rep_pinv = pred
        .evaluate_with_mode(&test, ErrorMetric::RelativeL2, InverseMode::PseudoInverse)
        .unwrap();
    let rep_comp = pred
        .evaluate_with_mode(&test, ErrorMetric::RelativeL2, InverseMode::Complement(1))
        .unwrap();
    let rep_pca = pca
        .evaluate_with_mode(&test, ErrorMetric::RelativeL2, InverseMode::PseudoInverse)
        .unwrap();
    for (name, rep) in [("pinv", &rep_pinv), ("complement", &rep_comp), ("pca", &rep_pca)] {
        assert!(
            rep.mean_relative_error.is_finite(),
            "{name} error not finite"
        );
        // the weighted error identity against hand aggregation
        let hand = weighted_error(&rep.per_domain, test.n());
        assert_eq!(
            rep.weighted_error.to_bits(),
            hand.to_bits(),
            "{name}: R_w differs from hand aggregation"
        );
        let n_sum: usize = rep.per_domain.iter().map(|d| d.n_test).sum();
        assert_eq!(n_sum, test.n(), "{name}: domains do not partition the test set");
    }

    // MLP baselines: finite errors for the full domain and for the
    // per-domain split aggregated with the weighted formula
    let mlp_cfg = MlpConfig {
        layer_sizes: vec![64],
        activation: Activation::Elu,
        learning_rate: 3e-5,
        batch_size: 20,
        epochs: 150,
        seed: 7,
    };
    let full = train_mlp(train.x.view(), train.y.view(), &mlp_cfg).unwrap();
    let raw_test_y = test.raw_y();
    let raw_test_x = test.raw_x();
    let mut x_std = Array2::zeros(raw_test_x.dim());
    for j in 0..raw_test_x.ncols() {
        for i in 0..raw_test_x.nrows() {
            x_std[[i, j]] = (raw_test_x[[i, j]] - pred.x_mean[j]) / pred.x_std[j];
        }
    }
    let full_out = smdd_core::mlp::mlp_predict(&full, x_std.view()).unwrap();
    let mut full_errs = Vec::new();
    for i in 0..test.n() {
        let y_hat = Array1::from_shape_fn(pred.q, |j| {
            full_out[[i, j]] * pred.y_std[j] + pred.y_mean[j]
        });
        full_errs.push(row_rel_error(y_hat.view(), raw_test_y.row(i)));
    }
    let full_mean = full_errs.iter().sum::<f64>() / full_errs.len() as f64;
    assert!(full_mean.is_finite(), "full-domain MLP error not finite");

    let assignments = pred.training_domain_assignments().unwrap();
    let domains = pred.dec.domain_count();
    let configs: Vec<MlpConfig> = (0..domains)
        .map(|d| MlpConfig {
            seed: 7 + d as u64 + 1,
            ..mlp_cfg.clone()
        })
        .collect();
    let models = train_per_domain(train.x.view(), train.y.view(), &assignments, &configs, 29).unwrap();
    let mut per_domain_errs: Vec<Vec<f64>> = vec![Vec::new(); domains];
    for i in 0..test.n() {
        let d = pred.classify_domain(x_std.row(i)).unwrap();
        let out = smdd_core::mlp::mlp_predict(&models[d], x_std.row(i).insert_axis(ndarray::Axis(0)))
            .unwrap();
        let y_hat =
            Array1::from_shape_fn(pred.q, |j| out[[0, j]] * pred.y_std[j] + pred.y_mean[j]);
        per_domain_errs[d].push(row_rel_error(y_hat.view(), raw_test_y.row(i)));
    }
    let per_domain: Vec<smdd_core::predict::DomainError> = per_domain_errs
        .iter()
        .enumerate()
        .filter(|(_, e)| !e.is_empty())
        .map(|(d, e)| smdd_core::predict::DomainError {
            domain: d,
            n_test: e.len(),
            mean_error: e.iter().sum::<f64>() / e.len() as f64,
        })
        .collect();
    let rw = weighted_error(&per_domain, test.n());
    assert!(rw.is_finite(), "per-domain weighted MLP error not finite");
    budget("case-2 benchmark", started, 900.0);
    println!(
        "[acceptance] 08 case-2 reduced benchmark (pinv {:.4}, complement {:.4}, pca {:.4}, mlp-full {full_mean:.4}, mlp-weighted {rw:.4}): PASS",
        rep_pinv.mean_relative_error, rep_comp.mean_relative_error, rep_pca.mean_relative_error
    );
}

/// Criterion 9: analytic gradients match central finite differences over
/// 100 randomized small networks.
#[test]
fn a09_mlp_gradient_check() {
    use rand::{Rng, SeedableRng};
    let started = Instant::now();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4242);
    for trial in 0..100 {
        let p = 1 + rng.random_range(0..4usize);
        let q = 1 + rng.random_range(0..4usize);
        let hidden = 1 + rng.random_range(0..8usize);
        let cfg = MlpConfig {
            layer_sizes: vec![hidden],
            activation: Activation::Elu,
            learning_rate: 0.01,
            batch_size: 4,
            epochs: 0,
            seed: rng.random(),
        };
        let x = Array2::from_shape_fn((6, p), |_| rng.random::<f64>() * 2.0 - 1.0);
        let y = Array2::from_shape_fn((6, q), |_| rng.random::<f64>() * 2.0 - 1.0);
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
        assert!(
            diff / scale.max(1e-12) <= 1e-4,
            "trial {trial}: gradient defect {}",
            diff / scale
        );
    }
    budget("gradient check", started, 10.0);
    println!("[acceptance] 09 MLP gradient check (100 randomized trials): PASS");
}

/// Criterion 10: two end-to-end CLI runs with one config produce
/// byte-identical CSV outputs.
#[test]
fn a10_end_to_end_determinism() {
    let started = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("run.cfg");
    std::fs::write(
        &cfg_path,
        "case = case1\nseed = 1\ntest_seed = 2\nn_train = 1000\nn_test = 200\n\
         grid_m = 2048\ngamma = 4\nmin_domain_points = 100\n\
         methods = interp-ipca,interp-pca,mlp-full\nmlp_epochs = 150\nmlp_lr = 5.33e-6\n\
         record_timing = false\nexport_csv = true\n",
    )
    .unwrap();
    let run = |out: &Path| {
        let bin = env!("CARGO_BIN_EXE_smdd");
        for args in [
            vec!["generate"],
            vec!["fit", "--train", "train.ds"],
            vec![
                "evaluate",
                "--artifact",
                "predictor.art",
                "--test",
                "test.ds",
            ],
        ] {
            let mut cmd = Command::new(bin);
            cmd.arg(args[0])
                .arg("--config")
                .arg(&cfg_path)
                .arg("--out-dir")
                .arg(out);
            for extra in args[1..].chunks(2) {
                cmd.arg(extra[0]).arg(out.join(extra[1]));
            }
            let status = cmd.status().expect("spawning the pipeline binary");
            assert!(status.success(), "{args:?} failed");
        }
    };
    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    run(&out_a);
    run(&out_b);
    let mut compared = 0;
    for name in [
        "train.csv",
        "test.csv",
        "benchmark.csv",
        "per_domain.csv",
        "evr_report.csv",
        "gamma_sweep.csv",
        "segments.csv",
        "stretched.csv",
        "triangulation.csv",
        "train.ds",
        "test.ds",
        "predictor.art",
    ] {
        let a = std::fs::read(out_a.join(name)).unwrap_or_else(|_| panic!("missing {name}"));
        let b = std::fs::read(out_b.join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between runs");
        compared += 1;
    }
    budget("determinism", started, 240.0);
    println!("[acceptance] 10 end-to-end determinism ({compared} files byte-equal): PASS");
}
