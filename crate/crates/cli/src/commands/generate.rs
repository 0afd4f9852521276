use anyhow::{Context, Result};
use log::info;

use crate::commands::{generate_dataset, write_manifest};
use crate::config::RunConfig;

pub fn run(cfg: &RunConfig) -> Result<()> {
    std::fs::create_dir_all(&cfg.out_dir)
        .with_context(|| format!("creating {}", cfg.out_dir.display()))?;
    let train = generate_dataset(cfg, cfg.n_train, cfg.seed)?;
    let test = generate_dataset(cfg, cfg.n_test, cfg.test_seed)?;
    let train_path = cfg.out_dir.join("train.ds");
    let test_path = cfg.out_dir.join("test.ds");
    train.save(&train_path)?;
    test.save(&test_path)?;
    if cfg.export_csv {
        train.export_csv(&cfg.out_dir.join("train.csv"))?;
        test.export_csv(&cfg.out_dir.join("test.csv"))?;
    }
    info!(
        "wrote {} ({}x{} -> {}x{}) and {} ({} rows)",
        train_path.display(),
        train.n(),
        train.p(),
        train.n(),
        train.q(),
        test_path.display(),
        test.n()
    );
    write_manifest(
        &cfg.out_dir,
        "generate",
        cfg,
        &[
            ("train_shape", format!("{}x{}+{}x{}", train.n(), train.p(), train.n(), train.q())),
            ("test_shape", format!("{}x{}+{}x{}", test.n(), test.p(), test.n(), test.q())),
        ],
    )?;
    Ok(())
}
