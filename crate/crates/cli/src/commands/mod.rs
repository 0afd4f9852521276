pub mod evaluate;
pub mod fit;
pub mod generate;
pub mod plot;
pub mod sweep;

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{Context, Result};
use smdd_core::dataset::{
    sample_case1_with_grid, sample_case2, CaseId, Dataset, TransportConfig,
};

use crate::config::RunConfig;

/// Deterministic run manifest: config hash, seeds, then per-command facts.
pub fn write_manifest(
    dir: &Path,
    command: &str,
    cfg: &RunConfig,
    extras: &[(&str, String)],
) -> Result<()> {
    let mut out = String::new();
    let _ = writeln!(out, "command = {command}");
    let _ = writeln!(out, "config_hash = {}", cfg.hash());
    let _ = writeln!(out, "seed = {}", cfg.seed);
    let _ = writeln!(out, "test_seed = {}", cfg.test_seed);
    for (k, v) in extras {
        let _ = writeln!(out, "{k} = {v}");
    }
    let path = dir.join(format!("manifest_{command}.txt"));
    std::fs::write(&path, out).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

pub fn generate_dataset(cfg: &RunConfig, n: usize, seed: u64) -> Result<Dataset> {
    let transport = TransportConfig {
        grid_size: cfg.grid_m,
        wave_number: cfg.wave_k,
        case_id: cfg.case,
    };
    transport.validate()?;
    let ds = match transport.case_id {
        CaseId::Case1 => sample_case1_with_grid(n, seed, transport.grid_size)?,
        CaseId::Case2 => sample_case2(n, transport.grid_size, transport.wave_number, seed)?,
    };
    Ok(ds)
}
