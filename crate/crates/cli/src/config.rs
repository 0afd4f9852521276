//! Plain-text `key = value` run configuration.
//!
//! A config file sets the keys below; command-line `--set key=value` pairs
//! override the file. Unknown keys are rejected and every numeric range is
//! validated at parse time. The canonical rendering (sorted keys) is hashed
//! into the run manifests.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use sha2::{Digest, Sha256};
use smdd_core::dataset::CaseId;
use smdd_core::decompose::DecompositionConfig;
use smdd_core::ipca::IpcaConfig;
use smdd_core::mlp::{Activation, MlpConfig};
use smdd_core::predict::{ErrorMetric, FitOptions, InverseMode, ReductionKind};

/// Benchmark method selector tokens.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    InterpIpca,
    InterpPca,
    InterpIpcaPinv,
    InterpIpcaComplement,
    MlpFull,
    MlpDomains,
}

impl Method {
    pub fn parse(s: &str) -> Result<Method> {
        Ok(match s {
            "interp-ipca" => Method::InterpIpca,
            "interp-pca" => Method::InterpPca,
            "interp-ipca-pinv" => Method::InterpIpcaPinv,
            "interp-ipca-complement" => Method::InterpIpcaComplement,
            "mlp-full" => Method::MlpFull,
            "mlp-domains" => Method::MlpDomains,
            other => bail!(
                "unknown method `{other}` (expected interp-ipca, interp-pca, \
                 interp-ipca-pinv, interp-ipca-complement, mlp-full, mlp-domains)"
            ),
        })
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Method::InterpIpca => "interp-ipca",
            Method::InterpPca => "interp-pca",
            Method::InterpIpcaPinv => "interp-ipca-pinv",
            Method::InterpIpcaComplement => "interp-ipca-complement",
            Method::MlpFull => "mlp-full",
            Method::MlpDomains => "mlp-domains",
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub case: CaseId,
    pub seed: u64,
    pub test_seed: u64,
    pub n_train: usize,
    pub n_test: usize,
    pub grid_m: usize,
    pub wave_k: f64,
    pub ipca_r: f64,
    pub ipca_s: usize,
    pub target_dim_x: usize,
    pub target_dim_y: usize,
    pub radius_mult: f64,
    pub radius: Option<f64>,
    pub gamma: f64,
    pub gamma_list: Vec<f64>,
    pub min_domain_points: usize,
    pub inverse_mode: String,
    pub knn: usize,
    pub metric: ErrorMetric,
    pub mlp_hidden: Vec<usize>,
    pub mlp_lr: f64,
    pub mlp_domain_lrs: Vec<f64>,
    pub mlp_batch: usize,
    pub mlp_epochs: usize,
    pub mlp_seed: u64,
    pub methods: Vec<Method>,
    pub record_timing: bool,
    pub export_csv: bool,
    pub out_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            case: CaseId::Case1,
            seed: 11,
            test_seed: 12,
            n_train: 1000,
            n_test: 200,
            grid_m: 2048,
            wave_k: 90.0,
            ipca_r: 0.9,
            ipca_s: 1,
            target_dim_x: 1,
            target_dim_y: 1,
            radius_mult: 3.0,
            radius: None,
            gamma: 4.0,
            gamma_list: vec![1.0, 1.5, 2.0, 3.0, 4.0, 14.0],
            min_domain_points: 100,
            inverse_mode: "none".to_string(),
            knn: 1,
            metric: ErrorMetric::RelativeL2,
            mlp_hidden: vec![10],
            mlp_lr: 5.33e-6,
            mlp_domain_lrs: vec![3.55e-5],
            mlp_batch: 10,
            mlp_epochs: 2000,
            mlp_seed: 7,
            methods: vec![
                Method::InterpIpca,
                Method::InterpPca,
                Method::MlpFull,
                Method::MlpDomains,
            ],
            record_timing: true,
            export_csv: false,
            out_dir: PathBuf::from("out"),
        }
    }
}

impl RunConfig {
    pub fn from_file(path: &Path, overrides: &[String]) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        let mut cfg = RunConfig::default();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {}: expected `key = value`", lineno + 1))?;
            cfg.apply(key.trim(), value.trim())
                .with_context(|| format!("config line {}", lineno + 1))?;
        }
        for pair in overrides {
            let (key, value) = pair
                .split_once('=')
                .ok_or_else(|| anyhow!("--set expects key=value, got `{pair}`"))?;
            cfg.apply(key.trim(), value.trim())
                .with_context(|| format!("--set {pair}"))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn apply(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "case" => {
                self.case = CaseId::parse(value).map_err(|e| anyhow!("{e}"))?;
            }
            "seed" => self.seed = value.parse()?,
            "test_seed" => self.test_seed = value.parse()?,
            "n_train" => self.n_train = value.parse()?,
            "n_test" => self.n_test = value.parse()?,
            "grid_m" => self.grid_m = value.parse()?,
            "wave_k" => self.wave_k = value.parse()?,
            "ipca_r" => self.ipca_r = value.parse()?,
            "ipca_s" => self.ipca_s = value.parse()?,
            "target_dim_x" => self.target_dim_x = value.parse()?,
            "target_dim_y" => self.target_dim_y = value.parse()?,
            "radius_mult" => self.radius_mult = value.parse()?,
            "radius" => self.radius = Some(value.parse()?),
            "gamma" => self.gamma = value.parse()?,
            "gamma_list" => {
                self.gamma_list = parse_list(value)?;
            }
            "min_domain_points" => self.min_domain_points = value.parse()?,
            "inverse_mode" => {
                if !["none", "pinv", "complement"].contains(&value) {
                    bail!("inverse_mode must be none, pinv or complement");
                }
                self.inverse_mode = value.to_string();
            }
            "knn" => self.knn = value.parse()?,
            "metric" => {
                self.metric = match value {
                    "rel-l2" => ErrorMetric::RelativeL2,
                    "linf" => ErrorMetric::LInfty,
                    _ => bail!("metric must be rel-l2 or linf"),
                };
            }
            "mlp_hidden" => {
                self.mlp_hidden = value
                    .split(';')
                    .map(|s| s.trim().parse::<usize>().map_err(|e| anyhow!("{e}")))
                    .collect::<Result<_>>()?;
            }
            "mlp_lr" => self.mlp_lr = value.parse()?,
            "mlp_domain_lrs" => {
                self.mlp_domain_lrs = parse_list(value)?;
            }
            "mlp_batch" => self.mlp_batch = value.parse()?,
            "mlp_epochs" => self.mlp_epochs = value.parse()?,
            "mlp_seed" => self.mlp_seed = value.parse()?,
            "methods" => {
                self.methods = value
                    .split(',')
                    .map(|s| Method::parse(s.trim()))
                    .collect::<Result<_>>()?;
            }
            "record_timing" => self.record_timing = parse_bool(value)?,
            "export_csv" => self.export_csv = parse_bool(value)?,
            "out_dir" => self.out_dir = PathBuf::from(value),
            other => bail!("unknown config key `{other}`"),
        }
        Ok(())
    }

    fn validate(&self) -> Result<()> {
        if self.n_train < 2 {
            bail!("n_train must be at least 2");
        }
        if self.n_test < 1 {
            bail!("n_test must be at least 1");
        }
        if self.grid_m < 2 {
            bail!("grid_m must be at least 2");
        }
        if !(self.wave_k > 0.0) {
            bail!("wave_k must be positive");
        }
        if !(self.ipca_r > 0.0 && self.ipca_r <= 1.0) {
            bail!("ipca_r must be in (0, 1]");
        }
        if self.ipca_s < 1 {
            bail!("ipca_s must be at least 1");
        }
        if !(self.radius_mult > 0.0) {
            bail!("radius_mult must be positive");
        }
        if let Some(r) = self.radius {
            if !(r > 0.0) {
                bail!("radius must be positive");
            }
        }
        if !(self.gamma > 0.0) || self.gamma_list.iter().any(|&g| !(g > 0.0)) {
            bail!("gamma values must be positive");
        }
        if self.min_domain_points < 2 {
            bail!("min_domain_points must be at least 2");
        }
        if self.knn < 1 {
            bail!("knn must be at least 1");
        }
        if self.mlp_hidden.contains(&0) {
            bail!("mlp_hidden sizes must be positive");
        }
        if !(self.mlp_lr > 0.0) || self.mlp_domain_lrs.iter().any(|&l| !(l > 0.0)) {
            bail!("learning rates must be positive");
        }
        if self.mlp_batch < 1 {
            bail!("mlp_batch must be at least 1");
        }
        if self.target_dim_x == 0 || self.target_dim_y == 0 {
            bail!("target dimensions must be at least 1");
        }
        Ok(())
    }

    pub fn inverse_mode(&self) -> InverseMode {
        match self.inverse_mode.as_str() {
            "pinv" => InverseMode::PseudoInverse,
            "complement" => InverseMode::Complement(self.knn),
            _ => InverseMode::None,
        }
    }

    pub fn fit_options(&self, reduction: ReductionKind) -> FitOptions {
        FitOptions {
            ipca_x: IpcaConfig::new(self.target_dim_x, self.ipca_r, self.ipca_s),
            ipca_y: IpcaConfig::new(self.target_dim_y, self.ipca_r, self.ipca_s),
            reduction,
            radius_multiplier: self.radius_mult,
            radius_override: self.radius,
            decomposition: DecompositionConfig {
                gamma: self.gamma,
                min_points_per_domain: self.min_domain_points,
            },
            inverse_mode: self.inverse_mode(),
        }
    }

    pub fn mlp_config(&self, lr: f64, seed_offset: u64) -> MlpConfig {
        MlpConfig {
            layer_sizes: self.mlp_hidden.clone(),
            activation: Activation::Elu,
            learning_rate: lr,
            batch_size: self.mlp_batch,
            epochs: self.mlp_epochs,
            seed: self.mlp_seed.wrapping_add(seed_offset),
        }
    }

    /// Per-domain learning rates: the configured list, or the single value
    /// broadcast over `domains`.
    pub fn domain_lrs(&self, domains: usize) -> Result<Vec<f64>> {
        if self.mlp_domain_lrs.len() == domains {
            return Ok(self.mlp_domain_lrs.clone());
        }
        if self.mlp_domain_lrs.len() == 1 {
            return Ok(vec![self.mlp_domain_lrs[0]; domains]);
        }
        bail!(
            "mlp_domain_lrs has {} entries but the decomposition produced {} domains",
            self.mlp_domain_lrs.len(),
            domains
        )
    }

    /// Canonical sorted `key = value` rendering.
    pub fn canonical(&self) -> String {
        let mut map = BTreeMap::new();
        map.insert("case", self.case.as_str().to_string());
        map.insert("seed", self.seed.to_string());
        map.insert("test_seed", self.test_seed.to_string());
        map.insert("n_train", self.n_train.to_string());
        map.insert("n_test", self.n_test.to_string());
        map.insert("grid_m", self.grid_m.to_string());
        map.insert("wave_k", format!("{}", self.wave_k));
        map.insert("ipca_r", format!("{}", self.ipca_r));
        map.insert("ipca_s", self.ipca_s.to_string());
        map.insert("target_dim_x", self.target_dim_x.to_string());
        map.insert("target_dim_y", self.target_dim_y.to_string());
        map.insert("radius_mult", format!("{}", self.radius_mult));
        map.insert(
            "radius",
            self.radius.map(|r| format!("{r}")).unwrap_or_else(|| "auto".into()),
        );
        map.insert("gamma", format!("{}", self.gamma));
        map.insert("gamma_list", join_list(&self.gamma_list));
        map.insert("min_domain_points", self.min_domain_points.to_string());
        map.insert("inverse_mode", self.inverse_mode.clone());
        map.insert("knn", self.knn.to_string());
        map.insert(
            "metric",
            match self.metric {
                ErrorMetric::RelativeL2 => "rel-l2".to_string(),
                ErrorMetric::LInfty => "linf".to_string(),
            },
        );
        map.insert(
            "mlp_hidden",
            self.mlp_hidden
                .iter()
                .map(|s| s.to_string())
                .collect::<Vec<_>>()
                .join(";"),
        );
        map.insert("mlp_lr", format!("{}", self.mlp_lr));
        map.insert("mlp_domain_lrs", join_list(&self.mlp_domain_lrs));
        map.insert("mlp_batch", self.mlp_batch.to_string());
        map.insert("mlp_epochs", self.mlp_epochs.to_string());
        map.insert("mlp_seed", self.mlp_seed.to_string());
        map.insert(
            "methods",
            self.methods
                .iter()
                .map(|m| m.as_str())
                .collect::<Vec<_>>()
                .join(","),
        );
        map.insert("record_timing", self.record_timing.to_string());
        map.insert("export_csv", self.export_csv.to_string());
        // out_dir is deliberately absent: the hash identifies the
        // experiment, not where its files land
        let mut out = String::new();
        for (k, v) in map {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }

    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.canonical().as_bytes());
        let mut out = String::new();
        for b in digest.iter().take(16) {
            let _ = write!(out, "{b:02x}");
        }
        out
    }
}

fn parse_list(value: &str) -> Result<Vec<f64>> {
    value
        .split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|e| anyhow!("{e}")))
        .collect()
}

fn join_list(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| format!("{v}"))
        .collect::<Vec<_>>()
        .join(",")
}

fn parse_bool(value: &str) -> Result<bool> {
    match value {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => bail!("expected a boolean, got `{value}`"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_cfg(dir: &tempfile::TempDir, body: &str) -> PathBuf {
        let path = dir.path().join("run.cfg");
        std::fs::write(&path, body).unwrap();
        path
    }

    #[test]
    fn parses_and_overrides() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_cfg(
            &dir,
            "case = case1\nseed = 5\nn_train = 50\nn_test = 10\ngamma = 2.5\n# comment\n",
        );
        let cfg = RunConfig::from_file(&path, &["seed=9".into()]).unwrap();
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.n_train, 50);
        assert_eq!(cfg.gamma, 2.5);
    }

    #[test]
    fn unknown_keys_and_bad_ranges_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let bad_key = write_cfg(&dir, "no_such_key = 1\n");
        assert!(RunConfig::from_file(&bad_key, &[]).is_err());
        let bad_range = write_cfg(&dir, "ipca_r = 1.5\n");
        assert!(RunConfig::from_file(&bad_range, &[]).is_err());
        let bad_gamma = write_cfg(&dir, "gamma = -1\n");
        assert!(RunConfig::from_file(&bad_gamma, &[]).is_err());
    }

    #[test]
    fn hash_tracks_content() {
        let dir = tempfile::tempdir().unwrap();
        let a = RunConfig::from_file(&write_cfg(&dir, "seed = 1\n"), &[]).unwrap();
        let b = RunConfig::from_file(&write_cfg(&dir, "seed = 2\n"), &[]).unwrap();
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash(), a.hash());
    }
}
