//! The fit artifact: training data plus the two fitted pipelines.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use smdd_core::dataset::Dataset;
use smdd_core::io;
use smdd_core::predict::LatentPredictor;

const ARTIFACT_MAGIC: &str = "SMDD-ARTIFACT v1";

pub struct Artifact {
    pub train: Dataset,
    /// Iterative-reduction pipeline.
    pub ipca: LatentPredictor,
    /// Classical single-step PCA baseline through the same pipeline.
    pub pca: LatentPredictor,
    pub config_hash: String,
}

impl Artifact {
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        io::write_header(
            &mut w,
            ARTIFACT_MAGIC,
            &[("config_hash", self.config_hash.clone())],
        )?;
        self.train.write_to(&mut w)?;
        self.ipca.write_to(&mut w)?;
        self.pca.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Artifact> {
        let mut r = BufReader::new(
            File::open(path).with_context(|| format!("cannot open artifact {}", path.display()))?,
        );
        let fields = io::read_header(&mut r, ARTIFACT_MAGIC)?;
        let config_hash = io::header_field(&fields, "config_hash")?.to_string();
        let train = Dataset::read_from(&mut r)?;
        let ipca = LatentPredictor::read_from(&mut r)?;
        let pca = LatentPredictor::read_from(&mut r)?;
        Ok(Artifact {
            train,
            ipca,
            pca,
            config_hash,
        })
    }
}
