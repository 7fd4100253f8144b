//! Run manifests: what was run, on which data, and how long it took.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant, SystemTime, UNIX_EPOCH};

use bddsat::search::LearnConfig;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::{io_err, write_json, CliError};

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub config: LearnConfig,
    pub dataset: PathBuf,
    /// SHA-256 of the dataset file.
    pub dataset_sha256: String,
    pub solver_seconds: f64,
    pub total_seconds: f64,
    pub outputs: Vec<PathBuf>,
    /// Seconds since the Unix epoch.
    pub finished_at: u64,
}

impl RunManifest {
    pub fn new(
        command: &str,
        config: &LearnConfig,
        dataset: &Path,
        start: Instant,
        solver: Duration,
        outputs: Vec<PathBuf>,
    ) -> Result<Self, CliError> {
        let bytes = fs::read(dataset).map_err(|e| io_err(dataset, e))?;
        Ok(RunManifest {
            command: command.to_owned(),
            version: env!("CARGO_PKG_VERSION").to_owned(),
            config: config.clone(),
            dataset: dataset.to_path_buf(),
            dataset_sha256: hex::encode(Sha256::digest(&bytes)),
            solver_seconds: solver.as_secs_f64(),
            total_seconds: start.elapsed().as_secs_f64(),
            outputs,
            finished_at: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map_or(0, |d| d.as_secs()),
        })
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        write_json(path, self)
    }
}
