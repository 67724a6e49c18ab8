//! Optional JSON config file: any flag may be supplied there; explicit
//! command-line flags win.

use anyhow::{Context, Result};
use serde::Deserialize;
use std::path::{Path, PathBuf};

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub problem: Option<String>,
    pub d: Option<Vec<usize>>,
    pub eps: Option<Vec<f64>>,
    pub seed: Option<u64>,
    pub seeds: Option<Vec<u64>>,
    pub best_of: Option<usize>,
    pub p: Option<f64>,
    pub quad_points: Option<usize>,
    pub out: Option<PathBuf>,
    pub t: Option<f64>,
    pub scale: Option<f64>,
    pub jobs: Option<usize>,
}

pub fn load(path: Option<&Path>) -> Result<FileConfig> {
    match path {
        None => Ok(FileConfig::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .with_context(|| format!("reading config {}", p.display()))?;
            serde_json::from_str(&text).with_context(|| format!("parsing config {}", p.display()))
        }
    }
}

/// Default seed: `NETFORGE_SEED` when set, else 0.
pub fn env_seed() -> u64 {
    std::env::var("NETFORGE_SEED").ok().and_then(|s| s.parse().ok()).unwrap_or(0)
}
