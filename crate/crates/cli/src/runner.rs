//! Runs experiments and writes results, tables and manifests.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use parabolic_hardy::verify::{self, Outcome};
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;

#[derive(Debug, Serialize)]
pub struct Artifact {
    pub file: String,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub experiment: String,
    pub config: BTreeMap<String, String>,
    pub pass: bool,
    pub artifacts: Vec<Artifact>,
}

#[derive(Debug)]
pub struct Report {
    pub id: String,
    pub pass: bool,
    pub dir: PathBuf,
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error("{0}")]
    Failed(String),
}

fn write_hashed(dir: &Path, name: &str, bytes: &[u8]) -> std::io::Result<Artifact> {
    std::fs::write(dir.join(name), bytes)?;
    Ok(Artifact {
        file: name.into(),
        sha256: hex::encode(Sha256::digest(bytes)),
    })
}

fn write_outcome(cfg: &RunConfig, id: &str, outcome: &Outcome) -> Result<Report, RunError> {
    let io = |e: std::io::Error| RunError::Failed(format!("{id}: {e}"));
    let dir = cfg.out.join(id);
    std::fs::create_dir_all(&dir).map_err(io)?;
    let json = outcome.result.to_json().map_err(|e| RunError::Failed(e.to_string()))?;
    let mut artifacts = vec![write_hashed(&dir, "result.json", json.as_bytes()).map_err(io)?];
    for t in &outcome.tables {
        let mut buf = Vec::new();
        t.write_csv(&mut buf).map_err(|e| RunError::Failed(e.to_string()))?;
        artifacts.push(write_hashed(&dir, &format!("{}.csv", t.name), &buf).map_err(io)?);
    }
    let mut config = cfg.echo();
    config.insert("experiment".into(), id.into());
    let manifest = Manifest {
        experiment: id.into(),
        config,
        pass: outcome.result.pass,
        artifacts,
    };
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| RunError::Failed(e.to_string()))?;
    std::fs::write(dir.join("manifest.json"), text).map_err(io)?;
    Ok(Report {
        id: id.into(),
        pass: outcome.result.pass,
        dir,
    })
}

/// Experiments selected by the config: one id, or every experiment for `all`.
pub fn selected(cfg: &RunConfig) -> Result<Vec<&'static str>, RunError> {
    match cfg.experiment.as_deref() {
        None => Err(RunError::Invalid("no experiment given".into())),
        Some("all") => Ok(verify::EXPERIMENTS.iter().map(|e| e.id).collect()),
        Some(id) => verify::experiment_info(id)
            .map(|e| vec![e.id])
            .ok_or_else(|| RunError::Invalid(format!("unknown experiment {id:?}; see `phlab list`"))),
    }
}

/// Runs the selected experiments in parallel, each writing into its own directory.
pub fn run(cfg: &RunConfig) -> Result<Vec<Report>, RunError> {
    let ids = selected(cfg)?;
    if cfg.params.n != 1 && cfg.params.n != 2 {
        return Err(RunError::Invalid(format!("n = {} (supported: 1, 2)", cfg.params.n)));
    }
    ids.par_iter()
        .map(|id| {
            let outcome = verify::run_experiment(id, &cfg.params).map_err(|e| match e {
                parabolic_hardy::Error::InvalidParameter(_) | parabolic_hardy::Error::UnsupportedDimension(_) => {
                    RunError::Invalid(format!("{id}: {e}"))
                }
                _ => RunError::Failed(format!("{id}: {e}")),
            })?;
            write_outcome(cfg, id, &outcome)
        })
        .collect()
}
