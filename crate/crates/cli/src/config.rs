//! Flat `key = value` run configuration.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use parabolic_hardy::verify::Params;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("{path}:{line}: expected `key = value`")]
    Syntax { path: PathBuf, line: usize },
    #[error("unknown config key {0:?} (known: {known})", known = KEYS.join(", "))]
    UnknownKey(String),
    #[error("bad value {value:?} for {key}")]
    Value { key: String, value: String },
}

/// Everything a run depends on. Serialized into the manifest.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub experiment: Option<String>,
    pub params: Params,
    pub out: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            experiment: None,
            params: Params::default(),
            out: PathBuf::from("phlab-out"),
        }
    }
}

pub const KEYS: &[&str] = &[
    "experiment",
    "n",
    "seed",
    "tmax",
    "tol",
    "atoms",
    "alpha",
    "j_max",
    "samples_per_radius",
    "band",
    "slope_tol",
    "refinement_tol",
    "out",
];

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, ConfigError> {
    value.parse().map_err(|_| ConfigError::Value {
        key: key.into(),
        value: value.into(),
    })
}

impl RunConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let p = &mut self.params;
        match key {
            "experiment" => self.experiment = Some(value.into()),
            "n" => p.n = parse(key, value)?,
            "seed" => p.seed = parse(key, value)?,
            "tmax" => p.t_max = Some(parse(key, value)?),
            "tol" => p.tol = Some(parse(key, value)?),
            "atoms" => p.atoms = Some(parse(key, value)?),
            "alpha" => p.alpha = parse(key, value)?,
            "j_max" => p.j_max = parse(key, value)?,
            "samples_per_radius" => p.samples_per_radius = parse(key, value)?,
            "band" => p.band = parse(key, value)?,
            "slope_tol" => p.slope_tol = parse(key, value)?,
            "refinement_tol" => p.refinement_tol = parse(key, value)?,
            "out" => self.out = PathBuf::from(value),
            _ => return Err(ConfigError::UnknownKey(key.into())),
        }
        Ok(())
    }

    /// Applies a config file on top of `self`. `#` starts a comment.
    pub fn load(&mut self, path: &Path) -> Result<(), ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.into(),
            source,
        })?;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(ConfigError::Syntax {
                    path: path.into(),
                    line: i + 1,
                });
            };
            self.set(k.trim(), v.trim())?;
        }
        Ok(())
    }

    /// The resolved configuration as `key -> value` strings.
    pub fn echo(&self) -> BTreeMap<String, String> {
        let p = &self.params;
        let opt = |v: Option<String>| v.unwrap_or_else(|| "default".into());
        let mut m = BTreeMap::new();
        m.insert("experiment".into(), opt(self.experiment.clone()));
        m.insert("n".into(), p.n.to_string());
        m.insert("seed".into(), p.seed.to_string());
        m.insert("tmax".into(), opt(p.t_max.map(|v| v.to_string())));
        m.insert("tol".into(), opt(p.tol.map(|v| v.to_string())));
        m.insert("atoms".into(), opt(p.atoms.map(|v| v.to_string())));
        m.insert("alpha".into(), p.alpha.to_string());
        m.insert("j_max".into(), p.j_max.to_string());
        m.insert("samples_per_radius".into(), p.samples_per_radius.to_string());
        m.insert("band".into(), p.band.to_string());
        m.insert("slope_tol".into(), p.slope_tol.to_string());
        m.insert("refinement_tol".into(), p.refinement_tol.to_string());
        m.insert("out".into(), self.out.display().to_string());
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn file_then_flags() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "# comment\nexperiment = certify-T\nseed = 3\ntmax=64 # trailing\n\nn = 1").unwrap();
        let mut c = RunConfig::default();
        c.load(f.path()).unwrap();
        assert_eq!(c.experiment.as_deref(), Some("certify-T"));
        assert_eq!(c.params.seed, 3);
        assert_eq!(c.params.t_max, Some(64.0));
        c.set("seed", "9").unwrap();
        assert_eq!(c.params.seed, 9);
    }

    #[test]
    fn errors() {
        let mut c = RunConfig::default();
        assert!(matches!(c.set("grid", "1"), Err(ConfigError::UnknownKey(_))));
        assert!(matches!(c.set("seed", "x"), Err(ConfigError::Value { .. })));
        assert!(matches!(c.load(Path::new("/nonexistent/phlab.cfg")), Err(ConfigError::Read { .. })));
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "seed 3").unwrap();
        assert!(matches!(c.load(f.path()), Err(ConfigError::Syntax { line: 1, .. })));
    }

    #[test]
    fn echo_lists_every_key() {
        let c = RunConfig::default();
        let e = c.echo();
        for k in KEYS {
            assert!(e.contains_key(*k), "{k}");
        }
        assert_eq!(e.len(), KEYS.len());
    }
}
