//! Run configuration and artifact manifests.
//!
//! A config file holds flat `key = value` pairs (TOML syntax). Command-line
//! flags override file values field by field.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;
pub const CODE_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema_version: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta_prime: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub times: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<Vec<i32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_paths: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_time: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quad_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

macro_rules! overlay {
    ($base:ident, $top:ident; $($f:ident),*) => {
        RunConfig { $($f: $top.$f.or($base.$f)),* }
    };
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| {
            let span = e.span().map(|s| text[..s.start].lines().count()).unwrap_or(0);
            Error::Config {
                field: field_from_message(e.message()).unwrap_or_else(|| format!("line {span}")),
                message: e.message().trim().to_string(),
            }
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    /// Values set in `top` win over values in `self`.
    pub fn overlay(self, top: RunConfig) -> RunConfig {
        let base = self;
        overlay!(base, top; schema_version, d, beta, beta_prime, lambda, t, times, x, radius, n_paths, n_time, seed, threads,
            quad_tol, tolerance, output)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, message: String| {
            Err(Error::Config {
                field: field.into(),
                message,
            })
        };
        if let Some(v) = self.schema_version {
            if v != SCHEMA_VERSION {
                return bad("schema_version", format!("expected {SCHEMA_VERSION}, got {v}"));
            }
        }
        if let Some(d) = self.d {
            if !(1..=3).contains(&d) {
                return bad("d", format!("must be 1, 2 or 3, got {d}"));
            }
        }
        for (name, v) in [("beta", self.beta), ("beta_prime", self.beta_prime), ("lambda", self.lambda)] {
            if let Some(v) = v {
                if !v.is_finite() {
                    return bad(name, format!("must be finite, got {v}"));
                }
            }
        }
        for (name, v) in [("t", self.t), ("n_time", self.n_time)] {
            if let Some(v) = v {
                if !(v >= 0.0 && v.is_finite()) {
                    return bad(name, format!("must be a finite nonnegative time, got {v}"));
                }
            }
        }
        if let Some(ts) = &self.times {
            if let Some(i) = ts.iter().position(|t| !(*t >= 0.0 && t.is_finite())) {
                return bad(&format!("times[{i}]"), format!("must be a finite nonnegative time, got {}", ts[i]));
            }
        }
        for (name, v) in [("quad_tol", self.quad_tol), ("tolerance", self.tolerance)] {
            if let Some(v) = v {
                if !(v > 0.0) {
                    return bad(name, format!("must be positive, got {v}"));
                }
            }
        }
        if let (Some(x), Some(d)) = (&self.x, self.d) {
            if x.len() != d {
                return bad("x", format!("has {} coordinates but d = {d}", x.len()));
            }
        }
        if self.n_paths == Some(0) {
            return bad("n_paths", "must be at least 1".into());
        }
        if self.threads == Some(0) {
            return bad("threads", "must be at least 1".into());
        }
        Ok(())
    }
}

fn field_from_message(msg: &str) -> Option<String> {
    // serde messages quote the offending key in backticks
    let start = msg.find('`')? + 1;
    let end = start + msg[start..].find('`')?;
    Some(msg[start..end].to_string())
}

/// Provenance record embedded in every artifact.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub code_version: String,
    pub command: String,
    pub config: RunConfig,
}

impl Manifest {
    pub fn new(command: &str, config: &RunConfig) -> Self {
        Manifest {
            schema_version: SCHEMA_VERSION,
            code_version: CODE_VERSION.into(),
            command: command.into(),
            config: config.clone(),
        }
    }

    pub fn check_schema(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::SchemaMismatch {
                found: self.schema_version,
                expected: SCHEMA_VERSION,
            });
        }
        Ok(())
    }

    /// The single `#`-prefixed line that heads CSV artifacts.
    pub fn csv_line(&self) -> String {
        format!("# {}", serde_json::to_string(self).expect("manifest serializes"))
    }

    pub fn from_csv_line(line: &str) -> Result<Self> {
        let body = line
            .strip_prefix("# ")
            .ok_or_else(|| Error::InvalidArgument("CSV artifact lacks a manifest line".into()))?;
        serde_json::from_str(body).map_err(|e| Error::InvalidArgument(format!("bad manifest: {e}")))
    }
}

/// A JSON artifact: the manifest next to the report body.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Artifact<T> {
    pub manifest: Manifest,
    pub report: T,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_flat_file() {
        let c = RunConfig::from_toml("d = 1\nbeta = -1.0\nx = [3]\nseed = 7\n").unwrap();
        assert_eq!(c.d, Some(1));
        assert_eq!(c.x, Some(vec![3]));
    }

    #[test]
    fn unknown_key_names_the_field() {
        match RunConfig::from_toml("bta = 1.0\n") {
            Err(Error::Config { field, .. }) => assert_eq!(field, "bta"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn validation_names_the_field() {
        match RunConfig::from_toml("d = 4\n") {
            Err(Error::Config { field, .. }) => assert_eq!(field, "d"),
            other => panic!("{other:?}"),
        }
        match RunConfig::from_toml("times = [1.0, -2.0]\n") {
            Err(Error::Config { field, .. }) => assert_eq!(field, "times[1]"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn flags_override_file() {
        let file = RunConfig {
            d: Some(2),
            beta: Some(-1.0),
            ..Default::default()
        };
        let flags = RunConfig {
            beta: Some(0.5),
            ..Default::default()
        };
        let c = file.overlay(flags);
        assert_eq!((c.d, c.beta), (Some(2), Some(0.5)));
    }

    #[test]
    fn manifest_round_trip() {
        let m = Manifest::new("psi", &RunConfig::default());
        let back = Manifest::from_csv_line(&m.csv_line()).unwrap();
        assert_eq!(m, back);
        let mut old = back;
        old.schema_version = 0;
        assert!(old.check_schema().is_err());
    }
}
