//! JSON instance files: problem parameters plus a scenario source.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::ff::{parse_ff_daily, FfData, FfOptions};
use crate::error::{Error, Result};
use crate::problem::{LinearRow, ProblemSpec, ScenarioSet};

/// Where the scenario matrix comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScenarioSource {
    Inline {
        #[serde(flatten)]
        scenarios: ScenarioSet,
    },
    /// A Fama-French daily file, relative paths resolved against the
    /// instance file's directory.
    FamaFrench {
        path: PathBuf,
        #[serde(flatten)]
        options: FfOptions,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub alpha: f64,
    /// Return floor; `null` means none.
    pub mu0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<Vec<(f64, f64)>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub extra_rows: Vec<LinearRow>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub allow_short: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub short_cap: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub big_m: Option<f64>,
    pub scenarios: ScenarioSource,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// A loaded instance, with the parser report when read from a data file.
#[derive(Debug, Clone)]
pub struct Instance {
    pub scenarios: ScenarioSet,
    pub spec: ProblemSpec,
    pub data: Option<FfData>,
}

impl InstanceFile {
    /// Instance with the scenarios embedded.
    pub fn inline(s: &ScenarioSet, spec: &ProblemSpec) -> Self {
        InstanceFile {
            alpha: spec.alpha,
            mu0: spec.has_return_floor().then_some(spec.mu0),
            bounds: spec.bounds.clone(),
            extra_rows: spec.extra_rows.clone(),
            allow_short: spec.allow_short,
            short_cap: spec.short_cap,
            big_m: spec.big_m_override,
            scenarios: ScenarioSource::Inline { scenarios: s.clone() },
            seed: None,
        }
    }

    pub fn spec(&self) -> ProblemSpec {
        ProblemSpec {
            alpha: self.alpha,
            mu0: self.mu0.unwrap_or(f64::NEG_INFINITY),
            bounds: self.bounds.clone(),
            extra_rows: self.extra_rows.clone(),
            allow_short: self.allow_short,
            short_cap: self.short_cap,
            big_m_override: self.big_m,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Canonical form: pretty-printed, fixed field order, shortest
    /// round-trip float formatting, trailing newline.
    pub fn to_canonical_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_canonical_json()?)?;
        Ok(())
    }

    /// Materializes the scenarios. `base` is the directory relative data
    /// paths are resolved against.
    pub fn resolve(&self, base: &Path) -> Result<Instance> {
        let spec = self.spec();
        let (scenarios, data) = match &self.scenarios {
            ScenarioSource::Inline { scenarios } => (scenarios.clone(), None),
            ScenarioSource::FamaFrench { path, options } => {
                let full = if path.is_absolute() { path.clone() } else { base.join(path) };
                let d = parse_ff_daily(&full, options)?;
                (d.scenarios.clone(), Some(d))
            }
        };
        let issues = spec.violations(scenarios.n());
        if !issues.is_empty() {
            return Err(Error::InvalidInput(issues.join("; ")));
        }
        Ok(Instance { scenarios, spec, data })
    }

    /// Loads the file and resolves it against its own directory.
    pub fn open(path: impl AsRef<Path>) -> Result<Instance> {
        let path = path.as_ref();
        let base = path.parent().unwrap_or(Path::new("."));
        Self::load(path)?.resolve(base)
    }
}
