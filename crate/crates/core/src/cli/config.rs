use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::decomp::DecompConfig;
use crate::error::{Error, Result};
use crate::model::{Covariate, MissingPolicy, ModelSpec, RowFilter};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Text,
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "text" => Ok(OutputFormat::Text),
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::Config(format!("unknown output format `{other}` (text, csv or json)"))),
        }
    }
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutputFormat::Text => "text",
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        })
    }
}

fn default_na() -> String {
    "NA".into()
}

/// The `[model]` section: a [`ModelSpec`] with a list of comparison groups.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub outcome: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub extra_outcomes: Vec<String>,
    pub covariates: Vec<Covariate>,
    pub group: String,
    pub reference_group: String,
    pub comparison_groups: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub filters: Vec<RowFilter>,
    #[serde(default = "default_na")]
    pub na_token: String,
    #[serde(default)]
    pub missing: MissingPolicy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default)]
    pub format: OutputFormat,
    /// Standard output when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// CSV file; relative paths resolve against the config file's directory.
    pub data: PathBuf,
    pub model: ModelSection,
    #[serde(default)]
    pub decomp: DecompConfig,
    #[serde(default)]
    pub output: OutputSection,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<RunConfig> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<RunConfig> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = RunConfig::parse(&text)?;
        if cfg.data.is_relative() {
            if let Some(dir) = path.parent() {
                cfg.data = dir.join(&cfg.data);
            }
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Model specification for one comparison.
    pub fn model_spec(&self, comparison: &str) -> ModelSpec {
        let m = &self.model;
        ModelSpec {
            outcome: m.outcome.clone(),
            extra_outcomes: m.extra_outcomes.clone(),
            covariates: m.covariates.clone(),
            group: m.group.clone(),
            reference_group: m.reference_group.clone(),
            comparison_group: comparison.to_owned(),
            weight: m.weight.clone(),
            filters: m.filters.clone(),
            na_token: m.na_token.clone(),
            missing: m.missing,
        }
    }

    /// Structural checks that need no data.
    pub fn check(&self) -> Result<()> {
        let m = &self.model;
        if m.comparison_groups.is_empty() {
            return Err(Error::Config("at least one comparison group is required".into()));
        }
        if m.covariates.is_empty() {
            return Err(Error::Config("at least one covariate is required".into()));
        }
        let outcomes: Vec<&str> = std::iter::once(m.outcome.as_str()).chain(m.extra_outcomes.iter().map(String::as_str)).collect();
        for c in &m.covariates {
            if outcomes.contains(&c.name.as_str()) {
                return Err(Error::Config(format!("`{}` is both an outcome and a covariate", c.name)));
            }
            if c.name == m.group {
                return Err(Error::Config(format!("group column `{}` cannot be a covariate", c.name)));
            }
        }
        self.decomp.validate()
    }
}
