//! Model specification shared by loading, encoding and decomposition.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum CovariateKind {
    #[default]
    Numeric,
    Categorical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Covariate {
    pub name: String,
    #[serde(default)]
    pub kind: CovariateKind,
    /// Omitted level of a categorical covariate; defaults to the first level
    /// in the registry.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<String>,
}

impl Covariate {
    pub fn numeric(name: impl Into<String>) -> Self {
        Covariate { name: name.into(), kind: CovariateKind::Numeric, reference: None }
    }

    pub fn categorical(name: impl Into<String>, reference: Option<&str>) -> Self {
        Covariate {
            name: name.into(),
            kind: CovariateKind::Categorical,
            reference: reference.map(str::to_owned),
        }
    }
}

/// Inclusive numeric bounds on one column; rows outside are dropped at load.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RowFilter {
    pub column: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max: Option<f64>,
}

impl RowFilter {
    pub fn accepts(&self, value: f64) -> bool {
        self.min.is_none_or(|m| value >= m) && self.max.is_none_or(|m| value <= m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum MissingPolicy {
    /// Any missing or invalid value rejects the file.
    #[default]
    Strict,
    /// Offending rows are dropped and counted.
    Lenient,
}

fn default_na() -> String {
    "NA".to_owned()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub outcome: String,
    /// Further binary columns loaded and summarised but not modelled.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub extra_outcomes: Vec<String>,
    pub covariates: Vec<Covariate>,
    pub group: String,
    pub reference_group: String,
    pub comparison_group: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub filters: Vec<RowFilter>,
    #[serde(default = "default_na")]
    pub na_token: String,
    #[serde(default)]
    pub missing: MissingPolicy,
}

impl ModelSpec {
    pub fn new(
        outcome: impl Into<String>,
        covariates: Vec<Covariate>,
        group: impl Into<String>,
        reference_group: impl Into<String>,
        comparison_group: impl Into<String>,
    ) -> Self {
        ModelSpec {
            outcome: outcome.into(),
            extra_outcomes: Vec::new(),
            covariates,
            group: group.into(),
            reference_group: reference_group.into(),
            comparison_group: comparison_group.into(),
            weight: None,
            filters: Vec::new(),
            na_token: default_na(),
            missing: MissingPolicy::Strict,
        }
    }

    pub fn with_weight(mut self, column: impl Into<String>) -> Self {
        self.weight = Some(column.into());
        self
    }

    /// All binary columns: the modelled outcome first.
    pub fn outcomes(&self) -> impl Iterator<Item = &str> {
        std::iter::once(self.outcome.as_str()).chain(self.extra_outcomes.iter().map(String::as_str))
    }
}
