use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataio::{Column, Dataset};
use crate::error::{Error, Result};
use crate::model::{Covariate, ModelSpec};
use crate::normal;
use crate::probit::LinkFunction;
use crate::rng::{self, Domain};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormalDist {
    pub mean: f64,
    pub sd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CategoricalVar {
    pub name: String,
    /// First level is the reference.
    pub levels: Vec<String>,
}

/// True coefficients. Categorical coefficients are given per level, the
/// reference level's entry normally being zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BetaSpec {
    pub intercept: f64,
    #[serde(default)]
    pub numeric: Vec<f64>,
    #[serde(default)]
    pub categorical: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum WeightScheme {
    #[default]
    Unit,
    Uniform { min: f64, max: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupDgp {
    pub label: String,
    pub n: usize,
    /// One distribution per numeric variable.
    #[serde(default)]
    pub numeric: Vec<NormalDist>,
    /// Level probabilities per categorical variable.
    #[serde(default)]
    pub categorical: Vec<Vec<f64>>,
    /// Group-specific coefficients; the shared `beta` when absent.
    #[serde(default)]
    pub beta: Option<BetaSpec>,
    #[serde(default)]
    pub weights: WeightScheme,
}

fn default_outcome() -> String {
    "y".into()
}

fn default_group() -> String {
    "group".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DgpSpec {
    pub seed: u64,
    #[serde(default = "default_outcome")]
    pub outcome: String,
    #[serde(default = "default_group")]
    pub group_column: String,
    /// Name of the weight column; omitted from the data when `None`.
    #[serde(default)]
    pub weight_column: Option<String>,
    #[serde(default)]
    pub link: LinkFunction,
    #[serde(default)]
    pub numeric: Vec<String>,
    #[serde(default)]
    pub categorical: Vec<CategoricalVar>,
    pub beta: BetaSpec,
    pub groups: Vec<GroupDgp>,
}

impl DgpSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.groups.is_empty() {
            return bad("no groups".into());
        }
        let check_beta = |b: &BetaSpec| -> Result<()> {
            if b.numeric.len() != self.numeric.len() || b.categorical.len() != self.categorical.len() {
                return Err(Error::Config("beta does not match declared variables".into()));
            }
            for (c, v) in b.categorical.iter().zip(&self.categorical) {
                if c.len() != v.levels.len() {
                    return Err(Error::Config(format!("beta for `{}` needs one entry per level", v.name)));
                }
            }
            Ok(())
        };
        check_beta(&self.beta)?;
        for g in &self.groups {
            if g.n == 0 {
                return bad(format!("group `{}` has size 0", g.label));
            }
            if g.numeric.len() != self.numeric.len() || g.categorical.len() != self.categorical.len() {
                return bad(format!("group `{}` does not describe every variable", g.label));
            }
            for (probs, var) in g.categorical.iter().zip(&self.categorical) {
                let sum: f64 = probs.iter().sum();
                if probs.len() != var.levels.len() || probs.iter().any(|&p| p < 0.0) || (sum - 1.0).abs() > 1e-9 {
                    return bad(format!("level probabilities of `{}` in group `{}` must sum to 1", var.name, g.label));
                }
            }
            if g.numeric.iter().any(|d| !(d.sd >= 0.0)) {
                return bad(format!("negative sd in group `{}`", g.label));
            }
            if let WeightScheme::Uniform { min, max } = g.weights {
                if !(min > 0.0 && max >= min) {
                    return bad("uniform weights need 0 < min <= max".into());
                }
            }
            if let Some(b) = &g.beta {
                check_beta(b)?;
            }
        }
        Ok(())
    }

    /// Reads a spec from TOML, the format used by run configs.
    pub fn parse(text: &str) -> Result<DgpSpec> {
        let spec: DgpSpec = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<DgpSpec> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        DgpSpec::parse(&text)
    }

    pub fn n(&self) -> usize {
        self.groups.iter().map(|g| g.n).sum()
    }

    /// Model specification matching the generated columns.
    pub fn model_spec(&self, reference: &str, comparison: &str) -> ModelSpec {
        let mut covs: Vec<Covariate> = self.numeric.iter().map(Covariate::numeric).collect();
        covs.extend(self.categorical.iter().map(|c| Covariate::categorical(&c.name, c.levels.first().map(String::as_str))));
        let mut spec = ModelSpec::new(&self.outcome, covs, &self.group_column, reference, comparison);
        spec.weight = self.weight_column.clone();
        spec
    }

    /// Linear index of the true model for one generated row.
    fn index(&self, beta: &BetaSpec, numeric: &[f64], levels: &[usize]) -> f64 {
        let mut z = beta.intercept;
        z += beta.numeric.iter().zip(numeric).map(|(b, x)| b * x).sum::<f64>();
        z += beta.categorical.iter().zip(levels).map(|(b, &l)| b[l]).sum::<f64>();
        z
    }
}

struct Row {
    y: u8,
    numeric: Vec<f64>,
    levels: Vec<usize>,
    weight: f64,
}

/// Draws a dataset. Row `r` (counting across groups in declaration order)
/// uses its own stream `(seed, SynthRow, r)`: numeric covariates first via
/// the inverse normal CDF, then categorical levels by inverse cumulative
/// probabilities, then the weight, then the outcome uniform.
pub fn generate(spec: &DgpSpec) -> Result<Dataset> {
    spec.validate()?;
    let mut plan = Vec::with_capacity(spec.n());
    for (gi, g) in spec.groups.iter().enumerate() {
        plan.extend(std::iter::repeat_n(gi, g.n));
    }
    let rows: Vec<Row> = plan
        .par_iter()
        .enumerate()
        .map(|(r, &gi)| {
            let g = &spec.groups[gi];
            let mut s = rng::stream(spec.seed, Domain::SynthRow, r as u64);
            let numeric: Vec<f64> = g
                .numeric
                .iter()
                .map(|d| d.mean + d.sd * normal::quantile(rng::open_unit(&mut s)))
                .collect();
            let levels: Vec<usize> = g
                .categorical
                .iter()
                .map(|probs| {
                    let u = rng::open_unit(&mut s);
                    let mut acc = 0.0;
                    for (l, p) in probs.iter().enumerate() {
                        acc += p;
                        if u < acc {
                            return l;
                        }
                    }
                    // rounding in the cumulative sum: last level with mass
                    probs.iter().rposition(|&p| p > 0.0).unwrap_or(0)
                })
                .collect();
            let weight = match g.weights {
                WeightScheme::Unit => 1.0,
                WeightScheme::Uniform { min, max } => min + (max - min) * rng::open_unit(&mut s),
            };
            let beta = g.beta.as_ref().unwrap_or(&spec.beta);
            let prob = spec.link.rate(spec.index(beta, &numeric, &levels));
            let y = (rng::open_unit(&mut s) < prob) as u8;
            Row { y, numeric, levels, weight }
        })
        .collect();

    let mut columns = vec![(spec.outcome.clone(), Column::Binary(rows.iter().map(|r| r.y).collect()))];
    for (j, name) in spec.numeric.iter().enumerate() {
        columns.push((name.clone(), Column::Numeric(rows.iter().map(|r| r.numeric[j]).collect())));
    }
    for (j, var) in spec.categorical.iter().enumerate() {
        let labels: Vec<&str> = rows.iter().map(|r| var.levels[r.levels[j]].as_str()).collect();
        columns.push((var.name.clone(), Column::categorical_from_labels(&labels)));
    }
    let groups = plan.iter().map(|&gi| spec.groups[gi].label.clone()).collect();
    let weights = rows.iter().map(|r| r.weight).collect();
    Dataset::from_columns(columns, &spec.group_column, groups, spec.weight_column.as_deref(), weights)
}
