use std::fmt;

use serde::{Deserialize, Serialize};

use super::dataset::{Column, Dataset};
use crate::error::{Error, Result};
use crate::model::ModelSpec;
use crate::normal;

/// Significance marker at the 1/5/10 percent levels (two-sided, normal
/// reference distribution).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Stars {
    #[default]
    None,
    Ten,
    Five,
    One,
}

impl Stars {
    pub fn from_p(p: f64) -> Stars {
        if p < 0.01 {
            Stars::One
        } else if p < 0.05 {
            Stars::Five
        } else if p < 0.10 {
            Stars::Ten
        } else {
            Stars::None
        }
    }

    /// Stars for a z statistic. A zero standard error (z undefined) gets none.
    pub fn from_estimate(estimate: f64, se: f64) -> Stars {
        if se > 0.0 && se.is_finite() {
            Stars::from_p(normal::two_sided_p(estimate / se))
        } else {
            Stars::None
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Stars::None => "",
            Stars::Ten => "*",
            Stars::Five => "**",
            Stars::One => "***",
        }
    }
}

impl fmt::Display for Stars {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Two-sample t statistic for independent means.
pub fn two_sample_t(mean_a: f64, se_a: f64, mean_b: f64, se_b: f64) -> Result<(f64, Stars)> {
    if se_a < 0.0 || se_b < 0.0 || se_a.is_nan() || se_b.is_nan() {
        return Err(Error::DegenerateInference("negative standard error".into()));
    }
    let diff = mean_a - mean_b;
    let se = se_a.hypot(se_b);
    if se == 0.0 {
        if diff == 0.0 {
            return Ok((0.0, Stars::None));
        }
        return Err(Error::DegenerateInference(format!(
            "difference {diff} with zero standard errors"
        )));
    }
    let t = diff / se;
    Ok((t, Stars::from_p(normal::two_sided_p(t))))
}

/// Survey-weighted mean and its linearized standard error.
pub fn weighted_mean_se(x: &[f64], w: &[f64]) -> Result<(f64, f64)> {
    let tw: f64 = w.iter().sum();
    if !(tw > 0.0) {
        return Err(Error::Data("zero total weight".into()));
    }
    let mean = x.iter().zip(w).map(|(x, w)| x * w).sum::<f64>() / tw;
    let ss: f64 = x.iter().zip(w).map(|(x, w)| (w * (x - mean)).powi(2)).sum();
    Ok((mean, ss.sqrt() / tw))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupStat {
    pub mean: f64,
    pub se: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairStat {
    /// reference mean minus comparison mean
    pub difference: f64,
    pub t: f64,
    pub stars: Stars,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub variable: String,
    /// One entry per group, in `SummaryTable::groups` order.
    pub stats: Vec<GroupStat>,
    /// One entry per comparison group (groups[1..]).
    pub differences: Vec<PairStat>,
}

/// Weighted descriptive statistics by group with t-tests against the
/// reference group (first in `groups`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryTable {
    pub groups: Vec<String>,
    pub observations: Vec<usize>,
    pub rows: Vec<SummaryRow>,
}

/// Summarises outcomes and covariates for the reference group and each of
/// `comparisons`. Categorical covariates expand to one row per level,
/// reference level included.
pub fn weighted_summary(ds: &Dataset, spec: &ModelSpec, comparisons: &[String]) -> Result<SummaryTable> {
    let mut groups = vec![spec.reference_group.clone()];
    groups.extend(comparisons.iter().filter(|c| **c != spec.reference_group).cloned());
    if groups.len() < 2 {
        return Err(Error::Config("summary needs at least one comparison group".into()));
    }
    let samples = groups.iter().map(|g| ds.group_sample(g)).collect::<Result<Vec<_>>>()?;
    let weights = ds.weights();

    let mut variables: Vec<(String, Vec<f64>)> = Vec::new();
    for o in spec.outcomes() {
        if let Column::Binary(v) = ds.column(o)? {
            variables.push((o.to_owned(), v.iter().map(|&b| b as f64).collect()));
        }
    }
    for cov in &spec.covariates {
        match ds.column(&cov.name)? {
            Column::Numeric(v) => variables.push((cov.name.clone(), v.clone())),
            Column::Categorical { codes, levels } => {
                for (code, label) in levels.labels().iter().enumerate() {
                    let ind = codes.iter().map(|&c| if c as usize == code { 1.0 } else { 0.0 }).collect();
                    variables.push((format!("{}:{}", cov.name, label), ind));
                }
            }
            Column::Binary(v) => variables.push((cov.name.clone(), v.iter().map(|&b| b as f64).collect())),
        }
    }

    let mut rows = Vec::with_capacity(variables.len());
    for (name, values) in variables {
        let stats = samples
            .iter()
            .map(|s| {
                let x: Vec<f64> = s.indices.iter().map(|&i| values[i]).collect();
                let w: Vec<f64> = s.indices.iter().map(|&i| weights[i]).collect();
                weighted_mean_se(&x, &w)
                    .map(|(mean, se)| GroupStat { mean, se })
                    .map_err(|_| Error::Data(format!("zero total weight in group `{}`", s.label)))
            })
            .collect::<Result<Vec<_>>>()?;
        let reference = &stats[0];
        let differences = stats[1..]
            .iter()
            .map(|s| {
                let (t, stars) = two_sample_t(reference.mean, reference.se, s.mean, s.se)?;
                Ok(PairStat { difference: reference.mean - s.mean, t, stars })
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(SummaryRow { variable: name, stats, differences });
    }
    Ok(SummaryTable { groups, observations: samples.iter().map(|s| s.n()).collect(), rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataio::read_dataset;
    use crate::model::Covariate;

    #[test]
    fn t_examples() {
        assert_eq!(two_sample_t(0.5, 0.01, 0.5, 0.01).unwrap(), (0.0, Stars::None));
        // 0.270 / sqrt(2 * 0.002^2) = 95.459...
        let (t, s) = two_sample_t(0.411, 0.002, 0.141, 0.002).unwrap();
        assert!((t - 95.459_415_460_183_9).abs() < 1e-9, "{t}");
        assert_eq!(s, Stars::One);
        let (t, s) = two_sample_t(1.0, 0.4, 0.0, 0.3).unwrap();
        assert!((t - 2.0).abs() < 1e-12);
        assert_eq!(s, Stars::Five);
        assert!(matches!(two_sample_t(1.0, 0.0, 0.0, 0.0), Err(Error::DegenerateInference(_))));
        assert_eq!(two_sample_t(1.0, 0.0, 1.0, 0.0).unwrap().0, 0.0);
    }

    #[test]
    fn star_thresholds() {
        assert_eq!(Stars::from_p(0.0099), Stars::One);
        assert_eq!(Stars::from_p(0.01), Stars::Five);
        assert_eq!(Stars::from_p(0.0455), Stars::Five);
        assert_eq!(Stars::from_p(0.07), Stars::Ten);
        assert_eq!(Stars::from_p(0.10), Stars::None);
    }

    #[test]
    fn equal_weights_give_arithmetic_mean() {
        let x = [0.1, 0.7, 3.0, -2.5, 1.25];
        let (m, _) = weighted_mean_se(&x, &[3.0; 5]).unwrap();
        let plain = x.iter().sum::<f64>() / 5.0;
        assert!((m - plain).abs() < 1e-12);
    }

    #[test]
    fn linearized_se_formula() {
        // x = (0, 1), w = (1, 3): mean 0.75, sum w^2 (x - m)^2 = 0.5625 + 0.5625
        let (m, se) = weighted_mean_se(&[0.0, 1.0], &[1.0, 3.0]).unwrap();
        assert_eq!(m, 0.75);
        assert!((se - 1.125f64.sqrt() / 4.0).abs() < 1e-15);
    }

    #[test]
    fn identical_groups_have_zero_differences() {
        let csv = "y,g,x,c\n1,a,1.0,u\n0,a,2.0,r\n0,a,4.0,u\n1,d,1.0,u\n0,d,2.0,r\n0,d,4.0,u\n";
        let spec = ModelSpec::new(
            "y",
            vec![Covariate::numeric("x"), Covariate::categorical("c", None)],
            "g",
            "a",
            "d",
        );
        let ds = read_dataset(csv.as_bytes(), &spec).unwrap();
        let table = weighted_summary(&ds, &spec, &["d".to_owned()]).unwrap();
        assert_eq!(table.groups, vec!["a", "d"]);
        assert_eq!(table.rows.len(), 4); // y, x, c:r, c:u
        for row in &table.rows {
            assert_eq!(row.differences[0].difference, 0.0);
            assert_eq!(row.differences[0].t, 0.0);
            assert_eq!(row.differences[0].stars, Stars::None);
        }
    }
}
