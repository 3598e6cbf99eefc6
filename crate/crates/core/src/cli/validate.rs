use std::collections::HashSet;
use std::fmt;

use serde::Serialize;

use super::config::RunConfig;
use crate::dataio::{load_dataset, Column};

/// One problem found by [`validate`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    /// Short stable description, e.g. "column not found".
    pub problem: String,
    /// The column, group or setting concerned.
    pub subject: String,
    pub detail: String,
}

impl Diagnostic {
    fn new(problem: &str, subject: impl Into<String>, detail: impl Into<String>) -> Diagnostic {
        Diagnostic { problem: problem.into(), subject: subject.into(), detail: detail.into() }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: `{}`", self.problem, self.subject)?;
        if !self.detail.is_empty() {
            write!(f, " ({})", self.detail)?;
        }
        Ok(())
    }
}

fn read_header(cfg: &RunConfig) -> Result<Vec<String>, String> {
    let mut rdr = csv::Reader::from_path(&cfg.data).map_err(|e| e.to_string())?;
    let header = rdr.headers().map_err(|e| e.to_string())?;
    Ok(header.iter().map(str::to_owned).collect())
}

/// Dry run: checks the configuration against the data without fitting
/// anything. An empty list means the run can start.
pub fn validate(cfg: &RunConfig) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let m = &cfg.model;
    if let Err(e) = cfg.check() {
        out.push(Diagnostic::new("invalid configuration", "config", e.to_string()));
    }
    let mut seen = HashSet::new();
    for g in &m.comparison_groups {
        if *g == m.reference_group {
            out.push(Diagnostic::new("comparison equals reference", g, ""));
        } else if !seen.insert(g) {
            out.push(Diagnostic::new("duplicate comparison group", g, ""));
        }
    }
    let mut covs = HashSet::new();
    for c in &m.covariates {
        if !covs.insert(&c.name) {
            out.push(Diagnostic::new("duplicate covariate", &c.name, ""));
        }
    }

    let header = match read_header(cfg) {
        Ok(h) => h,
        Err(e) => {
            out.push(Diagnostic::new("data not readable", cfg.data.display().to_string(), e));
            return out;
        }
    };
    let mut wanted: Vec<&str> = vec![m.outcome.as_str(), m.group.as_str()];
    wanted.extend(m.extra_outcomes.iter().map(String::as_str));
    wanted.extend(m.covariates.iter().map(|c| c.name.as_str()));
    wanted.extend(m.weight.iter().map(String::as_str));
    wanted.extend(m.filters.iter().map(|f| f.column.as_str()));
    let mut missing = false;
    for name in wanted {
        if !header.iter().any(|h| h == name) {
            out.push(Diagnostic::new("column not found", name, ""));
            missing = true;
        }
    }
    if missing || !out.is_empty() {
        return out;
    }

    let spec = cfg.model_spec(&m.comparison_groups[0]);
    let ds = match load_dataset(&cfg.data, &spec) {
        Ok(ds) => ds,
        Err(e) => {
            out.push(Diagnostic::new("data rejected", e.module(), e.to_string()));
            return out;
        }
    };
    for g in std::iter::once(&m.reference_group).chain(&m.comparison_groups) {
        match ds.group_sample(g) {
            Ok(s) if s.n() < 2 => {
                out.push(Diagnostic::new("group too small", g, format!("{} row(s)", s.n())))
            }
            Ok(_) => {}
            Err(_) => out.push(Diagnostic::new("group not found", g, "no rows with this label")),
        }
    }
    for c in &m.covariates {
        let (Some(reference), Ok(Column::Categorical { levels, .. })) = (&c.reference, ds.column(&c.name)) else {
            continue;
        };
        if levels.code(reference).is_none() {
            out.push(Diagnostic::new(
                "unknown reference level",
                &c.name,
                format!("`{reference}` not among {:?}", levels.labels()),
            ));
        }
    }
    out
}
