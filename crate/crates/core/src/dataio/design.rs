use std::ops::Range;

use serde::Serialize;

use super::dataset::{Column, Dataset};
use crate::error::{Error, Result};
use crate::model::{CovariateKind, ModelSpec};

pub const INTERCEPT: &str = "(Intercept)";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockRole {
    Covariate,
    /// Group-membership dummies; only present when requested.
    GroupIndicator,
}

/// Columns belonging to one declared variable.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Block {
    pub name: String,
    pub columns: Range<usize>,
    /// Omitted level, for categorical variables.
    pub reference: Option<String>,
    pub categorical: bool,
    pub role: BlockRole,
}

#[derive(Debug, Clone, Default)]
pub struct EncodeOptions {
    /// Append dummies for the group column (reference group omitted).
    pub group_indicators: bool,
}

/// Row-major design matrix with a leading intercept column.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    x: Vec<f64>,
    n: usize,
    p: usize,
    names: Vec<String>,
    blocks: Vec<Block>,
    y: Vec<f64>,
    w: Vec<f64>,
    rows: Vec<usize>,
}

impl DesignMatrix {
    /// Assembles a design matrix from raw parts. `x` is row-major `n x p` and
    /// column 0 must be the intercept.
    pub fn from_parts(
        x: Vec<f64>,
        p: usize,
        names: Vec<String>,
        blocks: Vec<Block>,
        y: Vec<f64>,
        w: Vec<f64>,
    ) -> Result<DesignMatrix> {
        if p == 0 || x.len() % p != 0 {
            return Err(Error::DimensionMismatch(format!("{} values do not fill {p} columns", x.len())));
        }
        let n = x.len() / p;
        if y.len() != n || w.len() != n || names.len() != p {
            return Err(Error::DimensionMismatch(format!(
                "n={n}, p={p}, but y={}, w={}, names={}",
                y.len(),
                w.len(),
                names.len()
            )));
        }
        if blocks.iter().any(|b| b.columns.start == 0 || b.columns.end > p) {
            return Err(Error::DimensionMismatch("block range outside design columns".into()));
        }
        Ok(DesignMatrix { x, n, p, names, blocks, y, w, rows: (0..n).collect() })
    }

    /// Numeric-only design with one block per non-intercept column.
    pub fn from_numeric(x: Vec<f64>, p: usize, y: Vec<f64>, w: Vec<f64>) -> Result<DesignMatrix> {
        let mut names = vec![INTERCEPT.to_owned()];
        names.extend((1..p).map(|j| format!("x{j}")));
        let blocks = (1..p)
            .map(|j| Block {
                name: format!("x{j}"),
                columns: j..j + 1,
                reference: None,
                categorical: false,
                role: BlockRole::Covariate,
            })
            .collect();
        DesignMatrix::from_parts(x, p, names, blocks, y, w)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.x[i * self.p..(i + 1) * self.p]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.x[i * self.p + j]
    }

    pub fn values(&self) -> &[f64] {
        &self.x
    }

    pub fn column_names(&self) -> &[String] {
        &self.names
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn block(&self, name: &str) -> Option<&Block> {
        self.blocks.iter().find(|b| b.name == name)
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn w(&self) -> &[f64] {
        &self.w
    }

    /// Dataset row index of each design row.
    pub fn source_rows(&self) -> &[usize] {
        &self.rows
    }

    pub fn total_weight(&self) -> f64 {
        self.w.iter().sum()
    }

    /// Same columns and blocks, restricted to the given design-row positions
    /// (repeats allowed, as in bootstrap resamples).
    pub fn select(&self, positions: &[usize]) -> DesignMatrix {
        let mut x = Vec::with_capacity(positions.len() * self.p);
        for &i in positions {
            x.extend_from_slice(self.row(i));
        }
        DesignMatrix {
            x,
            n: positions.len(),
            p: self.p,
            names: self.names.clone(),
            blocks: self.blocks.clone(),
            y: positions.iter().map(|&i| self.y[i]).collect(),
            w: positions.iter().map(|&i| self.w[i]).collect(),
            rows: positions.iter().map(|&i| self.rows[i]).collect(),
        }
    }

    /// Weighted column means.
    pub fn weighted_means(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.p];
        for i in 0..self.n {
            let w = self.w[i];
            for (acc, v) in m.iter_mut().zip(self.row(i)) {
                *acc += w * v;
            }
        }
        let tw = self.total_weight();
        m.iter_mut().for_each(|v| *v /= tw);
        m
    }

    /// Returns a copy with column `j` transformed element-wise.
    pub fn map_column(&self, j: usize, f: impl Fn(f64) -> f64) -> DesignMatrix {
        let mut out = self.clone();
        for i in 0..self.n {
            out.x[i * self.p + j] = f(out.x[i * self.p + j]);
        }
        out
    }

    /// Returns a copy with new weights.
    pub fn with_weights(&self, w: Vec<f64>) -> Result<DesignMatrix> {
        if w.len() != self.n {
            return Err(Error::DimensionMismatch("weight length".into()));
        }
        let mut out = self.clone();
        out.w = w;
        Ok(out)
    }

    /// True when both matrices share column names and block layout.
    pub fn aligned_with(&self, other: &DesignMatrix) -> bool {
        self.p == other.p && self.names == other.names && self.blocks == other.blocks
    }
}

/// Encodes the design for `rows` (all rows when `None`).
pub fn encode_design(ds: &Dataset, spec: &ModelSpec, rows: Option<&[usize]>) -> Result<DesignMatrix> {
    encode_design_with(ds, spec, rows, &EncodeOptions::default())
}

pub fn encode_design_with(
    ds: &Dataset,
    spec: &ModelSpec,
    rows: Option<&[usize]>,
    opts: &EncodeOptions,
) -> Result<DesignMatrix> {
    let all: Vec<usize>;
    let rows = match rows {
        Some(r) => r,
        None => {
            all = (0..ds.n()).collect();
            &all
        }
    };
    let n = rows.len();

    // Column layout first: each categorical contributes levels - 1 columns.
    let mut names = vec![INTERCEPT.to_owned()];
    let mut blocks = Vec::new();
    enum Source<'a> {
        Numeric(&'a [f64]),
        Dummies { codes: &'a [u32], reference: u32, n_levels: u32 },
        Groups { reference: u32, kept: Vec<u32> },
    }
    let mut sources = Vec::new();
    for cov in &spec.covariates {
        let col = ds.column(&cov.name)?;
        let start = names.len();
        match (cov.kind, col) {
            (CovariateKind::Numeric, Column::Numeric(v)) => {
                names.push(cov.name.clone());
                sources.push(Source::Numeric(v));
                blocks.push(Block {
                    name: cov.name.clone(),
                    columns: start..start + 1,
                    reference: None,
                    categorical: false,
                    role: BlockRole::Covariate,
                });
            }
            (CovariateKind::Categorical, Column::Categorical { codes, levels }) => {
                let reference = match &cov.reference {
                    Some(r) => levels.code(r).ok_or_else(|| Error::UnseenLevel {
                        variable: cov.name.clone(),
                        level: r.clone(),
                    })?,
                    None => 0,
                };
                for (code, label) in levels.labels().iter().enumerate() {
                    if code as u32 != reference {
                        names.push(format!("{}:{}", cov.name, label));
                    }
                }
                sources.push(Source::Dummies { codes, reference, n_levels: levels.len() as u32 });
                blocks.push(Block {
                    name: cov.name.clone(),
                    columns: start..names.len(),
                    reference: Some(levels.label(reference).to_owned()),
                    categorical: true,
                    role: BlockRole::Covariate,
                });
            }
            _ => {
                return Err(Error::Config(format!(
                    "covariate `{}` declared {:?} but loaded with a different kind",
                    cov.name, cov.kind
                )))
            }
        }
    }
    if opts.group_indicators {
        let levels = ds.group_levels();
        let reference = levels.code(&spec.reference_group).ok_or_else(|| Error::UnseenLevel {
            variable: ds.group_name().to_owned(),
            level: spec.reference_group.clone(),
        })?;
        let mut present = vec![false; levels.len()];
        for &r in rows {
            present[ds.group_code(r) as usize] = true;
        }
        let kept: Vec<u32> =
            (0..levels.len() as u32).filter(|&c| c != reference && present[c as usize]).collect();
        let start = names.len();
        for &c in &kept {
            names.push(format!("{}:{}", ds.group_name(), levels.label(c)));
        }
        blocks.push(Block {
            name: ds.group_name().to_owned(),
            columns: start..names.len(),
            reference: Some(spec.reference_group.clone()),
            categorical: true,
            role: BlockRole::GroupIndicator,
        });
        sources.push(Source::Groups { reference, kept });
    }
    let p = names.len();

    let mut x = vec![0.0; n * p];
    for (pos, &r) in rows.iter().enumerate() {
        let row = &mut x[pos * p..(pos + 1) * p];
        row[0] = 1.0;
        for (src, block) in sources.iter().zip(&blocks) {
            let start = block.columns.start;
            match src {
                Source::Numeric(v) => row[start] = v[r],
                Source::Dummies { codes, reference, n_levels } => {
                    let c = codes[r];
                    debug_assert!(c < *n_levels);
                    if c != *reference {
                        let offset = if c < *reference { c } else { c - 1 };
                        row[start + offset as usize] = 1.0;
                    }
                }
                Source::Groups { reference, kept } => {
                    let c = ds.group_code(r);
                    if c != *reference {
                        if let Some(k) = kept.iter().position(|&g| g == c) {
                            row[start + k] = 1.0;
                        }
                    }
                }
            }
        }
    }

    let y = match ds.column(&spec.outcome)? {
        Column::Binary(v) => rows.iter().map(|&r| v[r] as f64).collect(),
        _ => return Err(Error::Config(format!("outcome `{}` is not a binary column", spec.outcome))),
    };
    let w = rows.iter().map(|&r| ds.weights()[r]).collect();

    let dm = DesignMatrix { x, n, p, names, blocks, y, w, rows: rows.to_vec() };
    check_columns(&dm)?;
    Ok(dm)
}

fn check_columns(dm: &DesignMatrix) -> Result<()> {
    if dm.n == 0 {
        return Err(Error::Data("no rows to encode".into()));
    }
    for j in 1..dm.p {
        let first = dm.get(0, j);
        if (1..dm.n).all(|i| dm.get(i, j) == first) {
            return Err(Error::ConstantColumn(dm.names[j].clone()));
        }
    }
    for j in 1..dm.p {
        for k in j + 1..dm.p {
            if (0..dm.n).all(|i| dm.get(i, j) == dm.get(i, k)) {
                return Err(Error::CollinearDesign(vec![dm.names[j].clone(), dm.names[k].clone()]));
            }
        }
    }
    Ok(())
}
