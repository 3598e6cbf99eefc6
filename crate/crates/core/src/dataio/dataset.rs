use std::collections::{BTreeSet, HashMap};
use std::io::{Read, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{CovariateKind, MissingPolicy, ModelSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnKind {
    BinaryOutcome,
    NumericCovariate,
    CategoricalCovariate,
    GroupLabel,
    Weight,
}

/// Level registry of a categorical column, built on the full sample.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Levels {
    labels: Vec<String>,
}

impl Levels {
    fn from_values<'a>(values: impl Iterator<Item = &'a str>) -> Levels {
        let set: BTreeSet<&str> = values.collect();
        let mut labels: Vec<String> = set.into_iter().map(str::to_owned).collect();
        // numeric-looking labels sort by value ("2" before "10")
        if labels.iter().all(|l| l.parse::<f64>().is_ok()) {
            labels.sort_by(|a, b| {
                let (x, y) = (a.parse::<f64>().unwrap(), b.parse::<f64>().unwrap());
                x.total_cmp(&y).then_with(|| a.cmp(b))
            });
        }
        Levels { labels }
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn code(&self, label: &str) -> Option<u32> {
        self.labels.iter().position(|l| l == label).map(|i| i as u32)
    }

    pub fn label(&self, code: u32) -> &str {
        &self.labels[code as usize]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Column {
    Binary(Vec<u8>),
    Numeric(Vec<f64>),
    Categorical { codes: Vec<u32>, levels: Levels },
}

impl Column {
    /// Categorical column with levels registered from the labels themselves.
    pub fn categorical_from_labels<S: AsRef<str>>(labels: &[S]) -> Column {
        let levels = Levels::from_values(labels.iter().map(|s| s.as_ref()));
        let codes = labels.iter().map(|s| levels.code(s.as_ref()).unwrap()).collect();
        Column::Categorical { codes, levels }
    }

    fn len(&self) -> usize {
        match self {
            Column::Binary(v) => v.len(),
            Column::Numeric(v) => v.len(),
            Column::Categorical { codes, .. } => codes.len(),
        }
    }
}

/// Rows of one group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupSample {
    pub label: String,
    pub indices: Vec<usize>,
}

impl GroupSample {
    pub fn n(&self) -> usize {
        self.indices.len()
    }
}

/// Validated, immutable microdata.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    names: Vec<String>,
    kinds: Vec<ColumnKind>,
    columns: Vec<Column>,
    group_name: String,
    group_codes: Vec<u32>,
    groups: Levels,
    weight_name: Option<String>,
    weights: Vec<f64>,
    dropped: usize,
}

impl Dataset {
    pub fn n(&self) -> usize {
        self.weights.len()
    }

    /// Rows dropped in lenient mode (filtered rows are not counted).
    pub fn dropped_rows(&self) -> usize {
        self.dropped
    }

    /// Ordered (name, kind) pairs, including group and weight columns.
    pub fn schema(&self) -> Vec<(&str, ColumnKind)> {
        let mut out: Vec<(&str, ColumnKind)> =
            self.names.iter().map(String::as_str).zip(self.kinds.iter().copied()).collect();
        out.push((&self.group_name, ColumnKind::GroupLabel));
        if let Some(w) = &self.weight_name {
            out.push((w, ColumnKind::Weight));
        }
        out
    }

    pub fn column(&self, name: &str) -> Result<&Column> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| &self.columns[i])
            .ok_or_else(|| Error::MissingColumn(name.to_owned()))
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn group_levels(&self) -> &Levels {
        &self.groups
    }

    pub fn group_name(&self) -> &str {
        &self.group_name
    }

    pub fn group_code(&self, row: usize) -> u32 {
        self.group_codes[row]
    }

    pub fn group_sample(&self, label: &str) -> Result<GroupSample> {
        let code = self.groups.code(label).ok_or_else(|| {
            Error::Data(format!("group `{label}` not present in column `{}`", self.group_name))
        })?;
        let indices = (0..self.n()).filter(|&i| self.group_codes[i] == code).collect();
        Ok(GroupSample { label: label.to_owned(), indices })
    }

    /// Builds a dataset directly from columns. Used by the synthetic generator
    /// and by tests.
    pub fn from_columns(
        columns: Vec<(String, Column)>,
        group_name: &str,
        group_labels: Vec<String>,
        weight_name: Option<&str>,
        weights: Vec<f64>,
    ) -> Result<Dataset> {
        let n = group_labels.len();
        if n == 0 {
            return Err(Error::EmptyFile);
        }
        let groups = Levels::from_values(group_labels.iter().map(String::as_str));
        let group_codes = group_labels.iter().map(|l| groups.code(l).unwrap()).collect();
        let mut names = Vec::new();
        let mut kinds = Vec::new();
        let mut cols = Vec::new();
        for (name, col) in columns {
            if col.len() != n {
                return Err(Error::Data(format!("column `{name}` has {} rows, expected {n}", col.len())));
            }
            kinds.push(match &col {
                Column::Binary(_) => ColumnKind::BinaryOutcome,
                Column::Numeric(_) => ColumnKind::NumericCovariate,
                Column::Categorical { .. } => ColumnKind::CategoricalCovariate,
            });
            names.push(name);
            cols.push(col);
        }
        if weights.len() != n {
            return Err(Error::Data("weight vector length mismatch".into()));
        }
        if let Some((row, w)) = weights.iter().enumerate().find(|(_, w)| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::InvalidWeight { row, value: w.to_string() });
        }
        let ds = Dataset {
            names,
            kinds,
            columns: cols,
            group_name: group_name.to_owned(),
            group_codes,
            groups,
            weight_name: weight_name.map(str::to_owned),
            weights,
            dropped: 0,
        };
        ds.check_groups()?;
        Ok(ds)
    }

    fn check_groups(&self) -> Result<()> {
        if self.groups.len() < 2 {
            return Err(Error::Data(format!(
                "group column `{}` has fewer than 2 distinct labels",
                self.group_name
            )));
        }
        Ok(())
    }

    /// Writes the dataset as CSV. Floats use the shortest representation that
    /// parses back to the same bits.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<&str> = self.names.iter().map(String::as_str).collect();
        header.push(&self.group_name);
        if let Some(wn) = &self.weight_name {
            header.push(wn);
        }
        w.write_record(&header)?;
        let mut record = Vec::with_capacity(header.len());
        for i in 0..self.n() {
            record.clear();
            for col in &self.columns {
                record.push(match col {
                    Column::Binary(v) => v[i].to_string(),
                    Column::Numeric(v) => format!("{:?}", v[i]),
                    Column::Categorical { codes, levels } => levels.label(codes[i]).to_owned(),
                });
            }
            record.push(self.groups.label(self.group_codes[i]).to_owned());
            if self.weight_name.is_some() {
                record.push(format!("{:?}", self.weights[i]));
            }
            w.write_record(&record)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(f))
    }
}

/// Loads and validates a CSV file against `spec`.
pub fn load_dataset(path: impl AsRef<Path>, spec: &ModelSpec) -> Result<Dataset> {
    let f = std::fs::File::open(path.as_ref())?;
    read_dataset(std::io::BufReader::new(f), spec)
}

enum Raw {
    Binary(Vec<u8>),
    Numeric(Vec<f64>),
    Categorical(Vec<String>),
}

/// Reads and validates CSV data from any reader.
pub fn read_dataset<R: Read>(reader: R, spec: &ModelSpec) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header: HashMap<String, usize> = rdr
        .headers()?
        .iter()
        .enumerate()
        .map(|(i, h)| (h.to_owned(), i))
        .collect();
    let find = |name: &str| header.get(name).copied().ok_or_else(|| Error::MissingColumn(name.to_owned()));

    let mut plan: Vec<(String, ColumnKind, usize)> = Vec::new();
    for o in spec.outcomes() {
        plan.push((o.to_owned(), ColumnKind::BinaryOutcome, find(o)?));
    }
    for c in &spec.covariates {
        let kind = match c.kind {
            CovariateKind::Numeric => ColumnKind::NumericCovariate,
            CovariateKind::Categorical => ColumnKind::CategoricalCovariate,
        };
        plan.push((c.name.clone(), kind, find(&c.name)?));
    }
    let group_idx = find(&spec.group)?;
    let weight_idx = spec.weight.as_deref().map(find).transpose()?;
    let filter_idx: Vec<usize> = spec.filters.iter().map(|f| find(&f.column)).collect::<Result<_>>()?;

    let lenient = spec.missing == MissingPolicy::Lenient;
    let mut raws: Vec<Raw> = plan
        .iter()
        .map(|(_, k, _)| match k {
            ColumnKind::BinaryOutcome => Raw::Binary(Vec::new()),
            ColumnKind::NumericCovariate => Raw::Numeric(Vec::new()),
            _ => Raw::Categorical(Vec::new()),
        })
        .collect();
    let mut group_labels = Vec::new();
    let mut weights = Vec::new();
    let mut dropped = 0usize;
    let mut seen_rows = 0usize;

    let na = spec.na_token.as_str();
    let is_missing = |s: &str| s.is_empty() || s == na;

    let mut record = csv::StringRecord::new();
    let mut row = 0usize;
    while rdr.read_record(&mut record)? {
        row += 1;
        seen_rows += 1;
        // filters run first; rows outside the analysis sample are not validated
        let mut keep = true;
        for (f, &idx) in spec.filters.iter().zip(&filter_idx) {
            let s = record.get(idx).unwrap_or("");
            match s.parse::<f64>() {
                Ok(v) if !is_missing(s) => keep &= f.accepts(v),
                _ => {
                    if lenient {
                        keep = false;
                    } else {
                        return Err(Error::Data(format!(
                            "missing or non-numeric value `{s}` in filter column `{}` at row {row}",
                            f.column
                        )));
                    }
                }
            }
        }
        if !keep {
            continue;
        }
        match parse_row(&record, row, &plan, group_idx, weight_idx, &is_missing) {
            Ok((values, group, weight)) => {
                for (raw, v) in raws.iter_mut().zip(values) {
                    match (raw, v) {
                        (Raw::Binary(col), Value::Binary(b)) => col.push(b),
                        (Raw::Numeric(col), Value::Numeric(x)) => col.push(x),
                        (Raw::Categorical(col), Value::Label(s)) => col.push(s),
                        _ => unreachable!(),
                    }
                }
                group_labels.push(group);
                weights.push(weight);
            }
            Err(e) if lenient => {
                let _ = e;
                dropped += 1;
            }
            Err(e) => return Err(e),
        }
    }
    if seen_rows == 0 || group_labels.is_empty() {
        return Err(Error::EmptyFile);
    }

    let columns = plan
        .into_iter()
        .zip(raws)
        .map(|((name, _, _), raw)| {
            let col = match raw {
                Raw::Binary(v) => Column::Binary(v),
                Raw::Numeric(v) => Column::Numeric(v),
                Raw::Categorical(v) => {
                    let levels = Levels::from_values(v.iter().map(String::as_str));
                    let codes = v.iter().map(|s| levels.code(s).unwrap()).collect();
                    Column::Categorical { codes, levels }
                }
            };
            (name, col)
        })
        .collect();
    let mut ds = Dataset::from_columns(columns, &spec.group, group_labels, spec.weight.as_deref(), weights)?;
    ds.dropped = dropped;
    Ok(ds)
}

enum Value {
    Binary(u8),
    Numeric(f64),
    Label(String),
}

fn parse_row(
    record: &csv::StringRecord,
    row: usize,
    plan: &[(String, ColumnKind, usize)],
    group_idx: usize,
    weight_idx: Option<usize>,
    is_missing: &dyn Fn(&str) -> bool,
) -> Result<(Vec<Value>, String, f64)> {
    let field = |idx: usize, name: &str| -> Result<&str> {
        let s = record.get(idx).unwrap_or("");
        if is_missing(s) {
            Err(Error::Data(format!("missing value in column `{name}` at row {row}")))
        } else {
            Ok(s)
        }
    };
    let mut values = Vec::with_capacity(plan.len());
    for (name, kind, idx) in plan {
        let s = field(*idx, name)?;
        values.push(match kind {
            ColumnKind::BinaryOutcome => match s.parse::<f64>() {
                Ok(v) if v == 0.0 => Value::Binary(0),
                Ok(v) if v == 1.0 => Value::Binary(1),
                _ => {
                    return Err(Error::NonBinaryOutcome {
                        column: name.clone(),
                        row,
                        value: s.to_owned(),
                    })
                }
            },
            ColumnKind::NumericCovariate => match s.parse::<f64>() {
                Ok(v) if v.is_finite() => Value::Numeric(v),
                _ => {
                    return Err(Error::Data(format!(
                        "non-numeric value `{s}` in column `{name}` at row {row}"
                    )))
                }
            },
            _ => Value::Label(s.to_owned()),
        });
    }
    let group = field(group_idx, "group")?.to_owned();
    let weight = match weight_idx {
        None => 1.0,
        Some(idx) => {
            let s = field(idx, "weight")?;
            match s.parse::<f64>() {
                Ok(w) if w.is_finite() && w > 0.0 => w,
                _ => return Err(Error::InvalidWeight { row, value: s.to_owned() }),
            }
        }
    };
    Ok((values, group, weight))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Covariate, RowFilter};

    fn spec() -> ModelSpec {
        ModelSpec::new("y", vec![Covariate::numeric("x")], "grp", "a", "d").with_weight("w")
    }

    const GOOD: &str = "y,grp,x,w\n1,a,0.5,2\n0,a,1.5,1\n1,a,2.0,1\n0,d,0.1,3\n0,d,0.2,1\n1,d,0.9,1\n";

    #[test]
    fn loads_valid_file() {
        let ds = read_dataset(GOOD.as_bytes(), &spec()).unwrap();
        assert_eq!(ds.n(), 6);
        assert_eq!(ds.weights(), &[2.0, 1.0, 1.0, 3.0, 1.0, 1.0]);
        assert_eq!(ds.group_sample("d").unwrap().indices, vec![3, 4, 5]);
    }

    #[test]
    fn rejects_non_binary_outcome() {
        let bad = GOOD.replace("1,a,2.0,1", "2,a,2.0,1");
        let err = read_dataset(bad.as_bytes(), &spec()).unwrap_err();
        assert!(matches!(err, Error::NonBinaryOutcome { .. }), "{err}");
        assert!(err.to_string().contains("non-binary outcome"));
    }

    #[test]
    fn absent_weight_column_means_unit_weights() {
        let data = "y,grp,x\n1,a,0.5\n0,a,1.5\n0,d,0.1\n1,d,0.9\n";
        let mut s = spec();
        s.weight = None;
        let ds = read_dataset(data.as_bytes(), &s).unwrap();
        assert!(ds.weights().iter().all(|&w| w == 1.0));
    }

    #[test]
    fn error_paths() {
        let missing_col = "y,grp,w\n1,a,1\n";
        assert!(matches!(read_dataset(missing_col.as_bytes(), &spec()), Err(Error::MissingColumn(c)) if c == "x"));
        let bad_w = GOOD.replace("0,d,0.2,1", "0,d,0.2,0");
        assert!(matches!(read_dataset(bad_w.as_bytes(), &spec()), Err(Error::InvalidWeight { .. })));
        let empty = "y,grp,x,w\n";
        assert!(matches!(read_dataset(empty.as_bytes(), &spec()), Err(Error::EmptyFile)));
        let one_group = "y,grp,x,w\n1,a,0.5,2\n0,a,1.5,1\n";
        assert!(matches!(read_dataset(one_group.as_bytes(), &spec()), Err(Error::Data(_))));
    }

    #[test]
    fn missing_values_strict_vs_lenient() {
        let data = GOOD.replace("0,a,1.5,1", "0,a,NA,1");
        assert!(read_dataset(data.as_bytes(), &spec()).is_err());
        let mut s = spec();
        s.missing = MissingPolicy::Lenient;
        let ds = read_dataset(data.as_bytes(), &s).unwrap();
        assert_eq!(ds.n(), 5);
        assert_eq!(ds.dropped_rows(), 1);
    }

    #[test]
    fn row_filter_drops_out_of_range_rows() {
        let mut s = spec();
        s.filters.push(RowFilter { column: "x".into(), min: Some(0.15), max: Some(1.9) });
        let ds = read_dataset(GOOD.as_bytes(), &s).unwrap();
        assert_eq!(ds.n(), 4);
        assert_eq!(ds.dropped_rows(), 0);
    }

    #[test]
    fn numeric_levels_sort_by_value() {
        let l = Levels::from_values(["10", "2", "1"].into_iter());
        assert_eq!(l.labels(), &["1", "2", "10"]);
    }
}
