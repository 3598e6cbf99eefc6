use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

use super::config::{OutputFormat, RunConfig};
use crate::dataio::{encode_design_with, load_dataset, weighted_summary, EncodeOptions, Stars, SummaryTable};
use crate::decomp::{decompose, percent_of, BlockContribution, DecompositionResult};
use crate::error::{Error, Result};
use crate::probit::{average_marginal_effects, fit, FitOptions, MarginalEffectsTable};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeEffects {
    pub outcome: String,
    pub table: MarginalEffectsTable,
}

/// Everything a run produces. The JSON export is this struct verbatim.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub seed: u64,
    pub config: RunConfig,
    pub rows_used: usize,
    pub rows_dropped: usize,
    pub summary: SummaryTable,
    /// Probit on all configured groups with group dummies, per outcome.
    pub marginal_effects: Vec<OutcomeEffects>,
    /// Outcome-major, then comparison groups in configured order.
    pub decompositions: Vec<DecompositionResult>,
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Report> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("report json: {e}")))
    }

    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Text => render_text(self),
            OutputFormat::Csv => render_csv(self),
            OutputFormat::Json => self.to_json(),
        }
    }

    fn outcomes(&self) -> Vec<&str> {
        let mut v: Vec<&str> = Vec::new();
        for d in &self.decompositions {
            if !v.contains(&d.outcome.as_str()) {
                v.push(&d.outcome);
            }
        }
        v
    }
}

/// Loads the data and produces summary, marginal-effect and decomposition
/// tables for every outcome and comparison group.
pub fn run(cfg: &RunConfig) -> Result<Report> {
    cfg.check()?;
    let m = &cfg.model;
    let base = cfg.model_spec(&m.comparison_groups[0]);
    let ds = load_dataset(&cfg.data, &base)?;
    let summary = weighted_summary(&ds, &base, &m.comparison_groups)?;

    let mut rows = Vec::new();
    for g in std::iter::once(&m.reference_group).chain(&m.comparison_groups) {
        rows.extend(ds.group_sample(g)?.indices);
    }
    rows.sort_unstable();
    rows.dedup();

    let mut marginal_effects = Vec::new();
    let mut decompositions = Vec::new();
    for outcome in base.outcomes() {
        let mut spec = base.clone();
        spec.outcome = outcome.to_owned();
        let dm = encode_design_with(&ds, &spec, Some(&rows), &EncodeOptions { group_indicators: true })?;
        let model = fit(&dm, &FitOptions::default())?;
        let table = average_marginal_effects(&model, &dm)?;
        marginal_effects.push(OutcomeEffects { outcome: outcome.to_owned(), table });
        for comparison in &m.comparison_groups {
            spec.comparison_group = comparison.clone();
            decompositions.push(decompose(&ds, &spec, &cfg.decomp)?);
        }
    }
    Ok(Report {
        seed: cfg.decomp.seed,
        config: cfg.clone(),
        rows_used: ds.n(),
        rows_dropped: ds.dropped_rows(),
        summary,
        marginal_effects,
        decompositions,
    })
}

pub fn format_estimate(value: f64, stars: Stars) -> String {
    format!("{value:.3}{stars}")
}

/// `0.070*** (0.002)`; the parenthesised part is omitted without an SE.
pub fn format_cell(value: f64, se: Option<f64>, stars: Stars) -> String {
    match se {
        Some(se) => format!("{} ({se:.3})", format_estimate(value, stars)),
        None => format_estimate(value, stars),
    }
}

pub fn format_percent(value: Option<f64>, decimals: usize) -> String {
    value.map_or(String::new(), |v| format!("{v:.decimals$}"))
}

/// One block of a decomposition column: `0.070*** (0.002)  45.8`.
pub fn format_contribution(c: &BlockContribution, total_gap: f64) -> String {
    let pct = format_percent(percent_of(c.estimate, total_gap), 1);
    format!("{}  {pct}", format_cell(c.estimate, c.se, c.stars)).trim_end().to_owned()
}

/// Plain-text table with a header row and left-aligned columns.
#[derive(Debug, Clone, Default)]
pub struct TextTable {
    pub title: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub notes: Vec<String>,
}

impl TextTable {
    /// Cell of the first row whose label is `label`.
    pub fn cell(&self, label: &str, column: usize) -> Option<&str> {
        self.rows.iter().find(|r| r[0] == label).and_then(|r| r.get(column)).map(String::as_str)
    }
}

impl fmt::Display for TextTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ncol = self.rows.iter().map(Vec::len).chain([self.header.len()]).max().unwrap_or(0);
        let mut width = vec![0; ncol];
        for row in std::iter::once(&self.header).chain(&self.rows) {
            for (j, c) in row.iter().enumerate() {
                width[j] = width[j].max(c.chars().count());
            }
        }
        let line = |f: &mut fmt::Formatter<'_>, row: &[String]| -> fmt::Result {
            let mut s = String::new();
            for (j, c) in row.iter().enumerate() {
                let _ = write!(s, "{c:<w$}  ", w = width[j]);
            }
            writeln!(f, "{}", s.trim_end())
        };
        let total: usize = width.iter().map(|w| w + 2).sum::<usize>().saturating_sub(2);
        writeln!(f, "{}", self.title)?;
        writeln!(f, "{}", "-".repeat(total))?;
        line(f, &self.header)?;
        writeln!(f, "{}", "-".repeat(total))?;
        for r in &self.rows {
            line(f, r)?;
        }
        writeln!(f, "{}", "-".repeat(total))?;
        for n in &self.notes {
            writeln!(f, "{n}")?;
        }
        Ok(())
    }
}

const STAR_NOTE: &str = "***, ** and * mark significance at the 1, 5 and 10 percent levels.";

pub fn summary_table(s: &SummaryTable) -> TextTable {
    let mut header = vec!["Variables".to_owned()];
    header.extend(s.groups.iter().enumerate().map(|(i, g)| format!("{g}({})", i + 1)));
    header.extend((2..=s.groups.len()).map(|i| format!("(1)-({i})")));
    let mut rows = Vec::new();
    for r in &s.rows {
        let mut row = vec![r.variable.clone()];
        row.extend(r.stats.iter().map(|g| format!("{:.3} [{:.3}]", g.mean, g.se)));
        row.extend(r.differences.iter().map(|d| format_estimate(d.difference, d.stars)));
        rows.push(row);
    }
    let mut obs = vec!["Observations".to_owned()];
    obs.extend(s.observations.iter().map(usize::to_string));
    rows.push(obs);
    TextTable {
        title: "Weighted means by group".into(),
        header,
        rows,
        notes: vec![
            "Standard errors in brackets; differences tested with two-sample t statistics.".into(),
            STAR_NOTE.into(),
        ],
    }
}

pub fn marginal_effects_table(effects: &[OutcomeEffects]) -> TextTable {
    let mut header = vec!["Variables".to_owned()];
    header.extend(effects.iter().map(|e| e.outcome.clone()));
    let mut rows = Vec::new();
    let Some(first) = effects.first() else {
        return TextTable { title: "Average marginal effects (probit)".into(), header, ..Default::default() };
    };
    let mut last_var = None;
    for (k, e) in first.table.effects.iter().enumerate() {
        if last_var != Some(&e.variable) {
            if let Some(r) = &e.reference {
                rows.push(vec![format!("{}: reference = {r}", e.variable)]);
            }
            last_var = Some(&e.variable);
        }
        let mut row = vec![e.column.clone()];
        row.extend(effects.iter().map(|o| {
            o.table.effects.get(k).map_or(String::new(), |x| format_cell(x.ame, Some(x.se), x.stars))
        }));
        rows.push(row);
    }
    let mut obs = vec!["Observations".to_owned()];
    obs.extend(effects.iter().map(|e| e.table.observations.to_string()));
    rows.push(obs);
    TextTable {
        title: "Average marginal effects (probit)".into(),
        header,
        rows,
        notes: vec!["Robust standard errors in parentheses.".into(), STAR_NOTE.into()],
    }
}

/// Side-by-side decompositions of one outcome, one column per comparison.
/// Rows: gap (percentage points), one per block with percent of the gap
/// explained, total explained, unexplained and observations.
pub fn decomposition_table(results: &[&DecompositionResult]) -> TextTable {
    let outcome = results.first().map_or("", |r| r.outcome.as_str());
    let mut header = vec!["Variables".to_owned()];
    header.extend(results.iter().map(|r| format!("{}-{} | % explained", r.reference_group, r.comparison_group)));
    let mut rows = Vec::new();
    let mut gap = vec![format!("Gap in {outcome} (pp)")];
    gap.extend(results.iter().map(|r| format!("{:.1}", 100.0 * r.total_gap)));
    rows.push(gap);

    let mut blocks: Vec<&str> = Vec::new();
    for r in results {
        for c in &r.contributions {
            if !blocks.contains(&c.block.as_str()) {
                blocks.push(&c.block);
            }
        }
    }
    // estimate cells padded per column so the percentages line up
    let mut cells: Vec<Vec<(String, String)>> = Vec::new();
    let mut labels: Vec<String> = blocks.iter().map(|b| b.to_string()).collect();
    for b in &blocks {
        cells.push(
            results
                .iter()
                .map(|r| {
                    r.contributions.iter().find(|c| c.block == *b).map_or((String::new(), String::new()), |c| {
                        (format_cell(c.estimate, c.se, c.stars), format_percent(percent_of(c.estimate, r.total_gap), 1))
                    })
                })
                .collect(),
        );
    }
    labels.push("Total explained".into());
    cells.push(
        results
            .iter()
            .map(|r| {
                (
                    format_cell(r.explained_total, r.explained_total_se, r.explained_stars),
                    format_percent(percent_of(r.explained_total, r.total_gap), 1),
                )
            })
            .collect(),
    );
    for (label, row_cells) in labels.into_iter().zip(&cells) {
        let mut row = vec![label];
        for (j, (cell, pct)) in row_cells.iter().enumerate() {
            let wc = cells.iter().map(|r| r[j].0.chars().count()).max().unwrap_or(0);
            let wp = cells.iter().map(|r| r[j].1.chars().count()).max().unwrap_or(0);
            row.push(format!("{cell:<wc$}  {pct:>wp$}").trim_end().to_owned());
        }
        rows.push(row);
    }
    let mut unexplained = vec!["Unexplained".to_owned()];
    unexplained.extend(results.iter().map(|r| format!("{:.3}", r.unexplained_total)));
    rows.push(unexplained);
    let mut obs = vec!["Observations".to_owned()];
    obs.extend(results.iter().map(|r| format!("{} + {}", r.n_reference, r.n_comparison)));
    rows.push(obs);

    let mut notes = Vec::new();
    match results.first().and_then(|r| r.bootstrap.as_ref()) {
        Some(b) => notes.push(format!(
            "Bootstrap standard errors in parentheses ({} replications, {} failed).",
            b.reps, b.failed
        )),
        None => notes.push("No bootstrap; standard errors omitted.".into()),
    }
    if let Some(r) = results.first() {
        notes.push(format!("Contributions averaged over {} iterations; seed {}.", r.config.iterations, r.config.seed));
    }
    notes.push(STAR_NOTE.into());
    TextTable { title: format!("Decomposition of the gap in {outcome}"), header, rows, notes }
}

fn render_text(r: &Report) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# seed = {}", r.seed);
    let _ = writeln!(s, "# rows used = {}, rows dropped = {}", r.rows_used, r.rows_dropped);
    for line in r.config.to_toml().lines() {
        let _ = writeln!(s, "# {line}");
    }
    let _ = writeln!(s);
    let _ = writeln!(s, "{}", summary_table(&r.summary));
    let _ = writeln!(s, "{}", marginal_effects_table(&r.marginal_effects));
    for o in r.outcomes() {
        let cols: Vec<&DecompositionResult> = r.decompositions.iter().filter(|d| d.outcome == o).collect();
        let _ = writeln!(s, "{}", decomposition_table(&cols));
    }
    s
}

/// Long-format export, one value per line with its unit, full precision.
fn render_csv(r: &Report) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut put = |section: &str, outcome: &str, group: &str, row: &str, stat: &str, unit: &str, value: String| {
        w.write_record([section, outcome, group, row, stat, unit, &value]).expect("in-memory write");
    };
    put("section", "outcome", "group", "row", "statistic", "unit", "value".into());
    put("run", "", "", "", "seed", "", r.seed.to_string());
    let s = &r.summary;
    for (g, n) in s.groups.iter().zip(&s.observations) {
        put("summary", "", g, "observations", "n", "count", n.to_string());
    }
    for row in &s.rows {
        for (g, st) in s.groups.iter().zip(&row.stats) {
            put("summary", "", g, &row.variable, "mean", "", st.mean.to_string());
            put("summary", "", g, &row.variable, "se", "", st.se.to_string());
        }
        for (g, d) in s.groups[1..].iter().zip(&row.differences) {
            put("summary", "", g, &row.variable, "difference", "", d.difference.to_string());
            put("summary", "", g, &row.variable, "t", "", d.t.to_string());
            put("summary", "", g, &row.variable, "stars", "", d.stars.to_string());
        }
    }
    for e in &r.marginal_effects {
        for x in &e.table.effects {
            put("marginal_effects", &e.outcome, "", &x.column, "ame", "probability", x.ame.to_string());
            put("marginal_effects", &e.outcome, "", &x.column, "se", "probability", x.se.to_string());
            put("marginal_effects", &e.outcome, "", &x.column, "stars", "", x.stars.to_string());
        }
    }
    let opt = |v: Option<f64>| v.map_or(String::new(), |v| v.to_string());
    for d in &r.decompositions {
        let g = d.comparison_group.as_str();
        let o = d.outcome.as_str();
        put("decomposition", o, g, "gap", "estimate", "proportion", d.total_gap.to_string());
        put("decomposition", o, g, "gap", "se", "proportion", opt(d.total_gap_se));
        for c in &d.contributions {
            put("decomposition", o, g, &c.block, "estimate", "proportion", c.estimate.to_string());
            put("decomposition", o, g, &c.block, "se", "proportion", opt(c.se));
            put("decomposition", o, g, &c.block, "stars", "", c.stars.to_string());
            put("decomposition", o, g, &c.block, "pct_explained", "percent", opt(c.pct_explained));
            put("decomposition", o, g, &c.block, "iteration_sd", "proportion", c.iteration_sd.to_string());
        }
        put("decomposition", o, g, "total_explained", "estimate", "proportion", d.explained_total.to_string());
        put("decomposition", o, g, "total_explained", "se", "proportion", opt(d.explained_total_se));
        put("decomposition", o, g, "total_explained", "pct_explained", "percent", opt(d.total_pct_explained));
        put("decomposition", o, g, "unexplained", "estimate", "proportion", d.unexplained_total.to_string());
        put("decomposition", o, g, "observations", "n_reference", "count", d.n_reference.to_string());
        put("decomposition", o, g, "observations", "n_comparison", "count", d.n_comparison.to_string());
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cell_formats() {
        assert_eq!(format_cell(0.0701, Some(0.0021), Stars::One), "0.070*** (0.002)");
        assert_eq!(format_cell(-0.0049, Some(0.0021), Stars::Five), "-0.005** (0.002)");
        assert_eq!(format_cell(0.5, None, Stars::None), "0.500");
        assert_eq!(format_percent(Some(45.75), 1), "45.8");
        assert_eq!(format_percent(None, 1), "");
    }

    #[test]
    fn table_alignment() {
        let t = TextTable {
            title: "t".into(),
            header: vec!["a".into(), "bb".into()],
            rows: vec![vec!["long label".into(), "x".into()]],
            notes: vec![],
        };
        let s = t.to_string();
        assert!(s.contains("a           bb\n"), "{s}");
        assert!(s.contains("long label  x\n"));
        assert_eq!(t.cell("long label", 1), Some("x"));
    }
}
