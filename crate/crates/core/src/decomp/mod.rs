//! Gap decomposition engine.
//!
//! Group `a` is the reference (advantaged) group and `d` the comparison
//! group; gaps are always `a - d`.

mod aggregate;
mod bootstrap;
mod detailed;
mod matching;
mod oaxaca;
mod pipeline;

use serde::{Deserialize, Serialize};

use crate::dataio::Stars;
use crate::error::{Error, Result};
use crate::probit::LinkFunction;

pub use aggregate::{fairlie_aggregate, AggregateDecomposition, Direction};
pub use bootstrap::{bootstrap, sample_sd, BootstrapSummary};
pub use detailed::{fairlie_detailed, reporting_blocks, DetailedDecomposition, IterationDetail, ReportingBlock};
pub use matching::{draw_matched_subsample, match_subset, MatchedPair, Matcher};
pub use oaxaca::{oaxaca_blinder, LinearDecomposition};
pub use pipeline::decompose;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Ordering {
    /// A fresh random block order every iteration.
    #[default]
    Randomized,
    /// Blocks swapped in declaration order.
    Fixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CoefficientSource {
    #[default]
    Pooled,
    GroupA,
    GroupD,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Matching {
    /// Pair rows by rank of predicted probability.
    #[default]
    Rank,
    /// Pair rows at random (sensitivity runs).
    Random,
}

/// Several variables reported (and swapped) as one block.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockGroup {
    pub name: String,
    pub variables: Vec<String>,
}

fn default_iterations() -> usize {
    1000
}

fn default_reps() -> usize {
    1000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecompConfig {
    #[serde(default = "default_iterations")]
    pub iterations: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub ordering: Ordering,
    #[serde(default)]
    pub coefficient_source: CoefficientSource,
    #[serde(default)]
    pub matching: Matching,
    /// 0 disables the bootstrap.
    #[serde(default = "default_reps")]
    pub bootstrap_reps: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub block_map: Vec<BlockGroup>,
    /// Add group dummies to the pooled model. They are held at zero in the
    /// swap chain.
    #[serde(default)]
    pub include_group_indicators: bool,
    #[serde(default)]
    pub link: LinkFunction,
}

impl Default for DecompConfig {
    fn default() -> Self {
        DecompConfig {
            iterations: default_iterations(),
            seed: 0,
            ordering: Ordering::Randomized,
            coefficient_source: CoefficientSource::Pooled,
            matching: Matching::Rank,
            bootstrap_reps: default_reps(),
            block_map: Vec::new(),
            include_group_indicators: false,
            link: LinkFunction::Probit,
        }
    }
}

impl DecompConfig {
    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::Config("iterations must be at least 1".into()));
        }
        if self.bootstrap_reps == 1 {
            return Err(Error::Config("bootstrap_reps must be 0 (disabled) or at least 2".into()));
        }
        Ok(())
    }
}

/// One reported row of a detailed decomposition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockContribution {
    pub block: String,
    pub variables: Vec<String>,
    /// Mean over iterations of the block's contribution (probability scale).
    pub estimate: f64,
    pub se: Option<f64>,
    pub stars: Stars,
    /// `100 * estimate / total_gap`; absent when the gap is zero.
    pub pct_explained: Option<f64>,
    /// Standard deviation of the contribution across iterations.
    pub iteration_sd: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnexplainedBasis {
    /// `unexplained = model_gap - explained`, with group-specific fits.
    ModelGap,
    /// Group-specific fits unavailable; `unexplained = total_gap - explained`.
    RawGap,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitDiagnostics {
    pub converged: bool,
    pub iterations: usize,
    pub loglik: f64,
    pub gradient_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapDiagnostics {
    pub reps: usize,
    pub failed: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionResult {
    pub outcome: String,
    pub reference_group: String,
    pub comparison_group: String,
    pub n_reference: usize,
    pub n_comparison: usize,
    /// Weighted outcome rate of each group.
    pub mean_reference: f64,
    pub mean_comparison: f64,
    /// Raw gap `mean_reference - mean_comparison`.
    pub total_gap: f64,
    pub total_gap_se: Option<f64>,
    /// Gap in group-average predicted probabilities under each group's own
    /// coefficients, when both group fits succeed.
    pub model_gap: Option<f64>,
    pub explained_total: f64,
    pub explained_total_se: Option<f64>,
    pub explained_stars: Stars,
    pub unexplained_total: f64,
    pub unexplained_basis: UnexplainedBasis,
    pub total_pct_explained: Option<f64>,
    pub contributions: Vec<BlockContribution>,
    /// Aggregate decompositions with group-specific coefficients.
    pub aggregate_a_weighted: Option<AggregateDecomposition>,
    pub aggregate_d_weighted: Option<AggregateDecomposition>,
    pub coefficient_fit: FitDiagnostics,
    pub bootstrap: Option<BootstrapDiagnostics>,
    pub config: DecompConfig,
}

/// `100 * part / whole`, absent when `whole` is zero.
pub fn percent_of(part: f64, whole: f64) -> Option<f64> {
    (whole != 0.0 && whole.is_finite()).then(|| 100.0 * part / whole)
}
