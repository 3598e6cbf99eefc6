//! Data ingestion, design-matrix encoding and weighted descriptive statistics.

mod dataset;
mod design;
mod summary;

pub use dataset::{load_dataset, read_dataset, Column, ColumnKind, Dataset, GroupSample, Levels};
pub use design::{encode_design, encode_design_with, Block, BlockRole, DesignMatrix, EncodeOptions, INTERCEPT};
pub use summary::{
    two_sample_t, weighted_mean_se, weighted_summary, GroupStat, PairStat, Stars, SummaryRow, SummaryTable,
};
