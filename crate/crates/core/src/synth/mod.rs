//! Synthetic microdata with known data-generating processes, and
//! exhaustive reference decompositions for small instances.

mod dgp;
mod oracle;

pub use dgp::{generate, BetaSpec, CategoricalVar, DgpSpec, GroupDgp, NormalDist, WeightScheme};
pub use oracle::{oracle_chain, oracle_decompose, oracle_decompose_with, OracleLimits};
