use serde::{Deserialize, Serialize};

use crate::dataio::DesignMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearDecomposition {
    /// `(mean_a - mean_d) . beta_a`
    pub explained: f64,
    /// `mean_d . (beta_a - beta_d)`
    pub unexplained: f64,
    /// Per-column terms of `explained`.
    pub explained_by_column: Vec<f64>,
    /// Per-column terms of `unexplained`.
    pub unexplained_by_column: Vec<f64>,
}

impl LinearDecomposition {
    pub fn from_means(mean_a: &[f64], mean_d: &[f64], coef_a: &[f64], coef_d: &[f64]) -> Result<Self> {
        let p = mean_a.len();
        if mean_d.len() != p || coef_a.len() != p || coef_d.len() != p {
            return Err(Error::DimensionMismatch("means and coefficients differ in length".into()));
        }
        let explained_by_column: Vec<f64> = (0..p).map(|j| (mean_a[j] - mean_d[j]) * coef_a[j]).collect();
        let unexplained_by_column: Vec<f64> = (0..p).map(|j| mean_d[j] * (coef_a[j] - coef_d[j])).collect();
        Ok(LinearDecomposition {
            explained: explained_by_column.iter().sum(),
            unexplained: unexplained_by_column.iter().sum(),
            explained_by_column,
            unexplained_by_column,
        })
    }
}

/// Two-fold Oaxaca-Blinder decomposition on weighted covariate means.
pub fn oaxaca_blinder(
    dm_a: &DesignMatrix,
    dm_d: &DesignMatrix,
    coef_a: &[f64],
    coef_d: &[f64],
) -> Result<LinearDecomposition> {
    if !dm_a.aligned_with(dm_d) {
        return Err(Error::DimensionMismatch("group design matrices are not column-aligned".into()));
    }
    LinearDecomposition::from_means(&dm_a.weighted_means(), &dm_d.weighted_means(), coef_a, coef_d)
}
