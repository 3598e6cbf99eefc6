use serde::{Deserialize, Serialize};

use crate::dataio::DesignMatrix;
use crate::error::{Error, Result};
use crate::probit::{dot, FittedProbit, LinkFunction};

/// Which group's coefficients weight the explained part.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// Explained part evaluated with group `a` coefficients.
    AWeighted,
    /// Explained part evaluated with group `d` coefficients.
    DWeighted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateDecomposition {
    pub direction: Direction,
    pub explained: f64,
    pub unexplained: f64,
}

/// Weighted mean of `F(x_i beta)` over a design.
pub(crate) fn mean_fitted(dm: &DesignMatrix, beta: &[f64], link: LinkFunction) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..dm.n() {
        let w = dm.w()[i];
        num += w * link.cdf(dot(dm.row(i), beta));
        den += w;
    }
    num / den
}

/// Aggregate non-linear decomposition with group-specific coefficients.
///
/// `AWeighted`: explained = E_a F(X b_a) - E_d F(X b_a),
/// unexplained = E_d F(X b_a) - E_d F(X b_d).
///
/// `DWeighted`: explained = E_a F(X b_d) - E_d F(X b_d),
/// unexplained = E_a F(X b_a) - E_a F(X b_d).
///
/// In both directions the two parts add up to E_a F(X b_a) - E_d F(X b_d).
pub fn fairlie_aggregate(
    model_a: &FittedProbit,
    model_d: &FittedProbit,
    dm_a: &DesignMatrix,
    dm_d: &DesignMatrix,
    direction: Direction,
) -> Result<AggregateDecomposition> {
    if !dm_a.aligned_with(dm_d) {
        return Err(Error::DimensionMismatch("group design matrices are not column-aligned".into()));
    }
    for (m, g) in [(model_a, "a"), (model_d, "d")] {
        if !m.converged {
            return Err(Error::NotConverged(m.gradient_norm));
        }
        if m.beta.len() != dm_a.p() {
            return Err(Error::DimensionMismatch(format!("group {g} model has wrong length")));
        }
    }
    if model_a.link != model_d.link {
        return Err(Error::Decomposition("group models use different links".into()));
    }
    let link = model_a.link;
    let (ba, bd) = (&model_a.beta, &model_d.beta);
    let (explained, unexplained) = match direction {
        Direction::AWeighted => {
            let cross = mean_fitted(dm_d, ba, link);
            (mean_fitted(dm_a, ba, link) - cross, cross - mean_fitted(dm_d, bd, link))
        }
        Direction::DWeighted => {
            let cross = mean_fitted(dm_a, bd, link);
            (cross - mean_fitted(dm_d, bd, link), mean_fitted(dm_a, ba, link) - cross)
        }
    };
    Ok(AggregateDecomposition { direction, explained, unexplained })
}
