//! Weighted probit estimation.
//!
//! Per-observation sums run over fixed-size row chunks in parallel; the
//! chunk partials are then added in chunk order, so results do not depend
//! on the number of threads.

mod ame;
mod fit;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataio::DesignMatrix;
use crate::error::{Error, Result};
use crate::normal;

pub use ame::{average_marginal_effects, AmeMethod, MarginalEffect, MarginalEffectsTable};
pub use fit::{fit, fit_from, fit_with_link, robust_cov, FitOptions, FittedProbit};

/// Rows per partial sum.
pub(crate) const CHUNK: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum LinkFunction {
    #[default]
    Probit,
    /// Linear probability link `F(z) = z`; for oracle checks only.
    Identity,
}

impl LinkFunction {
    /// `F(z)`. The identity link is not clamped here.
    pub fn cdf(self, z: f64) -> f64 {
        match self {
            LinkFunction::Probit => normal::cdf(z),
            LinkFunction::Identity => z,
        }
    }

    pub fn pdf(self, z: f64) -> f64 {
        match self {
            LinkFunction::Probit => normal::pdf(z),
            LinkFunction::Identity => 1.0,
        }
    }

    /// Derivative of `pdf`.
    pub fn dpdf(self, z: f64) -> f64 {
        match self {
            LinkFunction::Probit => -z * normal::pdf(z),
            LinkFunction::Identity => 0.0,
        }
    }

    /// `F(z)` as a rate: identity output is clamped to `[0, 1]`.
    pub fn rate(self, z: f64) -> f64 {
        match self {
            LinkFunction::Probit => normal::cdf(z),
            LinkFunction::Identity => z.clamp(0.0, 1.0),
        }
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn check_len(beta: &[f64], dm: &DesignMatrix) -> Result<()> {
    if beta.len() != dm.p() {
        return Err(Error::DimensionMismatch(format!(
            "coefficient vector has {} entries, design has {} columns",
            beta.len(),
            dm.p()
        )));
    }
    Ok(())
}

/// `x_i . beta` for every row.
pub fn linear_index(beta: &[f64], dm: &DesignMatrix) -> Result<Vec<f64>> {
    check_len(beta, dm)?;
    Ok((0..dm.n()).map(|i| dot(dm.row(i), beta)).collect())
}

/// Runs `f` over row chunks in parallel and returns the partials in chunk order.
pub(crate) fn chunked<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(std::ops::Range<usize>) -> T + Sync,
{
    let chunks = n.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| f(c * CHUNK..((c + 1) * CHUNK).min(n)))
        .collect()
}

/// Weighted probit log-likelihood.
pub fn loglik(beta: &[f64], dm: &DesignMatrix) -> Result<f64> {
    check_len(beta, dm)?;
    let parts = chunked(dm.n(), |rows| {
        rows.map(|i| {
            let z = dot(dm.row(i), beta);
            let q = 2.0 * dm.y()[i] - 1.0;
            dm.w()[i] * normal::ln_cdf(q * z)
        })
        .sum::<f64>()
    });
    Ok(parts.into_iter().sum())
}

/// Score of observation `i` with respect to its linear index, and the
/// negated second derivative.
#[inline]
pub(crate) fn obs_terms(z: f64, y: f64) -> (f64, f64) {
    let q = 2.0 * y - 1.0;
    let lambda = q * normal::mills(q * z);
    (lambda, lambda * (lambda + z))
}

/// Analytic score vector.
pub fn gradient(beta: &[f64], dm: &DesignMatrix) -> Result<Vec<f64>> {
    Ok(derivatives(beta, dm)?.1)
}

/// Analytic Hessian of the log-likelihood.
pub fn hessian(beta: &[f64], dm: &DesignMatrix) -> Result<DMatrix<f64>> {
    Ok(derivatives(beta, dm)?.2)
}

/// Log-likelihood, score and Hessian in a single pass.
pub fn derivatives(beta: &[f64], dm: &DesignMatrix) -> Result<(f64, Vec<f64>, DMatrix<f64>)> {
    check_len(beta, dm)?;
    let p = dm.p();
    let parts = chunked(dm.n(), |rows| {
        let mut ll = 0.0;
        let mut g = vec![0.0; p];
        let mut h = vec![0.0; p * p];
        for i in rows {
            let x = dm.row(i);
            let w = dm.w()[i];
            let y = dm.y()[i];
            let z = dot(x, beta);
            ll += w * normal::ln_cdf((2.0 * y - 1.0) * z);
            let (lambda, d) = obs_terms(z, y);
            let gl = w * lambda;
            let hd = w * d;
            for j in 0..p {
                g[j] += gl * x[j];
                let hx = hd * x[j];
                if hx != 0.0 {
                    let row = &mut h[j * p..j * p + j + 1];
                    for (k, v) in row.iter_mut().enumerate() {
                        *v += hx * x[k];
                    }
                }
            }
        }
        (ll, g, h)
    });
    let mut ll = 0.0;
    let mut g = vec![0.0; p];
    let mut h = vec![0.0; p * p];
    for (pl, pg, ph) in parts {
        ll += pl;
        g.iter_mut().zip(&pg).for_each(|(a, b)| *a += b);
        h.iter_mut().zip(&ph).for_each(|(a, b)| *a += b);
    }
    let mut hess = DMatrix::zeros(p, p);
    for j in 0..p {
        for k in 0..=j {
            hess[(j, k)] = -h[j * p + k];
            hess[(k, j)] = -h[j * p + k];
        }
    }
    Ok((ll, g, hess))
}

/// Predicted probabilities `F(x_i beta)`.
pub fn predict(model: &FittedProbit, dm: &DesignMatrix) -> Result<Vec<f64>> {
    if model.beta.len() != dm.p() {
        return Err(Error::DimensionMismatch(format!(
            "model has {} coefficients, design has {} columns",
            model.beta.len(),
            dm.p()
        )));
    }
    Ok((0..dm.n()).map(|i| model.link.rate(dot(dm.row(i), &model.beta))).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_row(z: f64, y: f64) -> DesignMatrix {
        DesignMatrix::from_numeric(vec![1.0, z], 2, vec![y], vec![1.0]).unwrap()
    }

    #[test]
    fn loglik_at_zero_is_n_ln_half() {
        let dm = DesignMatrix::from_numeric(
            vec![1.0, 0.3, 1.0, -2.0, 1.0, 5.0],
            2,
            vec![1.0, 0.0, 1.0],
            vec![1.0; 3],
        )
        .unwrap();
        let ll = loglik(&[0.0, 0.0], &dm).unwrap();
        assert!((ll - 3.0 * 0.5f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn loglik_single_row() {
        let ll = loglik(&[0.0, 1.0], &one_row(1.96, 1.0)).unwrap();
        // ln(cdf(1.96))
        assert!((ll - (-0.025_315_649_164_282_115)).abs() < 1e-6);
    }

    #[test]
    fn doubling_weights_doubles_loglik() {
        let dm = DesignMatrix::from_numeric(vec![1.0, 0.3, 1.0, -2.0], 2, vec![1.0, 0.0], vec![1.5, 0.7]).unwrap();
        let dm2 = dm.with_weights(vec![3.0, 1.4]).unwrap();
        let b = [0.2, -0.4];
        assert_eq!(2.0 * loglik(&b, &dm).unwrap(), loglik(&b, &dm2).unwrap());
    }

    #[test]
    fn loglik_finite_in_tails() {
        for &z in &[-40.0, -35.0, 35.0, 40.0] {
            for &y in &[0.0, 1.0] {
                assert!(loglik(&[0.0, 1.0], &one_row(z, y)).unwrap().is_finite());
            }
        }
    }

    #[test]
    fn predict_rejects_column_mismatch() {
        let dm = one_row(0.0, 1.0);
        let model = FittedProbit::from_beta(vec![0.0, 1.0, 2.0], LinkFunction::Probit);
        assert!(matches!(predict(&model, &dm), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn predict_examples() {
        let model = FittedProbit::from_beta(vec![0.0, 1.0], LinkFunction::Probit);
        assert_eq!(predict(&model, &one_row(0.0, 1.0)).unwrap()[0], 0.5);
        assert!((predict(&model, &one_row(1.96, 1.0)).unwrap()[0] - 0.975).abs() < 1e-4);
        let id = FittedProbit::from_beta(vec![0.0, 1.0], LinkFunction::Identity);
        assert_eq!(predict(&id, &one_row(1.7, 1.0)).unwrap()[0], 1.0);
    }
}
