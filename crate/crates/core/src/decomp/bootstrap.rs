use rand::RngExt;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{self, Domain};

/// Sample standard deviation (n - 1 denominator). Identical inputs give
/// exactly zero; fewer than two values give zero.
pub fn sample_sd(xs: &[f64]) -> f64 {
    if xs.len() < 2 || xs.iter().all(|&x| x == xs[0]) {
        return 0.0;
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapSummary {
    /// Standard error of each statistic across successful replicates.
    pub se: Vec<f64>,
    pub reps: usize,
    pub failed: usize,
}

/// Largest tolerated share of failed replicates.
const MAX_FAILURE_SHARE: f64 = 0.10;

/// Nonparametric bootstrap with resampling inside each group.
///
/// `groups` holds the row positions of each group. Replicate `r` draws, for
/// every group independently, as many positions with replacement as the
/// group has, from stream `(seed, Bootstrap, r)`, and passes the resampled
/// groups plus a replicate-specific seed to `statistic`. Replicates whose
/// statistic fails are skipped; more than 10% failures is an error.
pub fn bootstrap<F>(groups: &[&[usize]], reps: usize, seed: u64, statistic: F) -> Result<BootstrapSummary>
where
    F: Fn(&[Vec<usize>], u64) -> Result<Vec<f64>> + Sync,
{
    if reps < 2 {
        return Err(Error::Config("bootstrap needs at least 2 replicates".into()));
    }
    if groups.iter().any(|g| g.is_empty()) {
        return Err(Error::Decomposition("cannot resample an empty group".into()));
    }
    let results: Vec<Option<Vec<f64>>> = (0..reps)
        .into_par_iter()
        .map(|r| {
            let mut stream = rng::stream(seed, Domain::Bootstrap, r as u64);
            let resampled: Vec<Vec<usize>> = groups
                .iter()
                .map(|g| (0..g.len()).map(|_| g[stream.random_range(0..g.len())]).collect())
                .collect();
            statistic(&resampled, rng::child_seed(seed, Domain::Bootstrap, r as u64)).ok()
        })
        .collect();

    let ok: Vec<&Vec<f64>> = results.iter().flatten().collect();
    let failed = reps - ok.len();
    if failed as f64 > MAX_FAILURE_SHARE * reps as f64 || ok.len() < 2 {
        return Err(Error::BootstrapFailure { failed, reps });
    }
    let width = ok[0].len();
    if ok.iter().any(|v| v.len() != width) {
        return Err(Error::Decomposition("bootstrap statistic changed length".into()));
    }
    let se = (0..width)
        .map(|j| {
            let xs: Vec<f64> = ok.iter().map(|v| v[j]).collect();
            sample_sd(&xs)
        })
        .collect();
    Ok(BootstrapSummary { se, reps, failed })
}
