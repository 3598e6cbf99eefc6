use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::matching::{MatchedPair, Matcher};
use super::{BlockGroup, DecompConfig, Ordering};
use crate::dataio::{BlockRole, DesignMatrix};
use crate::error::{Error, Result};
use crate::probit::{dot, FittedProbit, LinkFunction};
use crate::rng::{self, Domain};

/// A set of design columns swapped together and reported as one row.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportingBlock {
    pub name: String,
    pub variables: Vec<String>,
    pub columns: Vec<usize>,
}

/// Groups the covariate blocks of `dm` into reporting blocks. Variables not
/// named in `block_map` form a block of their own; a mapped group sits at
/// the position of its first member.
pub fn reporting_blocks(dm: &DesignMatrix, block_map: &[BlockGroup]) -> Result<Vec<ReportingBlock>> {
    let covariates: Vec<_> = dm.blocks().iter().filter(|b| b.role == BlockRole::Covariate).collect();
    let mut seen = std::collections::HashSet::new();
    for g in block_map {
        for v in &g.variables {
            if !covariates.iter().any(|b| &b.name == v) {
                return Err(Error::Config(format!("block `{}` names unknown variable `{v}`", g.name)));
            }
            if !seen.insert(v.as_str()) {
                return Err(Error::Config(format!("variable `{v}` appears in more than one block")));
            }
        }
    }
    let mut out: Vec<ReportingBlock> = Vec::new();
    for b in covariates {
        let cols = b.columns.clone();
        match block_map.iter().find(|g| g.variables.contains(&b.name)) {
            Some(g) => match out.iter_mut().find(|r| r.name == g.name) {
                Some(r) => {
                    r.variables.push(b.name.clone());
                    r.columns.extend(cols);
                }
                None => out.push(ReportingBlock {
                    name: g.name.clone(),
                    variables: vec![b.name.clone()],
                    columns: cols.collect(),
                }),
            },
            None => out.push(ReportingBlock {
                name: b.name.clone(),
                variables: vec![b.name.clone()],
                columns: cols.collect(),
            }),
        }
    }
    Ok(out)
}

/// Outcome of one subsample iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationDetail {
    /// Block indices in swap order.
    pub order: Vec<usize>,
    /// Contribution of each block (indexed like the reporting blocks).
    pub contributions: Vec<f64>,
    /// Mean F(x_a b) - mean F(x_d b) over the matched pairs, evaluated from
    /// full rows.
    pub matched_explained: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetailedDecomposition {
    pub blocks: Vec<ReportingBlock>,
    /// Mean contribution per block over iterations.
    pub estimates: Vec<f64>,
    /// Across-iteration standard deviation per block.
    pub iteration_sd: Vec<f64>,
    /// Mean over iterations of the summed contributions.
    pub explained_total: f64,
    pub n_pairs: usize,
    pub iterations: Vec<IterationDetail>,
}

/// Per-row pieces of the linear index: one partial sum per reporting block.
struct Partials {
    k: usize,
    values: Vec<f64>,
}

impl Partials {
    fn new(dm: &DesignMatrix, blocks: &[ReportingBlock], beta: &[f64]) -> Partials {
        let k = blocks.len();
        let mut values = Vec::with_capacity(dm.n() * k);
        for i in 0..dm.n() {
            let x = dm.row(i);
            for b in blocks {
                values.push(b.columns.iter().map(|&j| x[j] * beta[j]).sum());
            }
        }
        Partials { k, values }
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.k..(i + 1) * self.k]
    }
}

/// Detailed non-linear decomposition with sequential block swaps.
///
/// Each iteration draws a matched sample, fixes a block order, and walks
/// from every pair's group-`a` row to its group-`d` row one block at a
/// time; a block is credited with the weighted mean drop in `F` caused by
/// its swap. Pair weights are the comparison-group row weights. Group
/// indicator columns are held at zero throughout.
pub fn fairlie_detailed(
    model: &FittedProbit,
    dm_a: &DesignMatrix,
    dm_d: &DesignMatrix,
    cfg: &DecompConfig,
) -> Result<DetailedDecomposition> {
    if cfg.iterations == 0 {
        return Err(Error::Config("iterations must be at least 1".into()));
    }
    if !dm_a.aligned_with(dm_d) {
        return Err(Error::DimensionMismatch("group design matrices are not column-aligned".into()));
    }
    if model.beta.len() != dm_a.p() {
        return Err(Error::DimensionMismatch("coefficients do not match design columns".into()));
    }
    if !model.converged {
        return Err(Error::NotConverged(model.gradient_norm));
    }
    let link = model.link;
    let blocks = reporting_blocks(dm_a, &cfg.block_map)?;
    let k = blocks.len();

    // Coefficients with group indicators zeroed.
    let mut beta = model.beta.clone();
    for b in dm_a.blocks().iter().filter(|b| b.role == BlockRole::GroupIndicator) {
        for j in b.columns.clone() {
            beta[j] = 0.0;
        }
    }
    let mut base = 0.0;
    let in_block: Vec<bool> = {
        let mut v = vec![false; dm_a.p()];
        blocks.iter().flat_map(|b| &b.columns).for_each(|&j| v[j] = true);
        v
    };
    for (j, &covered) in in_block.iter().enumerate() {
        if !covered {
            // intercept (and zeroed indicators): identical for every row
            base += dm_a.get(0, j) * beta[j];
        }
    }

    let index_a: Vec<f64> = (0..dm_a.n()).map(|i| dot(dm_a.row(i), &beta)).collect();
    let index_d: Vec<f64> = (0..dm_d.n()).map(|i| dot(dm_d.row(i), &beta)).collect();
    let pred_a: Vec<f64> = index_a.iter().map(|&z| link.cdf(z)).collect();
    let pred_d: Vec<f64> = index_d.iter().map(|&z| link.cdf(z)).collect();
    let matcher = Matcher::new(&pred_a, &pred_d)?;
    let part_a = Partials::new(dm_a, &blocks, &beta);
    let part_d = Partials::new(dm_d, &blocks, &beta);
    // chain end points, shared by every iteration
    let end_point = |p: &Partials, i: usize| link.cdf(base + p.row(i).iter().sum::<f64>());
    let ends_a: Vec<f64> = (0..dm_a.n()).map(|i| end_point(&part_a, i)).collect();
    let ends_d: Vec<f64> = (0..dm_d.n()).map(|i| end_point(&part_d, i)).collect();

    let chain = |it: usize| -> IterationDetail {
        let mut rng = rng::stream(cfg.seed, Domain::Iteration, it as u64);
        let pairs = matcher.draw(&mut rng, cfg.matching);
        let mut order: Vec<usize> = (0..k).collect();
        if cfg.ordering == Ordering::Randomized {
            order.shuffle(&mut rng);
        }
        let (contributions, matched_explained) =
            walk_chain(&pairs, &order, base, &part_a, &part_d, dm_d.w(), &pred_a, &pred_d, &ends_a, &ends_d, link);
        IterationDetail { order, contributions, matched_explained }
    };
    let iterations: Vec<IterationDetail> = (0..cfg.iterations).into_par_iter().map(chain).collect();

    let m = iterations.len() as f64;
    let estimates: Vec<f64> =
        (0..k).map(|b| iterations.iter().map(|it| it.contributions[b]).sum::<f64>() / m).collect();
    let iteration_sd = (0..k)
        .map(|b| {
            let xs: Vec<f64> = iterations.iter().map(|it| it.contributions[b]).collect();
            super::bootstrap::sample_sd(&xs)
        })
        .collect();
    let explained_total =
        iterations.iter().map(|it| it.contributions.iter().sum::<f64>()).sum::<f64>() / m;
    Ok(DetailedDecomposition {
        blocks,
        estimates,
        iteration_sd,
        explained_total,
        n_pairs: matcher.n_pairs(),
        iterations,
    })
}

#[allow(clippy::too_many_arguments)]
fn walk_chain(
    pairs: &[MatchedPair],
    order: &[usize],
    base: f64,
    part_a: &Partials,
    part_d: &Partials,
    weights_d: &[f64],
    pred_a: &[f64],
    pred_d: &[f64],
    ends_a: &[f64],
    ends_d: &[f64],
    link: LinkFunction,
) -> (Vec<f64>, f64) {
    let k = order.len();
    let mut sums = vec![0.0; k];
    let mut total_w = 0.0;
    let mut direct = 0.0;
    for pair in pairs {
        let w = weights_d[pair.index_d];
        let (pa, pd) = (part_a.row(pair.index_a), part_d.row(pair.index_d));
        let mut z = base + pa.iter().sum::<f64>();
        let mut prev = ends_a[pair.index_a];
        for (step, &b) in order.iter().enumerate() {
            z += pd[b] - pa[b];
            let cur = if step + 1 == k { ends_d[pair.index_d] } else { link.cdf(z) };
            sums[b] += w * (prev - cur);
            prev = cur;
        }
        direct += w * (pred_a[pair.index_a] - pred_d[pair.index_d]);
        total_w += w;
    }
    sums.iter_mut().for_each(|s| *s /= total_w);
    (sums, direct / total_w)
}
