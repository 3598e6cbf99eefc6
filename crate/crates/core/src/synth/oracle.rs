//! Brute-force reference for the detailed decomposition.
//!
//! Shares nothing with `decomp` except the link's CDF: block grouping,
//! matching and the swap chain are re-derived here and every chain state is
//! evaluated from a freshly assembled row.

use crate::dataio::{encode_design_with, BlockRole, Dataset, DesignMatrix, EncodeOptions, Stars};
use crate::decomp::{
    percent_of, BlockContribution, DecompConfig, DecompositionResult, FitDiagnostics, Matching, Ordering,
    UnexplainedBasis,
};
use crate::error::{Error, Result};
use crate::model::ModelSpec;
use crate::probit::{fit_with_link, FitOptions, LinkFunction};

#[derive(Debug, Clone, Copy)]
pub struct OracleLimits {
    pub max_rows: usize,
    pub max_blocks: usize,
    pub max_subsets: u128,
}

impl Default for OracleLimits {
    fn default() -> Self {
        OracleLimits { max_rows: 2000, max_blocks: 3, max_subsets: 100_000 }
    }
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for i in 0..k {
        c = c * (n - i) as u128 / (i + 1) as u128;
        if c > u64::MAX as u128 {
            return c;
        }
    }
    c
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for rest in permutations(k - 1) {
        for pos in 0..=rest.len() {
            let mut p = rest.clone();
            p.insert(pos, k - 1);
            out.push(p);
        }
    }
    out.sort();
    out
}

/// Calls `f` with every `k`-subset of `0..n` in lexicographic order.
fn for_each_subset(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        let mut i = k;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
            if i == 0 {
                return;
            }
        }
        if idx[i] == i + n - k {
            return;
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

fn by_prediction(rows: &mut [usize], pred: &[f64]) {
    rows.sort_by(|&i, &j| pred[i].partial_cmp(&pred[j]).unwrap().then(i.cmp(&j)));
}

/// Exhaustive mean block contributions.
///
/// Averages the swap chain over every block ordering (or the given order
/// when `ordering` is `Fixed`) and every subsample of the larger group
/// (one census when the groups have equal size). Returns the mean
/// contributions and the contributions of every enumerated case.
pub fn oracle_chain(
    dm_a: &DesignMatrix,
    dm_d: &DesignMatrix,
    beta: &[f64],
    link: LinkFunction,
    blocks: &[Vec<usize>],
    ordering: Ordering,
    limits: &OracleLimits,
) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let (na, nd) = (dm_a.n(), dm_d.n());
    if na + nd > limits.max_rows || blocks.len() > limits.max_blocks {
        return Err(Error::TooLarge(format!("{} rows, {} blocks", na + nd, blocks.len())));
    }
    if na == 0 || nd == 0 {
        return Err(Error::Decomposition("empty group".into()));
    }
    let small = na.min(nd);
    let subsets = binomial(na.max(nd), small);
    if subsets > limits.max_subsets {
        return Err(Error::TooLarge(format!("{subsets} subsamples")));
    }
    let p = dm_a.p();
    let index = |x: &[f64]| -> f64 { (0..p).map(|j| x[j] * beta[j]).sum() };
    let pred_a: Vec<f64> = (0..na).map(|i| link.cdf(index(dm_a.row(i)))).collect();
    let pred_d: Vec<f64> = (0..nd).map(|i| link.cdf(index(dm_d.row(i)))).collect();
    let orders = match ordering {
        Ordering::Randomized => permutations(blocks.len()),
        Ordering::Fixed => vec![(0..blocks.len()).collect()],
    };

    let mut cases = Vec::new();
    let mut run = |pairs: &[(usize, usize)]| {
        for order in &orders {
            let mut contrib = vec![0.0; blocks.len()];
            let mut wsum = 0.0;
            for &(ia, id) in pairs {
                let w = dm_d.w()[id];
                wsum += w;
                let mut x = dm_a.row(ia).to_vec();
                let mut before = link.cdf(index(&x));
                for &b in order {
                    for &j in &blocks[b] {
                        x[j] = dm_d.get(id, j);
                    }
                    let after = link.cdf(index(&x));
                    contrib[b] += w * (before - after);
                    before = after;
                }
            }
            contrib.iter_mut().for_each(|c| *c /= wsum);
            cases.push(contrib);
        }
    };

    let mut sorted_d: Vec<usize> = (0..nd).collect();
    by_prediction(&mut sorted_d, &pred_d);
    let mut sorted_a: Vec<usize> = (0..na).collect();
    by_prediction(&mut sorted_a, &pred_a);
    if na >= nd {
        for_each_subset(na, nd, |sub| {
            let mut rows = sub.to_vec();
            by_prediction(&mut rows, &pred_a);
            let pairs: Vec<(usize, usize)> = rows.into_iter().zip(sorted_d.iter().copied()).collect();
            run(&pairs);
        });
    } else {
        for_each_subset(nd, na, |sub| {
            let mut rows = sub.to_vec();
            by_prediction(&mut rows, &pred_d);
            let pairs: Vec<(usize, usize)> = sorted_a.iter().copied().zip(rows).collect();
            run(&pairs);
        });
    }
    let m = cases.len() as f64;
    let mean = (0..blocks.len()).map(|b| cases.iter().map(|c| c[b]).sum::<f64>() / m).collect();
    Ok((mean, cases))
}

/// Reference decomposition for small instances: same inputs as
/// [`crate::decomp::decompose`], exhaustive instead of sampled, no bootstrap.
pub fn oracle_decompose(ds: &Dataset, spec: &ModelSpec, cfg: &DecompConfig) -> Result<DecompositionResult> {
    oracle_decompose_with(ds, spec, cfg, &OracleLimits::default())
}

pub fn oracle_decompose_with(
    ds: &Dataset,
    spec: &ModelSpec,
    cfg: &DecompConfig,
    limits: &OracleLimits,
) -> Result<DecompositionResult> {
    if cfg.matching != Matching::Rank {
        return Err(Error::Config("the oracle enumerates rank matching only".into()));
    }
    let a = ds.group_sample(&spec.reference_group)?;
    let d = ds.group_sample(&spec.comparison_group)?;
    if a.n() + d.n() > limits.max_rows {
        return Err(Error::TooLarge(format!("{} rows", a.n() + d.n())));
    }
    let rows: Vec<usize> = a.indices.iter().chain(&d.indices).copied().collect();
    let opts = EncodeOptions { group_indicators: cfg.include_group_indicators };
    let pooled = encode_design_with(ds, spec, Some(&rows), &opts)?;
    let dm_a = pooled.select(&(0..a.n()).collect::<Vec<_>>());
    let dm_d = pooled.select(&(a.n()..rows.len()).collect::<Vec<_>>());
    let model = fit_with_link(&pooled, cfg.link, &FitOptions::default())?;
    if !model.converged {
        return Err(Error::NotConverged(model.gradient_norm));
    }

    let mut beta = model.beta.clone();
    let mut names: Vec<String> = Vec::new();
    let mut members: Vec<Vec<String>> = Vec::new();
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    for b in pooled.blocks() {
        if b.role == BlockRole::GroupIndicator {
            b.columns.clone().for_each(|j| beta[j] = 0.0);
            continue;
        }
        let label = cfg
            .block_map
            .iter()
            .find(|g| g.variables.iter().any(|v| v == &b.name))
            .map_or(b.name.clone(), |g| g.name.clone());
        match names.iter().position(|n| *n == label) {
            Some(k) => {
                blocks[k].extend(b.columns.clone());
                members[k].push(b.name.clone());
            }
            None => {
                names.push(label);
                blocks.push(b.columns.clone().collect());
                members.push(vec![b.name.clone()]);
            }
        }
    }

    let (mean, cases) = oracle_chain(&dm_a, &dm_d, &beta, cfg.link, &blocks, cfg.ordering, limits)?;
    let rate = |dm: &DesignMatrix| dm.y().iter().zip(dm.w()).map(|(y, w)| y * w).sum::<f64>() / dm.w().iter().sum::<f64>();
    let (mean_reference, mean_comparison) = (rate(&dm_a), rate(&dm_d));
    let total_gap = mean_reference - mean_comparison;
    let explained_total: f64 = mean.iter().sum();
    let spread = |b: usize| {
        let xs: Vec<f64> = cases.iter().map(|c| c[b]).collect();
        let m = xs.iter().sum::<f64>() / xs.len() as f64;
        if xs.len() < 2 {
            0.0
        } else {
            (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
        }
    };
    let contributions = names
        .iter()
        .enumerate()
        .map(|(k, n)| BlockContribution {
            block: n.clone(),
            variables: members[k].clone(),
            estimate: mean[k],
            se: None,
            stars: Stars::None,
            pct_explained: percent_of(mean[k], total_gap),
            iteration_sd: spread(k),
        })
        .collect();
    Ok(DecompositionResult {
        outcome: spec.outcome.clone(),
        reference_group: a.label,
        comparison_group: d.label,
        n_reference: dm_a.n(),
        n_comparison: dm_d.n(),
        mean_reference,
        mean_comparison,
        total_gap,
        total_gap_se: None,
        model_gap: None,
        explained_total,
        explained_total_se: None,
        explained_stars: Stars::None,
        unexplained_total: total_gap - explained_total,
        unexplained_basis: UnexplainedBasis::RawGap,
        total_pct_explained: percent_of(explained_total, total_gap),
        contributions,
        aggregate_a_weighted: None,
        aggregate_d_weighted: None,
        coefficient_fit: FitDiagnostics {
            converged: model.converged,
            iterations: model.iterations,
            loglik: model.loglik,
            gradient_norm: model.gradient_norm,
        },
        bootstrap: None,
        config: cfg.clone(),
    })
}
