use super::aggregate::{fairlie_aggregate, mean_fitted, Direction};
use super::bootstrap::bootstrap;
use super::detailed::fairlie_detailed;
use super::{
    percent_of, BlockContribution, BootstrapDiagnostics, CoefficientSource, DecompConfig,
    DecompositionResult, FitDiagnostics, UnexplainedBasis,
};
use crate::dataio::{encode_design, encode_design_with, Dataset, DesignMatrix, EncodeOptions, Stars};
use crate::error::{Error, Result};
use crate::model::ModelSpec;
use crate::probit::{fit_from, fit_with_link, FitOptions, FittedProbit};

fn weighted_rate(dm: &DesignMatrix) -> f64 {
    dm.y().iter().zip(dm.w()).map(|(y, w)| y * w).sum::<f64>() / dm.total_weight()
}

fn coefficient_model(
    pooled: &DesignMatrix,
    dm_a: &DesignMatrix,
    dm_d: &DesignMatrix,
    cfg: &DecompConfig,
    start: Option<&[f64]>,
) -> Result<FittedProbit> {
    let opts = FitOptions::default();
    let dm = match cfg.coefficient_source {
        CoefficientSource::Pooled => pooled,
        CoefficientSource::GroupA => dm_a,
        CoefficientSource::GroupD => dm_d,
    };
    let model = fit_from(dm, cfg.link, &opts, start)?;
    if !model.converged {
        return Err(Error::NotConverged(model.gradient_norm));
    }
    Ok(model)
}

/// Runs the full decomposition of `spec.reference_group` against
/// `spec.comparison_group`: encoding, coefficient fit, detailed
/// decomposition and (when enabled) the bootstrap.
pub fn decompose(ds: &Dataset, spec: &ModelSpec, cfg: &DecompConfig) -> Result<DecompositionResult> {
    cfg.validate()?;
    let a = ds.group_sample(&spec.reference_group)?;
    let d = ds.group_sample(&spec.comparison_group)?;
    for g in [&a, &d] {
        if g.n() < 2 {
            return Err(Error::Data(format!("group `{}` has fewer than 2 rows", g.label)));
        }
    }
    let same = a.label == d.label;
    let mut rows = a.indices.clone();
    if !same {
        rows.extend_from_slice(&d.indices);
    }
    let opts = EncodeOptions { group_indicators: cfg.include_group_indicators && !same };
    let pooled = encode_design_with(ds, spec, Some(&rows), &opts)?;
    let pos_a: Vec<usize> = (0..a.n()).collect();
    let pos_d: Vec<usize> = if same { pos_a.clone() } else { (a.n()..a.n() + d.n()).collect() };
    let dm_a = pooled.select(&pos_a);
    let dm_d = pooled.select(&pos_d);

    let mean_reference = weighted_rate(&dm_a);
    let mean_comparison = weighted_rate(&dm_d);
    let total_gap = mean_reference - mean_comparison;

    let model = coefficient_model(&pooled, &dm_a, &dm_d, cfg, None)?;
    let detailed = fairlie_detailed(&model, &dm_a, &dm_d, cfg)?;

    // Group-specific fits for the unexplained part; optional because a
    // level can be absent from one group.
    let group_fits = encode_design(ds, spec, Some(&a.indices)).and_then(|ga| {
        let gd = encode_design(ds, spec, Some(&d.indices))?;
        let opts = FitOptions::default();
        let ma = fit_with_link(&ga, cfg.link, &opts)?;
        let md = fit_with_link(&gd, cfg.link, &opts)?;
        if !(ma.converged && md.converged) {
            return Err(Error::NotConverged(ma.gradient_norm.max(md.gradient_norm)));
        }
        Ok((ga, gd, ma, md))
    });
    let (model_gap, agg_a, agg_d) = match &group_fits {
        Ok((ga, gd, ma, md)) => {
            let gap = mean_fitted(ga, &ma.beta, cfg.link) - mean_fitted(gd, &md.beta, cfg.link);
            (
                Some(gap),
                Some(fairlie_aggregate(ma, md, ga, gd, Direction::AWeighted)?),
                Some(fairlie_aggregate(ma, md, ga, gd, Direction::DWeighted)?),
            )
        }
        Err(_) => (None, None, None),
    };
    let (unexplained_total, unexplained_basis) = match model_gap {
        Some(g) => (g - detailed.explained_total, UnexplainedBasis::ModelGap),
        None => (total_gap - detailed.explained_total, UnexplainedBasis::RawGap),
    };

    // statistics vector: [total gap, explained total, block contributions...]
    let (ses, boot_diag) = if cfg.bootstrap_reps > 0 {
        let inner = DecompConfig { bootstrap_reps: 0, ..cfg.clone() };
        let summary = bootstrap(&[&pos_a, &pos_d], cfg.bootstrap_reps, cfg.seed, |res, seed| {
            let ra = pooled.select(&res[0]);
            let rd = pooled.select(&res[1]);
            let mut both = res[0].clone();
            if !same {
                both.extend_from_slice(&res[1]);
            }
            let rp = pooled.select(&both);
            let m = coefficient_model(&rp, &ra, &rd, &inner, Some(&model.beta))?;
            let det = fairlie_detailed(&m, &ra, &rd, &DecompConfig { seed, ..inner.clone() })?;
            let mut stats = vec![weighted_rate(&ra) - weighted_rate(&rd), det.explained_total];
            stats.extend(det.estimates);
            Ok(stats)
        })?;
        (Some(summary.se), Some(BootstrapDiagnostics { reps: summary.reps, failed: summary.failed }))
    } else {
        (None, None)
    };
    let se_at = |j: usize| ses.as_ref().map(|s| s[j]);

    let contributions = detailed
        .blocks
        .iter()
        .enumerate()
        .map(|(k, b)| {
            let estimate = detailed.estimates[k];
            let se = se_at(2 + k);
            BlockContribution {
                block: b.name.clone(),
                variables: b.variables.clone(),
                estimate,
                se,
                stars: se.map_or(Stars::None, |s| Stars::from_estimate(estimate, s)),
                pct_explained: percent_of(estimate, total_gap),
                iteration_sd: detailed.iteration_sd[k],
            }
        })
        .collect();
    let explained_total_se = se_at(1);

    Ok(DecompositionResult {
        outcome: spec.outcome.clone(),
        reference_group: a.label.clone(),
        comparison_group: d.label.clone(),
        n_reference: a.n(),
        n_comparison: d.n(),
        mean_reference,
        mean_comparison,
        total_gap,
        total_gap_se: se_at(0),
        model_gap,
        explained_total: detailed.explained_total,
        explained_total_se,
        explained_stars: explained_total_se
            .map_or(Stars::None, |s| Stars::from_estimate(detailed.explained_total, s)),
        unexplained_total,
        unexplained_basis,
        total_pct_explained: percent_of(detailed.explained_total, total_gap),
        contributions,
        aggregate_a_weighted: agg_a,
        aggregate_d_weighted: agg_d,
        coefficient_fit: FitDiagnostics {
            converged: model.converged,
            iterations: model.iterations,
            loglik: model.loglik,
            gradient_norm: model.gradient_norm,
        },
        bootstrap: boot_diag,
        config: cfg.clone(),
    })
}
