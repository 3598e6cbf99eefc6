#![allow(dead_code)]

use gapdecomp::synth::{BetaSpec, CategoricalVar, DgpSpec, GroupDgp, NormalDist, WeightScheme};

pub fn normal(mean: f64, sd: f64) -> NormalDist {
    NormalDist { mean, sd }
}

pub fn group(label: &str, n: usize, numeric: Vec<NormalDist>, categorical: Vec<Vec<f64>>) -> GroupDgp {
    GroupDgp { label: label.into(), n, numeric, categorical, beta: None, weights: WeightScheme::Unit }
}

/// Two numeric covariates and one three-level categorical; the groups
/// differ in every covariate.
pub fn three_block_dgp(seed: u64, n_a: usize, n_d: usize) -> DgpSpec {
    DgpSpec {
        seed,
        outcome: "y".into(),
        group_column: "group".into(),
        weight_column: None,
        link: Default::default(),
        numeric: vec!["x1".into(), "x2".into()],
        categorical: vec![CategoricalVar { name: "c".into(), levels: vec!["u".into(), "v".into(), "w".into()] }],
        beta: BetaSpec { intercept: -0.2, numeric: vec![0.6, -0.4], categorical: vec![vec![0.0, 0.5, -0.3]] },
        groups: vec![
            group("a", n_a, vec![normal(0.5, 1.0), normal(0.3, 1.0)], vec![vec![0.3, 0.5, 0.2]]),
            group("d", n_d, vec![normal(-0.2, 1.0), normal(0.0, 1.0)], vec![vec![0.5, 0.2, 0.3]]),
        ],
    }
}
