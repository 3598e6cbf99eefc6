use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::{dot, FittedProbit};
use crate::dataio::{DesignMatrix, Stars};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AmeMethod {
    Derivative,
    DiscreteChange,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginalEffect {
    /// Design column name, e.g. `occupation:RSW`.
    pub column: String,
    /// Declared variable the column belongs to.
    pub variable: String,
    /// Omitted level for dummies of a categorical variable.
    pub reference: Option<String>,
    pub ame: f64,
    pub se: f64,
    pub stars: Stars,
    pub method: AmeMethod,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct MarginalEffectsTable {
    pub effects: Vec<MarginalEffect>,
    pub observations: usize,
}

/// Weighted average marginal effects with delta-method standard errors from
/// the robust covariance. Numeric columns use the derivative; dummy columns
/// the discrete change from the reference level.
pub fn average_marginal_effects(model: &FittedProbit, dm: &DesignMatrix) -> Result<MarginalEffectsTable> {
    let p = dm.p();
    if model.beta.len() != p {
        return Err(Error::DimensionMismatch("model and design differ in columns".into()));
    }
    let link = model.link;
    let beta = &model.beta;
    let tw = dm.total_weight();
    let index: Vec<f64> = (0..dm.n()).map(|i| dot(dm.row(i), beta)).collect();
    let cov = &model.cov_robust;

    let mut effects = Vec::new();
    for block in dm.blocks() {
        for k in block.columns.clone() {
            let mut grad = vec![0.0; p];
            let mut ame = 0.0;
            let method = if block.categorical { AmeMethod::DiscreteChange } else { AmeMethod::Derivative };
            for i in 0..dm.n() {
                let x = dm.row(i);
                let w = dm.w()[i] / tw;
                match method {
                    AmeMethod::Derivative => {
                        let z = index[i];
                        let f = link.pdf(z);
                        ame += w * f * beta[k];
                        let df = link.dpdf(z) * beta[k];
                        for (g, xj) in grad.iter_mut().zip(x) {
                            *g += w * df * xj;
                        }
                        grad[k] += w * f;
                    }
                    AmeMethod::DiscreteChange => {
                        let in_block: f64 = block.columns.clone().map(|j| x[j] * beta[j]).sum();
                        let base = index[i] - in_block;
                        let z1 = base + beta[k];
                        ame += w * (link.cdf(z1) - link.cdf(base));
                        let (f1, f0) = (link.pdf(z1), link.pdf(base));
                        for (j, g) in grad.iter_mut().enumerate() {
                            if block.columns.contains(&j) {
                                if j == k {
                                    *g += w * f1;
                                }
                            } else {
                                *g += w * (f1 - f0) * x[j];
                            }
                        }
                    }
                }
            }
            let g = DVector::from_vec(grad);
            let var = (g.transpose() * cov * &g)[(0, 0)];
            let se = var.max(0.0).sqrt();
            effects.push(MarginalEffect {
                column: dm.column_names()[k].clone(),
                variable: block.name.clone(),
                reference: block.reference.clone(),
                ame,
                se,
                stars: Stars::from_estimate(ame, se),
                method,
            });
        }
    }
    Ok(MarginalEffectsTable { effects, observations: dm.n() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataio::{Block, BlockRole};
    use crate::probit::{fit, FitOptions, LinkFunction};

    fn design() -> DesignMatrix {
        // intercept, numeric x, two-column categorical block
        let rows = [
            (0.3, 0, 1.0), (1.2, 1, 0.0), (-0.4, 2, 1.0), (2.2, 0, 1.0), (-1.1, 1, 0.0),
            (0.8, 2, 0.0), (1.7, 1, 1.0), (-0.2, 0, 0.0), (0.5, 2, 1.0), (-1.6, 0, 0.0),
            (0.1, 1, 1.0), (1.0, 0, 0.0),
        ];
        let mut x = Vec::new();
        let mut y = Vec::new();
        for &(v, c, out) in &rows {
            x.extend_from_slice(&[1.0, v, (c == 1) as u8 as f64, (c == 2) as u8 as f64]);
            y.push(out);
        }
        let blocks = vec![
            Block { name: "x".into(), columns: 1..2, reference: None, categorical: false, role: BlockRole::Covariate },
            Block { name: "c".into(), columns: 2..4, reference: Some("c0".into()), categorical: true, role: BlockRole::Covariate },
        ];
        let names = vec!["(Intercept)".into(), "x".into(), "c:c1".into(), "c:c2".into()];
        DesignMatrix::from_parts(x, 4, names, blocks, y, vec![1.0; 12]).unwrap()
    }

    #[test]
    fn zero_coefficient_gives_exactly_zero_effect() {
        let dm = design();
        let model = FittedProbit::from_beta(vec![0.2, 0.0, 0.0, 0.5], LinkFunction::Probit);
        let t = average_marginal_effects(&model, &dm).unwrap();
        assert_eq!(t.effects[0].ame, 0.0);
        assert_eq!(t.effects[1].ame, 0.0);
        assert!(t.effects[2].ame > 0.0);
        assert_eq!(t.effects[2].method, AmeMethod::DiscreteChange);
    }

    #[test]
    fn intercept_only_has_no_effects() {
        let dm = DesignMatrix::from_parts(vec![1.0; 4], 1, vec!["(Intercept)".into()], vec![], vec![1.0, 0.0, 0.0, 1.0], vec![1.0; 4]).unwrap();
        let m = fit(&dm, &FitOptions::default()).unwrap();
        assert!(average_marginal_effects(&m, &dm).unwrap().effects.is_empty());
    }

    #[test]
    fn delta_method_gradient_matches_finite_differences() {
        let dm = design();
        let m = fit(&dm, &FitOptions::default()).unwrap();
        // replace the covariance with unit vectors to read back each gradient entry
        for e in 0..4 {
            let ame_at = |b: &[f64]| {
                let probe = FittedProbit::from_beta(b.to_vec(), LinkFunction::Probit);
                average_marginal_effects(&probe, &dm).unwrap().effects.iter().map(|x| x.ame).collect::<Vec<_>>()
            };
            let h = 1e-6;
            let mut up = m.beta.clone();
            up[e] += h;
            let mut dn = m.beta.clone();
            dn[e] -= h;
            let (a, b) = (ame_at(&up), ame_at(&dn));
            let fd: Vec<f64> = a.iter().zip(&b).map(|(x, y)| (x - y) / (2.0 * h)).collect();
            let mut probe = FittedProbit::from_beta(m.beta.clone(), LinkFunction::Probit);
            probe.cov_robust[(e, e)] = 1.0;
            let analytic = average_marginal_effects(&probe, &dm).unwrap();
            for (k, eff) in analytic.effects.iter().enumerate() {
                assert!((eff.se - fd[k].abs()).abs() < 1e-6, "param {e}, effect {k}: {} vs {}", eff.se, fd[k]);
            }
        }
    }
}
