use nalgebra::{Cholesky, DMatrix, DVector};

use super::{chunked, derivatives, dot, loglik, obs_terms, LinkFunction};
use crate::dataio::DesignMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    /// Convergence threshold on the sup-norm of the score divided by the
    /// total weight.
    pub tol: f64,
    pub max_iter: usize,
    pub max_halvings: usize,
    /// Stop early once the per-unit-weight log-likelihood gain drops below this.
    pub loglik_tol: f64,
    /// |x b| beyond which a non-converged fit is reported as separated.
    pub separation_index: f64,
}

/// Largest change in any linear index, under a full Newton step, below which
/// the coefficients are considered settled.
const STEP_TOL: f64 = 1e-10;
/// |x b| beyond which an unsettled Newton step is read as diverging coefficients.
const DIVERGENCE_INDEX: f64 = 10.0;
/// Relative log-likelihood change treated as rounding noise.
const ROUNDING_LOGLIK: f64 = 1e-13;

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions { tol: 1e-8, max_iter: 100, max_halvings: 50, loglik_tol: 1e-12, separation_index: 30.0 }
    }
}

/// A fitted binary-response model.
#[derive(Debug, Clone, PartialEq)]
pub struct FittedProbit {
    pub link: LinkFunction,
    pub beta: Vec<f64>,
    /// Inverse of the negative Hessian.
    pub cov_classical: DMatrix<f64>,
    /// Sandwich covariance.
    pub cov_robust: DMatrix<f64>,
    pub loglik: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Sup-norm of the score per unit of total weight at `beta`.
    pub gradient_norm: f64,
    /// Log-likelihood after each accepted step, starting value first.
    pub loglik_path: Vec<f64>,
}

impl FittedProbit {
    /// Wraps fixed coefficients (no covariance) for evaluation only.
    pub fn from_beta(beta: Vec<f64>, link: LinkFunction) -> FittedProbit {
        let p = beta.len();
        FittedProbit {
            link,
            beta,
            cov_classical: DMatrix::zeros(p, p),
            cov_robust: DMatrix::zeros(p, p),
            loglik: f64::NAN,
            iterations: 0,
            converged: true,
            gradient_norm: 0.0,
            loglik_path: Vec::new(),
        }
    }

    pub fn p(&self) -> usize {
        self.beta.len()
    }

    pub fn robust_se(&self) -> Vec<f64> {
        (0..self.p()).map(|j| self.cov_robust[(j, j)].max(0.0).sqrt()).collect()
    }

    pub fn classical_se(&self) -> Vec<f64> {
        (0..self.p()).map(|j| self.cov_classical[(j, j)].max(0.0).sqrt()).collect()
    }
}

/// Probit maximum likelihood by damped Newton-Raphson from `beta = 0`.
pub fn fit(dm: &DesignMatrix, opts: &FitOptions) -> Result<FittedProbit> {
    fit_with_link(dm, LinkFunction::Probit, opts)
}

pub fn fit_with_link(dm: &DesignMatrix, link: LinkFunction, opts: &FitOptions) -> Result<FittedProbit> {
    fit_from(dm, link, opts, None)
}

/// As [`fit_with_link`], with Newton iterations started at `start` (e.g.
/// the full-sample estimate when refitting a resample). Falls back to zero
/// when the start has a non-finite likelihood.
pub fn fit_from(dm: &DesignMatrix, link: LinkFunction, opts: &FitOptions, start: Option<&[f64]>) -> Result<FittedProbit> {
    if let Some(s) = start {
        if s.len() != dm.p() {
            return Err(Error::DimensionMismatch("start vector does not match design columns".into()));
        }
    }
    if dm.p() > dm.n() {
        return Err(Error::CollinearDesign(vec![format!("{} columns for {} rows", dm.p(), dm.n())]));
    }
    check_rank(dm)?;
    match link {
        LinkFunction::Probit => newton(dm, opts, start),
        LinkFunction::Identity => least_squares(dm),
    }
}

/// Flags columns that are (numerically) linear combinations of earlier ones,
/// via a Cholesky factorisation of the scaled weighted Gram matrix.
fn check_rank(dm: &DesignMatrix) -> Result<()> {
    let p = dm.p();
    let gram = weighted_gram(dm, |i| dm.w()[i]);
    let scale: Vec<f64> = (0..p).map(|j| gram[(j, j)].sqrt()).collect();
    let mut bad = Vec::new();
    let mut l = DMatrix::<f64>::zeros(p, p);
    let mut kept = Vec::new();
    for j in 0..p {
        if scale[j] == 0.0 {
            bad.push(dm.column_names()[j].clone());
            continue;
        }
        // forward-substitute against accepted columns
        let mut v = Vec::with_capacity(kept.len());
        for (a, &k) in kept.iter().enumerate() {
            let mut s = gram[(j, k)] / (scale[j] * scale[k]);
            for b in 0..a {
                s -= l[(a, b)] * v[b];
            }
            v.push(s / l[(a, a)]);
        }
        let resid = 1.0 - v.iter().map(|x| x * x).sum::<f64>();
        if resid < 1e-10 {
            bad.push(dm.column_names()[j].clone());
            continue;
        }
        let a = kept.len();
        for (b, x) in v.into_iter().enumerate() {
            l[(a, b)] = x;
        }
        l[(a, a)] = resid.sqrt();
        kept.push(j);
    }
    if bad.is_empty() {
        Ok(())
    } else {
        Err(Error::CollinearDesign(bad))
    }
}

/// `sum_i c_i x_i x_i'` with `c_i = coef(i)`.
fn weighted_gram(dm: &DesignMatrix, coef: impl Fn(usize) -> f64 + Sync) -> DMatrix<f64> {
    let p = dm.p();
    let parts = chunked(dm.n(), |rows| {
        let mut h = vec![0.0; p * p];
        for i in rows {
            let x = dm.row(i);
            let c = coef(i);
            for j in 0..p {
                let cx = c * x[j];
                if cx != 0.0 {
                    for k in 0..=j {
                        h[j * p + k] += cx * x[k];
                    }
                }
            }
        }
        h
    });
    let mut h = vec![0.0; p * p];
    for part in parts {
        h.iter_mut().zip(&part).for_each(|(a, b)| *a += b);
    }
    DMatrix::from_fn(p, p, |j, k| if k <= j { h[j * p + k] } else { h[k * p + j] })
}

fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn max_abs_index(beta: &[f64], dm: &DesignMatrix) -> f64 {
    chunked(dm.n(), |rows| rows.map(|i| dot(dm.row(i), beta).abs()).fold(0.0, f64::max))
        .into_iter()
        .fold(0.0, f64::max)
}

fn newton(dm: &DesignMatrix, opts: &FitOptions, start: Option<&[f64]>) -> Result<FittedProbit> {
    let p = dm.p();
    let total_w = dm.total_weight();
    let mut beta = vec![0.0; p];
    let (mut ll, mut grad, mut hess) = derivatives(&beta, dm)?;
    if let Some(s) = start {
        let warm = derivatives(s, dm)?;
        if warm.0.is_finite() && warm.0 >= ll {
            beta = s.to_vec();
            (ll, grad, hess) = warm;
        }
    }
    let mut path = vec![ll];
    let mut iterations = 0;
    let mut gnorm = sup_norm(&grad) / total_w;

    // Newton step at the current point; a small gradient with a large step
    // means the likelihood is still rising along a flat direction.
    let newton_step = |hess: &DMatrix<f64>, grad: &[f64]| {
        Cholesky::new(-hess).map(|ch| ch.solve(&DVector::from_column_slice(grad)))
    };
    // measured on the linear index, so rescaling a column does not change it
    let step_is_small = |step: &DVector<f64>| max_abs_index(step.as_slice(), dm) <= STEP_TOL;
    let mut step = newton_step(&hess, &grad);

    while iterations < opts.max_iter {
        let Some(dir) = step.as_ref() else {
            let max_index = max_abs_index(&beta, dm);
            if max_index > opts.separation_index {
                return Err(Error::QuasiSeparation { max_index, iterations });
            }
            return Err(Error::SingularHessian);
        };
        if gnorm <= opts.tol && step_is_small(dir) {
            break;
        }
        iterations += 1;

        // A full step may lose a rounding-level amount of likelihood close
        // to the optimum; it is still taken, as the gradient keeps shrinking.
        let noise = ROUNDING_LOGLIK * ll.abs().max(1.0);
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..=opts.max_halvings {
            let cand: Vec<f64> = beta.iter().zip(dir.iter()).map(|(b, s)| b + t * s).collect();
            let cand_ll = loglik(&cand, dm)?;
            if cand_ll.is_finite() && (cand_ll >= ll || (t == 1.0 && cand_ll >= ll - noise)) {
                accepted = Some((cand, cand_ll));
                break;
            }
            t *= 0.5;
        }
        let Some((cand, cand_ll)) = accepted else { break };
        let gain = (cand_ll - ll) / total_w;
        beta = cand;
        (ll, grad, hess) = derivatives(&beta, dm)?;
        path.push(ll);
        gnorm = sup_norm(&grad) / total_w;
        step = newton_step(&hess, &grad);

        if gnorm > opts.tol {
            let max_index = max_abs_index(&beta, dm);
            if max_index > opts.separation_index {
                return Err(Error::QuasiSeparation { max_index, iterations });
            }
        }
        // stalled: no measurable progress and either no full step possible
        // or nothing left to move
        let tiny = step.as_ref().is_some_and(|d| step_is_small(d));
        if gain <= opts.loglik_tol && (t < 1.0 || tiny) {
            break;
        }
    }

    if let Some(dir) = step.as_ref() {
        if !step_is_small(dir) {
            let max_index = max_abs_index(&beta, dm);
            if max_index > DIVERGENCE_INDEX {
                return Err(Error::QuasiSeparation { max_index, iterations });
            }
        }
    }

    let converged = gnorm <= opts.tol;
    let (cov_classical, cov_robust) = match Cholesky::new(-&hess) {
        Some(ch) => {
            let inv = ch.inverse();
            let meat = score_outer(&beta, dm);
            let robust = &inv * meat * &inv;
            (inv, symmetrize(robust))
        }
        None => return Err(Error::SingularHessian),
    };
    Ok(FittedProbit {
        link: LinkFunction::Probit,
        beta,
        cov_classical: symmetrize(cov_classical),
        cov_robust,
        loglik: ll,
        iterations,
        converged,
        gradient_norm: gnorm,
        loglik_path: path,
    })
}

fn symmetrize(m: DMatrix<f64>) -> DMatrix<f64> {
    (&m + m.transpose()) * 0.5
}

/// `sum_i w_i^2 s_i s_i'` with `s_i` the per-observation probit score.
fn score_outer(beta: &[f64], dm: &DesignMatrix) -> DMatrix<f64> {
    weighted_gram(dm, |i| {
        let (lambda, _) = obs_terms(dot(dm.row(i), beta), dm.y()[i]);
        (dm.w()[i] * lambda).powi(2)
    })
}

/// Sandwich covariance `H^-1 (sum w_i^2 s_i s_i') H^-1` at the model's
/// coefficients.
pub fn robust_cov(model: &FittedProbit, dm: &DesignMatrix) -> Result<DMatrix<f64>> {
    if model.beta.len() != dm.p() {
        return Err(Error::DimensionMismatch("model and design differ in columns".into()));
    }
    match model.link {
        LinkFunction::Probit => {
            let (_, _, hess) = derivatives(&model.beta, dm)?;
            let inv = Cholesky::new(-hess).ok_or(Error::SingularHessian)?.inverse();
            Ok(symmetrize(&inv * score_outer(&model.beta, dm) * &inv))
        }
        LinkFunction::Identity => {
            let gram = weighted_gram(dm, |i| dm.w()[i]);
            let inv = Cholesky::new(gram).ok_or(Error::SingularHessian)?.inverse();
            let meat = weighted_gram(dm, |i| {
                let r = dm.y()[i] - dot(dm.row(i), &model.beta);
                (dm.w()[i] * r).powi(2)
            });
            Ok(symmetrize(&inv * meat * &inv))
        }
    }
}

/// Weighted least squares for the identity link.
fn least_squares(dm: &DesignMatrix) -> Result<FittedProbit> {
    let p = dm.p();
    let gram = weighted_gram(dm, |i| dm.w()[i]);
    let mut xty = vec![0.0; p];
    for i in 0..dm.n() {
        let wy = dm.w()[i] * dm.y()[i];
        for (acc, x) in xty.iter_mut().zip(dm.row(i)) {
            *acc += wy * x;
        }
    }
    let ch = Cholesky::new(gram).ok_or(Error::SingularHessian)?;
    let beta: Vec<f64> = ch.solve(&DVector::from_vec(xty)).iter().copied().collect();
    let inv = ch.inverse();
    let mut rss = 0.0;
    let mut grad = vec![0.0; p];
    for i in 0..dm.n() {
        let r = dm.y()[i] - dot(dm.row(i), &beta);
        rss += dm.w()[i] * r * r;
        for (g, x) in grad.iter_mut().zip(dm.row(i)) {
            *g += dm.w()[i] * r * x;
        }
    }
    let dof = (dm.n() - p).max(1) as f64;
    let sigma2 = rss / dof;
    let mut model = FittedProbit {
        link: LinkFunction::Identity,
        beta,
        cov_classical: symmetrize(&inv * sigma2),
        cov_robust: DMatrix::zeros(p, p),
        loglik: -0.5 * rss,
        iterations: 1,
        converged: true,
        gradient_norm: sup_norm(&grad) / dm.total_weight(),
        loglik_path: vec![-0.5 * rss],
    };
    model.cov_robust = robust_cov(&model, dm)?;
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::normal;

    fn intercept_only(y: &[f64]) -> DesignMatrix {
        DesignMatrix::from_parts(
            vec![1.0; y.len()],
            1,
            vec!["(Intercept)".into()],
            vec![],
            y.to_vec(),
            vec![1.0; y.len()],
        )
        .unwrap()
    }

    #[test]
    fn intercept_only_matches_closed_form() {
        let y = [1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0];
        let m = fit(&intercept_only(&y), &FitOptions::default()).unwrap();
        assert!(m.converged);
        assert!((m.beta[0] - normal::quantile(0.25)).abs() < 1e-8);
        let g = super::super::gradient(&m.beta, &intercept_only(&y)).unwrap();
        assert!(g[0].abs() < 1e-8);
    }

    #[test]
    fn perfect_prediction_is_quasi_separation() {
        let xs = [-2.0, -1.5, -1.0, -0.5, 0.5, 1.0, 1.5, 2.0];
        let x: Vec<f64> = xs.iter().flat_map(|&v| [1.0, v]).collect();
        let y: Vec<f64> = xs.iter().map(|&v| if v > 0.0 { 1.0 } else { 0.0 }).collect();
        let dm = DesignMatrix::from_numeric(x, 2, y, vec![1.0; 8]).unwrap();
        let err = fit(&dm, &FitOptions::default()).unwrap_err();
        assert!(matches!(err, Error::QuasiSeparation { .. }), "{err}");
        assert!(err.to_string().contains("quasi-separation"));
    }

    #[test]
    fn collinear_columns_are_named() {
        let rows = [(0.1, 1.0), (0.4, 0.0), (0.9, 1.0), (1.3, 0.0), (2.0, 1.0), (0.7, 0.0)];
        let x: Vec<f64> = rows.iter().flat_map(|&(a, b)| [1.0, a, b, 2.0 * a - b]).collect();
        let y = vec![0.0, 1.0, 0.0, 1.0, 1.0, 0.0];
        let dm = DesignMatrix::from_numeric(x, 4, y, vec![1.0; 6]).unwrap();
        match fit(&dm, &FitOptions::default()) {
            Err(Error::CollinearDesign(cols)) => assert_eq!(cols, vec!["x3".to_owned()]),
            other => panic!("expected collinear error, got {other:?}"),
        }
    }

    #[test]
    fn loglik_path_is_monotone() {
        let xs: Vec<f64> = (0..40).map(|i| (i as f64 * 0.37).sin() * 3.0).collect();
        let x: Vec<f64> = xs.iter().flat_map(|&v| [1.0, v]).collect();
        let y: Vec<f64> = xs.iter().enumerate().map(|(i, &v)| if v + (i as f64).cos() > 0.0 { 1.0 } else { 0.0 }).collect();
        let dm = DesignMatrix::from_numeric(x, 2, y, vec![1.0; 40]).unwrap();
        let m = fit(&dm, &FitOptions::default()).unwrap();
        assert!(m.converged);
        assert!(m.loglik_path.windows(2).all(|w| w[1] >= w[0] - ROUNDING_LOGLIK * w[0].abs()));
        let cov = &m.cov_classical;
        assert_eq!(cov, &cov.transpose());
        assert!(cov.clone().symmetric_eigenvalues().iter().all(|&e| e >= 0.0));
    }
}
