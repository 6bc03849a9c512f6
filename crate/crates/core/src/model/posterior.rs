//! Linear predictor, Bernoulli log-likelihood and log-posterior with exact
//! gradient.

use super::design::{DesignMatrix, ParameterVector};
use super::ModelError;
use crate::stats::{inverse_logit, log1p_exp, ExactSum};

fn check_shape(params: &ParameterVector, design: &DesignMatrix) -> Result<(), ModelError> {
    if params.0.len() != design.layout.len() {
        return Err(ModelError::Shape(format!(
            "parameter vector has {} entries, layout expects {}",
            params.0.len(),
            design.layout.len()
        )));
    }
    Ok(())
}

/// Per-row linear predictor: intercept + fixed slopes times covariates + the
/// class effect of every random term.
///
/// Each row is the correctly rounded sum of its terms, so the result does not
/// depend on the order in which terms are listed.
pub fn linear_predictor(params: &ParameterVector, design: &DesignMatrix) -> Result<Vec<f64>, ModelError> {
    check_shape(params, design)?;
    let mut acc = ExactSum::new();
    let mut out = Vec::with_capacity(design.n_rows);
    for i in 0..design.n_rows {
        acc.clear();
        for_each_term(params.as_slice(), design, i, None, |t| acc.add(t));
        out.push(acc.value());
    }
    Ok(out)
}

/// Calls `f` with every additive term of row `i`. When `substitute` is
/// `Some((j, x))` the covariate of fixed term `j` is replaced by `x`.
#[inline]
pub(crate) fn for_each_term(
    theta: &[f64],
    design: &DesignMatrix,
    i: usize,
    substitute: Option<(usize, f64)>,
    mut f: impl FnMut(f64),
) {
    let layout = &design.layout;
    f(theta[0]);
    for (j, col) in design.fixed.iter().enumerate() {
        let x = match substitute {
            Some((sj, sx)) if sj == j => sx,
            _ => col[i],
        };
        f(theta[1 + j] * x);
    }
    for (t, range) in design.iid.iter().zip(&layout.iid) {
        f(theta[range.start + t.index[i]]);
    }
    for (t, range) in design.rw1.iter().zip(&layout.rw1) {
        f(theta[range.start + t.factor.index[i]]);
    }
}

/// Plain left-to-right evaluation used inside the sampler's hot loop.
pub(crate) fn linear_predictor_fast(theta: &[f64], design: &DesignMatrix, out: &mut [f64]) {
    let layout = &design.layout;
    out.fill(theta[0]);
    for (j, col) in design.fixed.iter().enumerate() {
        let b = theta[1 + j];
        out.iter_mut().zip(col).for_each(|(e, x)| *e += b * x);
    }
    for (t, range) in design.iid.iter().zip(&layout.iid) {
        let f = &theta[range.clone()];
        out.iter_mut().zip(&t.index).for_each(|(e, &k)| *e += f[k]);
    }
    for (t, range) in design.rw1.iter().zip(&layout.rw1) {
        let f = &theta[range.clone()];
        out.iter_mut().zip(&t.factor.index).for_each(|(e, &k)| *e += f[k]);
    }
}

pub fn check_labels(labels: &[u8]) -> Result<(), ModelError> {
    match labels.iter().position(|&y| y > 1) {
        Some(i) => Err(ModelError::NonBinaryLabel { row: i, value: labels[i] }),
        None => Ok(()),
    }
}

/// `sum_i y_i * eta_i - log(1 + exp(eta_i))`.
pub fn log_likelihood(eta: &[f64], labels: &[u8]) -> f64 {
    eta.iter().zip(labels).map(|(&e, &y)| if y == 1 { e } else { 0.0 } - log1p_exp(e)).sum()
}

/// Sum of squared first differences of a random-walk block.
pub fn rw1_penalty(effects: &[f64]) -> f64 {
    effects.windows(2).map(|w| (w[1] - w[0]) * (w[1] - w[0])).sum()
}

/// Subtracts the block mean so the effects sum to zero.
pub fn project_sum_to_zero(effects: &mut [f64]) {
    if effects.is_empty() {
        return;
    }
    let m = effects.iter().sum::<f64>() / effects.len() as f64;
    effects.iter_mut().for_each(|f| *f -= m);
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogPosterior {
    pub value: f64,
    pub log_likelihood: f64,
    pub log_prior: f64,
    pub gradient: Vec<f64>,
}

/// Log prior of every block (up to a constant) and its gradient, added into
/// `grad`.
pub(crate) fn log_prior_with_gradient(theta: &[f64], design: &DesignMatrix, grad: &mut [f64]) -> f64 {
    let layout = &design.layout;
    let pr = &design.priors;
    let mut lp = 0.0;

    lp -= theta[0] * theta[0] / (2.0 * pr.intercept_var);
    grad[0] -= theta[0] / pr.intercept_var;
    for j in layout.fixed() {
        lp -= theta[j] * theta[j] / (2.0 * pr.fixed_var);
        grad[j] -= theta[j] / pr.fixed_var;
    }

    for (range, &lt) in layout.iid.iter().zip(&layout.log_tau_iid) {
        let log_tau = theta[lt];
        let tau = log_tau.exp();
        let f = &theta[range.clone()];
        let ss: f64 = f.iter().map(|x| x * x).sum();
        let rank = f.len() as f64;
        lp += 0.5 * rank * log_tau - 0.5 * tau * ss;
        for (k, x) in f.iter().enumerate() {
            grad[range.start + k] -= tau * x;
        }
        lp += pr.tau_shape * log_tau - pr.tau_rate * tau;
        grad[lt] += 0.5 * rank - 0.5 * tau * ss + pr.tau_shape - pr.tau_rate * tau;
    }

    for (range, &lt) in layout.rw1.iter().zip(&layout.log_tau_rw1) {
        let log_tau = theta[lt];
        let tau = log_tau.exp();
        let f = &theta[range.clone()];
        let pen = rw1_penalty(f);
        let rank = (f.len() - 1) as f64;
        lp += 0.5 * rank * log_tau - 0.5 * tau * pen;
        let k_last = f.len() - 1;
        for k in 0..f.len() {
            let mut q = 0.0;
            if k > 0 {
                q += f[k] - f[k - 1];
            }
            if k < k_last {
                q -= f[k + 1] - f[k];
            }
            grad[range.start + k] -= tau * q;
        }
        lp += pr.tau_shape * log_tau - pr.tau_rate * tau;
        grad[lt] += 0.5 * rank - 0.5 * tau * pen + pr.tau_shape - pr.tau_rate * tau;
    }
    lp
}

/// Adds `sum_i r_i * d eta_i / d theta` for residuals `r` into `grad`.
pub(crate) fn accumulate_likelihood_gradient(residual: &[f64], design: &DesignMatrix, grad: &mut [f64]) {
    let layout = &design.layout;
    grad[0] += residual.iter().sum::<f64>();
    for (j, col) in design.fixed.iter().enumerate() {
        grad[1 + j] += residual.iter().zip(col).map(|(r, x)| r * x).sum::<f64>();
    }
    for (t, range) in design.iid.iter().zip(&layout.iid) {
        for (r, &k) in residual.iter().zip(&t.index) {
            grad[range.start + k] += r;
        }
    }
    for (t, range) in design.rw1.iter().zip(&layout.rw1) {
        for (r, &k) in residual.iter().zip(&t.factor.index) {
            grad[range.start + k] += r;
        }
    }
}

/// Bernoulli/logit log-posterior (up to an additive constant) and its
/// gradient with respect to every entry of the parameter vector.
///
/// Priors: Gaussian on the intercept and fixed slopes; `N(0, 1/tau)` on iid
/// effects; intrinsic first-order random walk with precision `tau` on RW1
/// effects; `Gamma(shape, rate)` on every `tau`, parameterized by `log tau`
/// with its Jacobian.
pub fn log_posterior(params: &ParameterVector, design: &DesignMatrix, labels: &[u8]) -> Result<LogPosterior, ModelError> {
    check_shape(params, design)?;
    check_labels(labels)?;
    if labels.len() != design.n_rows {
        return Err(ModelError::Shape(format!("{} labels for {} design rows", labels.len(), design.n_rows)));
    }
    let theta = params.as_slice();
    let mut eta = vec![0.0; design.n_rows];
    linear_predictor_fast(theta, design, &mut eta);
    let log_lik = log_likelihood(&eta, labels);
    let residual: Vec<f64> = eta.iter().zip(labels).map(|(&e, &y)| y as f64 - inverse_logit(e)).collect();
    let mut gradient = vec![0.0; theta.len()];
    accumulate_likelihood_gradient(&residual, design, &mut gradient);
    let log_prior = log_prior_with_gradient(theta, design, &mut gradient);
    Ok(LogPosterior { value: log_lik + log_prior, log_likelihood: log_lik, log_prior, gradient })
}
