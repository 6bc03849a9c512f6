//! Blockwise Gibbs sampler with Metropolis moves for the precisions.
//!
//! One sweep updates, in order:
//! 1. intercept, fixed slopes and every class effect jointly, drawn exactly
//!    from their Gaussian full conditional given Pólya-Gamma auxiliary
//!    weights, then conditioned on the sum-to-zero constraints;
//! 2. for every random term: its precision from the exact Gamma conditional,
//!    followed by a Metropolis move that rescales precision and effects
//!    together (`log tau += e`, `effects *= exp(-e / 2)`).
//!
//! Step sizes of the Metropolis moves adapt during the first phase only and
//! are frozen afterwards.

use std::collections::BTreeMap;
use std::ops::Range;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::diagnostics::{compute_diagnostics, lag1_autocorrelation, Diagnostics};
use super::polya_gamma::sample_pg1;
use super::samples::{PosteriorSamples, SamplerMeta};
use super::InferenceError;
use crate::model::posterior::{check_labels, linear_predictor_fast, log_prior_with_gradient, rw1_penalty};
use crate::model::DesignMatrix;
use crate::stats::log1p_exp;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    /// Retained draws over all chains.
    pub draws: usize,
    pub chains: usize,
    pub seed: u64,
    /// Iterations during which step sizes adapt.
    pub adapt_iterations: usize,
    /// Frozen-kernel iterations used to pick the thinning interval.
    pub pilot_iterations: usize,
    /// Fixed thinning; chosen from the pilot run when `None`.
    pub thin: Option<usize>,
    pub max_thin: usize,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self { draws: 1000, chains: 2, seed: 1, adapt_iterations: 1000, pilot_iterations: 500, thin: None, max_thin: 100 }
    }
}

impl SamplerConfig {
    pub fn with_draws(draws: usize, seed: u64) -> Self {
        Self { draws, seed, ..Self::default() }
    }
}

#[derive(Debug, Clone)]
pub struct PosteriorFit {
    pub samples: PosteriorSamples,
    pub diagnostics: Diagnostics,
}

/// Random term as the sampler sees it.
#[derive(Debug, Clone)]
struct RandomTerm {
    name: String,
    effects: Range<usize>,
    log_tau: usize,
    rw1: bool,
    center: bool,
    /// Rank of the prior precision.
    rank: f64,
    /// Dimension the effects actually move in.
    free_dim: f64,
}

impl RandomTerm {
    fn quad(&self, f: &[f64]) -> f64 {
        if self.rw1 {
            rw1_penalty(f)
        } else {
            f.iter().map(|x| x * x).sum()
        }
    }
}

/// Robbins-Monro step size of a scalar random-walk move.
#[derive(Debug, Clone)]
struct StepSize {
    log_sd: f64,
    target: f64,
    accepted: u64,
    proposed: u64,
}

impl StepSize {
    fn new(sd: f64) -> Self {
        Self { log_sd: sd.ln(), target: 0.4, accepted: 0, proposed: 0 }
    }

    fn adapt(&mut self, iter: usize, accepted: bool) {
        let gamma = ((iter + 1) as f64).powf(-0.6).min(0.5);
        self.log_sd += gamma * (f64::from(u8::from(accepted)) - self.target);
        self.log_sd = self.log_sd.clamp(-20.0, 5.0);
    }

    fn record(&mut self, accepted: bool) {
        self.proposed += 1;
        self.accepted += u64::from(accepted);
    }

    fn rate(&self) -> f64 {
        if self.proposed == 0 {
            f64::NAN
        } else {
            self.accepted as f64 / self.proposed as f64
        }
    }
}

/// Lower Cholesky factor of a symmetric positive definite row-major matrix,
/// in place. Returns `false` when a pivot is not positive.
fn cholesky_in_place(a: &mut [f64], d: usize) -> bool {
    for j in 0..d {
        let mut s = a[j * d + j];
        for k in 0..j {
            s -= a[j * d + k] * a[j * d + k];
        }
        if !(s > 0.0) || !s.is_finite() {
            return false;
        }
        let l = s.sqrt();
        a[j * d + j] = l;
        for i in j + 1..d {
            let mut s = a[i * d + j];
            for k in 0..j {
                s -= a[i * d + k] * a[j * d + k];
            }
            a[i * d + j] = s / l;
        }
        for k in j + 1..d {
            a[j * d + k] = 0.0;
        }
    }
    true
}

/// Solves `L x = b` in place.
fn forward(l: &[f64], d: usize, x: &mut [f64]) {
    for i in 0..d {
        let s: f64 = (0..i).map(|k| l[i * d + k] * x[k]).sum();
        x[i] = (x[i] - s) / l[i * d + i];
    }
}

/// Solves `L^T x = b` in place.
fn backward(l: &[f64], d: usize, x: &mut [f64]) {
    for i in (0..d).rev() {
        let s: f64 = (i + 1..d).map(|k| l[k * d + i] * x[k]).sum();
        x[i] = (x[i] - s) / l[i * d + i];
    }
}

/// Non-zero design entries of every row over the latent parameters.
struct SparseRows {
    start: Vec<usize>,
    index: Vec<usize>,
    value: Vec<f64>,
}

impl SparseRows {
    fn new(design: &DesignMatrix) -> Self {
        let layout = &design.layout;
        let mut start = vec![0];
        let mut index = Vec::new();
        let mut value = Vec::new();
        for i in 0..design.n_rows {
            index.push(0);
            value.push(1.0);
            for (j, col) in design.fixed.iter().enumerate() {
                index.push(1 + j);
                value.push(col[i]);
            }
            for (t, r) in design.iid.iter().zip(&layout.iid) {
                index.push(r.start + t.index[i]);
                value.push(1.0);
            }
            for (t, r) in design.rw1.iter().zip(&layout.rw1) {
                index.push(r.start + t.factor.index[i]);
                value.push(1.0);
            }
            start.push(index.len());
        }
        Self { start, index, value }
    }

    fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.start[i]..self.start[i + 1];
        (&self.index[r.clone()], &self.value[r])
    }
}

struct Chain<'a> {
    design: &'a DesignMatrix,
    labels: &'a [u8],
    rows: SparseRows,
    /// Intercept, slopes and effects occupy `theta[..n_latent]`.
    n_latent: usize,
    terms: Vec<RandomTerm>,
    steps: Vec<StepSize>,
    theta: Vec<f64>,
    eta: Vec<f64>,
    /// `log(1 + exp(eta))` per row.
    softplus: Vec<f64>,
    eta_new: Vec<f64>,
    softplus_new: Vec<f64>,
    precision: Vec<f64>,
    rng: ChaCha8Rng,
    iter: usize,
    adapting: bool,
}

impl<'a> Chain<'a> {
    fn new(design: &'a DesignMatrix, labels: &'a [u8], seed: u64, chain: usize) -> Self {
        let layout = &design.layout;
        let mut terms = Vec::new();
        for (t, (r, &lt)) in design.iid.iter().zip(layout.iid.iter().zip(&layout.log_tau_iid)) {
            let d = r.len() as f64;
            terms.push(RandomTerm {
                name: t.name.clone(),
                effects: r.clone(),
                log_tau: lt,
                rw1: false,
                center: false,
                rank: d,
                free_dim: d,
            });
        }
        for (t, (r, &lt)) in design.rw1.iter().zip(layout.rw1.iter().zip(&layout.log_tau_rw1)) {
            let k = r.len() as f64;
            terms.push(RandomTerm {
                name: t.factor.name.clone(),
                effects: r.clone(),
                log_tau: lt,
                rw1: true,
                center: t.sum_to_zero,
                rank: k - 1.0,
                free_dim: if t.sum_to_zero { k - 1.0 } else { k },
            });
        }
        let n_latent = layout.log_tau_iid.iter().chain(&layout.log_tau_rw1).copied().min().unwrap_or(layout.len());
        let steps = terms.iter().map(|_| StepSize::new(0.5)).collect();

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(chain as u64);
        let n = design.n_rows;
        let theta = vec![0.0; layout.len()];
        let mut eta = vec![0.0; n];
        linear_predictor_fast(&theta, design, &mut eta);
        let softplus = eta.iter().map(|&e| log1p_exp(e)).collect();
        Self {
            design,
            labels,
            rows: SparseRows::new(design),
            n_latent,
            terms,
            steps,
            theta,
            eta,
            softplus,
            eta_new: vec![0.0; n],
            softplus_new: vec![0.0; n],
            precision: vec![0.0; n_latent * n_latent],
            rng,
            iter: 0,
            adapting: true,
        }
    }

    fn log_posterior(&self) -> f64 {
        let ll: f64 = self
            .eta
            .iter()
            .zip(&self.softplus)
            .zip(self.labels)
            .map(|((&e, &s), &y)| if y == 1 { e - s } else { -s })
            .sum();
        let mut scratch = vec![0.0; self.theta.len()];
        ll + log_prior_with_gradient(&self.theta, self.design, &mut scratch)
    }

    fn metropolis(&mut self, log_alpha: f64) -> bool {
        log_alpha >= 0.0 || self.rng.random::<f64>().ln() < log_alpha
    }

    fn sweep(&mut self) {
        self.update_latent();
        for t in 0..self.terms.len() {
            self.gibbs_precision(t);
            self.update_rescale(t);
        }
        self.iter += 1;
    }

    /// Joint Gaussian draw of intercept, slopes and effects given the
    /// auxiliary weights and the current precisions.
    fn update_latent(&mut self) {
        let p = self.n_latent;
        let pr = self.design.priors;
        let q = &mut self.precision;
        q.fill(0.0);
        q[0] = 1.0 / pr.intercept_var;
        for j in self.design.layout.fixed() {
            q[j * p + j] = 1.0 / pr.fixed_var;
        }
        for t in &self.terms {
            let tau = self.theta[t.log_tau].exp();
            let r = t.effects.clone();
            if t.rw1 {
                for k in r.clone() {
                    let neighbours = usize::from(k > r.start) + usize::from(k + 1 < r.end);
                    q[k * p + k] += tau * neighbours as f64;
                    if k + 1 < r.end {
                        q[k * p + k + 1] -= tau;
                        q[(k + 1) * p + k] -= tau;
                    }
                }
            } else {
                for k in r {
                    q[k * p + k] += tau;
                }
            }
        }

        let mut b = vec![0.0; p];
        for i in 0..self.design.n_rows {
            let omega = sample_pg1(self.eta[i], &mut self.rng);
            let kappa = f64::from(self.labels[i]) - 0.5;
            let (idx, val) = self.rows.row(i);
            for (a, (&ia, &va)) in idx.iter().zip(val).enumerate() {
                b[ia] += kappa * va;
                let w = omega * va;
                for (&ib, &vb) in idx[..=a].iter().zip(&val[..=a]) {
                    // lower triangle only; indices within a row may come in any order
                    let (r, c) = if ia >= ib { (ia, ib) } else { (ib, ia) };
                    q[r * p + c] += w * vb;
                }
            }
        }
        for r in 0..p {
            for c in 0..r {
                q[c * p + r] = q[r * p + c];
            }
        }
        if !cholesky_in_place(q, p) {
            // the prior keeps the precision definite; only rounding can get here
            return;
        }

        let l: &[f64] = q;
        let mut x = b;
        forward(l, p, &mut x);
        for v in x.iter_mut() {
            *v += self.rng.sample::<f64, _>(StandardNormal);
        }
        backward(l, p, &mut x);

        // condition on every sum-to-zero constraint
        let constrained: Vec<Range<usize>> = self.terms.iter().filter(|t| t.center).map(|t| t.effects.clone()).collect();
        if !constrained.is_empty() {
            let c = constrained.len();
            let mut w = vec![vec![0.0; p]; c];
            for (col, r) in w.iter_mut().zip(&constrained) {
                col[r.clone()].iter_mut().for_each(|v| *v = 1.0);
                forward(l, p, col);
                backward(l, p, col);
            }
            let mut s = vec![0.0; c * c];
            for a in 0..c {
                for (bb, r) in constrained.iter().enumerate() {
                    s[a * c + bb] = w[a][r.clone()].iter().sum();
                }
            }
            let mut rhs: Vec<f64> = constrained.iter().map(|r| x[r.clone()].iter().sum()).collect();
            if cholesky_in_place(&mut s, c) {
                forward(&s, c, &mut rhs);
                backward(&s, c, &mut rhs);
                for (col, coef) in w.iter().zip(&rhs) {
                    x.iter_mut().zip(col).for_each(|(v, wv)| *v -= coef * wv);
                }
            }
            for r in &constrained {
                let m = x[r.clone()].iter().sum::<f64>() / r.len() as f64;
                x[r.clone()].iter_mut().for_each(|v| *v -= m);
            }
        }
        if x.iter().all(|v| v.is_finite()) {
            self.theta[..p].copy_from_slice(&x);
            self.refresh();
        }
    }

    fn gibbs_precision(&mut self, term: usize) {
        let t = &self.terms[term];
        let pr = self.design.priors;
        let q = t.quad(&self.theta[t.effects.clone()]);
        let shape = pr.tau_shape + 0.5 * t.rank;
        let rate = pr.tau_rate + 0.5 * q;
        let tau: f64 = Gamma::new(shape, 1.0 / rate).expect("positive gamma parameters").sample(&mut self.rng);
        // a zero draw would underflow log tau; keep the smallest positive value
        self.theta[t.log_tau] = tau.max(f64::MIN_POSITIVE).ln();
    }

    fn update_rescale(&mut self, term: usize) {
        let t = self.terms[term].clone();
        let eps = self.steps[term].log_sd.exp() * self.rng.sample::<f64, _>(StandardNormal);
        let factor = (-0.5 * eps).exp();
        let index = self.factor_index(term);
        let f = &self.theta[t.effects.clone()];
        let mut dll = 0.0;
        for i in 0..self.eta.len() {
            let fk = f[index[i]];
            let e = self.eta[i] + (fk * factor - fk);
            let sp = log1p_exp(e);
            dll += f64::from(self.labels[i]) * (e - self.eta[i]) - (sp - self.softplus[i]);
            self.eta_new[i] = e;
            self.softplus_new[i] = sp;
        }
        let pr = self.design.priors;
        let tau = self.theta[t.log_tau].exp();
        let tau_new = (self.theta[t.log_tau] + eps).exp();
        // tau * quad(f) is invariant under the move; what remains is the
        // prior normalizer, the Jacobian of the effect scaling and the
        // precision hyperprior
        let log_alpha = dll + 0.5 * (t.rank - t.free_dim) * eps + pr.tau_shape * eps - pr.tau_rate * (tau_new - tau);
        let accepted = log_alpha.is_finite() && self.metropolis(log_alpha);
        if accepted {
            self.theta[t.effects.clone()].iter_mut().for_each(|v| *v *= factor);
            self.theta[t.log_tau] += eps;
            std::mem::swap(&mut self.eta, &mut self.eta_new);
            std::mem::swap(&mut self.softplus, &mut self.softplus_new);
        }
        if self.adapting {
            self.steps[term].adapt(self.iter, accepted);
        } else {
            self.steps[term].record(accepted);
        }
    }

    fn factor_index(&self, term: usize) -> &'a [usize] {
        let design: &'a DesignMatrix = self.design;
        let n_iid = design.iid.len();
        if term < n_iid {
            &design.iid[term].index
        } else {
            &design.rw1[term - n_iid].factor.index
        }
    }

    fn refresh(&mut self) {
        linear_predictor_fast(&self.theta, self.design, &mut self.eta);
        for (s, &e) in self.softplus.iter_mut().zip(&self.eta) {
            *s = log1p_exp(e);
        }
    }

    fn run(&mut self, iterations: usize, mut on_iter: impl FnMut(&[f64], usize)) {
        for k in 0..iterations {
            self.sweep();
            on_iter(&self.theta, k);
        }
    }

    fn acceptance(&self) -> Vec<(String, f64)> {
        self.terms.iter().zip(&self.steps).map(|(t, s)| (format!("rescale[{}]", t.name), s.rate())).collect()
    }
}

/// Draws `config.draws` joint posterior samples of every parameter of the
/// design's layout. Chains run in parallel and are combined in chain order,
/// so the output depends only on the inputs and the seed.
pub fn sample_posterior(
    design: &DesignMatrix,
    labels: &[u8],
    config: &SamplerConfig,
) -> Result<PosteriorFit, InferenceError> {
    if config.draws < 100 {
        return Err(InferenceError::TooFewDraws(config.draws));
    }
    if config.chains == 0 || config.chains > config.draws {
        return Err(InferenceError::Config(format!("invalid chain count {}", config.chains)));
    }
    if labels.len() != design.n_rows {
        return Err(InferenceError::Shape(format!("{} labels for {} design rows", labels.len(), design.n_rows)));
    }
    check_labels(labels)?;

    let probe = Chain::new(design, labels, config.seed, 0);
    let lp0 = probe.log_posterior();
    if !lp0.is_finite() {
        return Err(InferenceError::NonFiniteInit(lp0));
    }
    drop(probe);

    let per_chain: Vec<usize> = (0..config.chains)
        .map(|c| config.draws / config.chains + usize::from(c < config.draws % config.chains))
        .collect();
    let p = design.layout.len();

    // phase 1: adaptation, then a frozen pilot run to measure autocorrelation
    let mut chains: Vec<(Chain, f64)> = (0..config.chains)
        .into_par_iter()
        .map(|c| {
            let mut chain = Chain::new(design, labels, config.seed, c);
            chain.run(config.adapt_iterations, |_, _| {});
            chain.adapting = false;
            chain.refresh();
            let mut pilot = vec![Vec::with_capacity(config.pilot_iterations); p];
            chain.run(config.pilot_iterations, |theta, _| {
                for (col, &v) in pilot.iter_mut().zip(theta) {
                    col.push(v);
                }
            });
            let rho = pilot.iter().map(|col| lag1_autocorrelation(col)).filter(|r| r.is_finite()).fold(0.0, f64::max);
            (chain, rho)
        })
        .collect();

    let thin = match config.thin {
        Some(t) => t.max(1),
        None => {
            let rho = chains.iter().map(|(_, r)| *r).fold(0.0, f64::max);
            thin_for(rho, config.max_thin)
        }
    };
    let warm = config.adapt_iterations + config.pilot_iterations;
    let longest = per_chain.iter().copied().max().unwrap_or(0) * thin;
    let extra_burn = longest.saturating_sub(warm);

    // phase 2: remaining burn-in, then retained draws
    type ChainOutput = (Vec<f64>, Vec<(String, f64)>);
    let results: Vec<ChainOutput> = chains
        .par_iter_mut()
        .zip(per_chain.par_iter())
        .map(|((chain, _), &n_keep)| {
            chain.run(extra_burn, |_, _| {});
            let mut kept = Vec::with_capacity(n_keep * p);
            chain.run(n_keep * thin, |theta, k| {
                if (k + 1) % thin == 0 {
                    kept.extend_from_slice(theta);
                }
            });
            (kept, chain.acceptance())
        })
        .collect();

    let mut values = Vec::with_capacity(config.draws * p);
    let mut acceptance: BTreeMap<String, f64> = BTreeMap::new();
    for (kept, acc) in &results {
        values.extend_from_slice(kept);
        for (name, rate) in acc {
            *acceptance.entry(name.clone()).or_default() += rate / config.chains as f64;
        }
    }
    let meta = SamplerMeta {
        seed: config.seed,
        chains: config.chains,
        chain_lengths: per_chain,
        adapt_iterations: config.adapt_iterations,
        burn_in: warm + extra_burn,
        thin,
        acceptance,
    };
    let samples = PosteriorSamples::new(design.layout.names.clone(), values, meta)?;
    let diagnostics = compute_diagnostics(&samples);
    Ok(PosteriorFit { samples, diagnostics })
}

/// Smallest thinning interval that brings a lag-1 autocorrelation `rho`
/// below 0.9, assuming geometric decay.
pub fn thin_for(rho: f64, max_thin: usize) -> usize {
    if !(rho > 0.9) {
        return 1;
    }
    if rho >= 1.0 {
        return max_thin.max(1);
    }
    let t = (0.9f64.ln() / rho.ln()).ceil() as usize + 1;
    t.clamp(1, max_thin.max(1))
}
