use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::samples::PosteriorSamples;

/// Acceptance below this rate after adaptation marks a block as stuck.
pub const STUCK_ACCEPTANCE: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterDiagnostics {
    pub name: String,
    pub ess: f64,
    pub split_rhat: f64,
    /// Lag-1 autocorrelation of the retained draws, averaged over chains.
    pub lag1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub parameters: Vec<ParameterDiagnostics>,
    pub acceptance: BTreeMap<String, f64>,
    /// Update blocks whose acceptance collapsed after adaptation.
    pub stuck_blocks: Vec<String>,
    pub min_ess: f64,
    pub max_rhat: f64,
}

impl Diagnostics {
    pub fn has_divergence(&self) -> bool {
        !self.stuck_blocks.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<&ParameterDiagnostics> {
        self.parameters.iter().find(|p| p.name == name)
    }
}

pub fn lag1_autocorrelation(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 3 {
        return f64::NAN;
    }
    let m = xs.iter().sum::<f64>() / n as f64;
    let c0: f64 = xs.iter().map(|x| (x - m) * (x - m)).sum();
    if c0 <= 0.0 {
        return f64::NAN;
    }
    let c1: f64 = xs.windows(2).map(|w| (w[0] - m) * (w[1] - m)).sum();
    c1 / c0
}

/// Effective sample size of one chain from Geyer's initial positive sequence
/// of autocorrelation pair sums. A constant chain yields `NaN`.
pub fn ess_single(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 4 {
        return f64::NAN;
    }
    let m = xs.iter().sum::<f64>() / n as f64;
    let d: Vec<f64> = xs.iter().map(|x| x - m).collect();
    let c0: f64 = d.iter().map(|x| x * x).sum::<f64>() / n as f64;
    if c0 <= 0.0 {
        return f64::NAN;
    }
    let rho = |k: usize| -> f64 { d[..n - k].iter().zip(&d[k..]).map(|(a, b)| a * b).sum::<f64>() / n as f64 / c0 };
    let mut sum = 0.0;
    let mut prev = f64::INFINITY;
    let mut k = 0;
    while k + 1 < n {
        let pair = if k == 0 { 1.0 + rho(1) } else { rho(k) + rho(k + 1) };
        if pair <= 0.0 {
            break;
        }
        // initial monotone sequence
        let pair = pair.min(prev);
        sum += pair;
        prev = pair;
        k += 2;
    }
    let tau = (2.0 * sum - 1.0).max(1.0 / (n as f64).log10().max(1.0));
    n as f64 / tau
}

/// Sum of per-chain effective sample sizes.
pub fn ess(chains: &[Vec<f64>]) -> f64 {
    chains.iter().map(|c| ess_single(c)).filter(|e| e.is_finite()).sum()
}

/// Split potential scale reduction over chain halves. Returns 1 for constant
/// draws.
pub fn split_rhat(chains: &[Vec<f64>]) -> f64 {
    let mut halves: Vec<&[f64]> = Vec::new();
    for c in chains {
        let h = c.len() / 2;
        if h >= 2 {
            halves.push(&c[..h]);
            halves.push(&c[c.len() - h..]);
        }
    }
    if halves.len() < 2 {
        return f64::NAN;
    }
    let n = halves.iter().map(|h| h.len()).min().unwrap_or(0);
    let halves: Vec<&[f64]> = halves.iter().map(|h| &h[..n]).collect();
    let m = halves.len() as f64;
    let nf = n as f64;
    let means: Vec<f64> = halves.iter().map(|h| h.iter().sum::<f64>() / nf).collect();
    let grand = means.iter().sum::<f64>() / m;
    let b = nf / (m - 1.0) * means.iter().map(|x| (x - grand) * (x - grand)).sum::<f64>();
    let w = halves
        .iter()
        .zip(&means)
        .map(|(h, mu)| h.iter().map(|x| (x - mu) * (x - mu)).sum::<f64>() / (nf - 1.0))
        .sum::<f64>()
        / m;
    if w <= 0.0 {
        return 1.0;
    }
    let var = (nf - 1.0) / nf * w + b / nf;
    (var / w).sqrt()
}

pub fn compute_diagnostics(samples: &PosteriorSamples) -> Diagnostics {
    let chains = samples.meta.chain_lengths.len();
    let mut parameters = Vec::with_capacity(samples.n_params());
    for (j, name) in samples.names().iter().enumerate() {
        let per_chain: Vec<Vec<f64>> = (0..chains).map(|c| samples.chain_column(c, j)).collect();
        let lags: Vec<f64> = per_chain.iter().map(|c| lag1_autocorrelation(c)).filter(|x| x.is_finite()).collect();
        parameters.push(ParameterDiagnostics {
            name: name.clone(),
            ess: ess(&per_chain),
            split_rhat: split_rhat(&per_chain),
            lag1: if lags.is_empty() { f64::NAN } else { lags.iter().sum::<f64>() / lags.len() as f64 },
        });
    }
    let stuck_blocks = samples
        .meta
        .acceptance
        .iter()
        .filter(|(_, &r)| !(r >= STUCK_ACCEPTANCE))
        .map(|(k, _)| k.clone())
        .collect();
    let min_ess = parameters.iter().map(|p| p.ess).fold(f64::INFINITY, f64::min);
    let max_rhat = parameters.iter().map(|p| p.split_rhat).filter(|r| r.is_finite()).fold(1.0, f64::max);
    Diagnostics { parameters, acceptance: samples.meta.acceptance.clone(), stuck_blocks, min_ess, max_rhat }
}
