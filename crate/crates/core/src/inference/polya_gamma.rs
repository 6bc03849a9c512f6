//! Exact draws from the Pólya-Gamma distribution `PG(1, z)` by the
//! alternating-series rejection sampler with truncation point 0.64.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use statrs::function::erf::erfc;

const TRUNC: f64 = 0.64;

fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// `n`-th coefficient of the alternating series for the density of
/// `J*(1, 0)` at `x`.
fn coefficient(n: usize, x: f64) -> f64 {
    let k = n as f64 + 0.5;
    if x > TRUNC {
        PI * k * (-0.5 * k * k * PI * PI * x).exp()
    } else {
        PI * k * (2.0 / (PI * x)).powf(1.5) * (-2.0 * k * k / x).exp()
    }
}

/// `P(X < t)` for an inverse Gaussian with mean `1 / c` and shape 1.
fn inverse_gaussian_cdf(t: f64, c: f64) -> f64 {
    let s = (1.0 / t).sqrt();
    let a = normal_cdf(s * (t * c - 1.0));
    let b = normal_cdf(-s * (t * c + 1.0));
    // exp(2c) * b can overflow for large c while b underflows; combine in logs
    let tail = if b > 0.0 { (2.0 * c + b.ln()).exp() } else { 0.0 };
    a + tail
}

/// Inverse Gaussian with mean `1 / c`, shape 1, truncated to `(0, TRUNC)`.
fn truncated_inverse_gaussian<R: Rng + ?Sized>(c: f64, rng: &mut R) -> f64 {
    let mu = if c > 0.0 { 1.0 / c } else { f64::INFINITY };
    if mu > TRUNC {
        loop {
            let x = loop {
                let e1: f64 = Exp1.sample(rng);
                let e2: f64 = Exp1.sample(rng);
                if e1 * e1 <= 2.0 * e2 / TRUNC {
                    let d = 1.0 + TRUNC * e1;
                    break TRUNC / (d * d);
                }
            };
            if rng.random::<f64>() <= (-0.5 * c * c * x).exp() {
                return x;
            }
        }
    }
    loop {
        let z: f64 = StandardNormal.sample(rng);
        let y = z * z;
        let mut x = mu + 0.5 * mu * mu * y - 0.5 * mu * (4.0 * mu * y + (mu * y) * (mu * y)).sqrt();
        if rng.random::<f64>() > mu / (mu + x) {
            x = mu * mu / x;
        }
        if x <= TRUNC {
            return x;
        }
    }
}

/// One draw of `PG(1, z)`.
pub fn sample_pg1<R: Rng + ?Sized>(z: f64, rng: &mut R) -> f64 {
    let c = 0.5 * z.abs();
    let k = PI * PI / 8.0 + 0.5 * c * c;
    let p = PI / (2.0 * k) * (-k * TRUNC).exp();
    let q = 2.0 * (-c).exp() * inverse_gaussian_cdf(TRUNC, c);
    loop {
        let x = if rng.random::<f64>() < p / (p + q) {
            let e: f64 = Exp1.sample(rng);
            TRUNC + e / k
        } else {
            truncated_inverse_gaussian(c, rng)
        };
        let mut s = coefficient(0, x);
        let y = rng.random::<f64>() * s;
        let mut n = 0;
        loop {
            n += 1;
            if n % 2 == 1 {
                s -= coefficient(n, x);
                if y <= s {
                    return 0.25 * x;
                }
            } else {
                s += coefficient(n, x);
                if y > s {
                    break;
                }
            }
        }
    }
}

/// Mean of `PG(1, z)`.
pub fn pg1_mean(z: f64) -> f64 {
    if z.abs() < 1e-6 {
        0.25
    } else {
        (0.5 * z).tanh() / (2.0 * z)
    }
}
