//! Small numeric helpers shared by the model, sampler and summaries.

/// Numerically stable `ln(1 + exp(x))`.
#[inline]
pub fn log1p_exp(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// `exp(eta) / (1 + exp(eta))`, evaluated without overflow for large `|eta|`.
#[inline]
pub fn inverse_logit(eta: f64) -> f64 {
    if eta >= 0.0 {
        1.0 / (1.0 + (-eta).exp())
    } else {
        let e = eta.exp();
        e / (1.0 + e)
    }
}

#[inline]
pub fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample (n - 1) standard deviation. Returns NaN for fewer than two values.
pub fn sample_sd(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 2 {
        return f64::NAN;
    }
    let m = mean(xs);
    let ss: f64 = xs.iter().map(|x| (x - m) * (x - m)).sum();
    (ss / (n - 1) as f64).sqrt()
}

/// Quantile of already sorted data by linear interpolation between order
/// statistics, with the k-th order statistic (1-based) placed at
/// `p = (k - 1) / (n - 1)`.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty slice");
    assert!((0.0..=1.0).contains(&p), "quantile level outside [0, 1]");
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * p;
    let lo = h.floor() as usize;
    if lo + 1 >= n {
        return sorted[n - 1];
    }
    let frac = h - lo as f64;
    sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
}

/// Sorts a copy of `xs` and evaluates several quantile levels at once.
pub fn quantiles(xs: &[f64], levels: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    levels.iter().map(|&p| quantile_sorted(&v, p)).collect()
}

/// Exact floating-point accumulator: keeps a list of non-overlapping partial
/// sums so that [`ExactSum::value`] returns the correctly rounded sum of every
/// value added, independent of the order of additions.
#[derive(Debug, Clone, Default)]
pub struct ExactSum {
    partials: Vec<f64>,
}

impl ExactSum {
    pub fn new() -> Self {
        Self { partials: Vec::with_capacity(8) }
    }

    pub fn clear(&mut self) {
        self.partials.clear();
    }

    pub fn add(&mut self, mut x: f64) {
        debug_assert!(x.is_finite(), "ExactSum only accepts finite values");
        let mut i = 0;
        for j in 0..self.partials.len() {
            let mut y = self.partials[j];
            if x.abs() < y.abs() {
                std::mem::swap(&mut x, &mut y);
            }
            let hi = x + y;
            let lo = y - (hi - x);
            if lo != 0.0 {
                self.partials[i] = lo;
                i += 1;
            }
            x = hi;
        }
        self.partials.truncate(i);
        self.partials.push(x);
    }

    pub fn value(&self) -> f64 {
        let p = &self.partials;
        let mut n = p.len();
        if n == 0 {
            return 0.0;
        }
        n -= 1;
        let mut hi = p[n];
        let mut lo = 0.0;
        while n > 0 {
            let x = hi;
            n -= 1;
            let y = p[n];
            hi = x + y;
            let yr = hi - x;
            lo = y - yr;
            if lo != 0.0 {
                break;
            }
        }
        // round-half-even correction when the remaining partials push the
        // discarded tail past an exact halfway point
        if n > 0 && ((lo < 0.0 && p[n - 1] < 0.0) || (lo > 0.0 && p[n - 1] > 0.0)) {
            let y = lo * 2.0;
            let x = hi + y;
            let yr = x - hi;
            if y == yr {
                hi = x;
            }
        }
        hi
    }
}

/// Correctly rounded sum of a sequence.
pub fn exact_sum<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    let mut acc = ExactSum::new();
    for x in xs {
        acc.add(x);
    }
    acc.value()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn inverse_logit_basics() {
        assert_eq!(inverse_logit(0.0), 0.5);
        assert_eq!(inverse_logit(1000.0), 1.0);
        assert_eq!(inverse_logit(-1000.0), 0.0);
        assert!(inverse_logit(35.0) < 1.0);
        assert!(inverse_logit(-35.0) > 0.0);
        for &e in &[0.3, 2.0, 7.5, 20.0] {
            assert!((inverse_logit(-e) - (1.0 - inverse_logit(e))).abs() < 1e-15);
        }
    }

    #[test]
    fn log1p_exp_matches_naive_where_safe() {
        for &x in &[-30.0, -2.0, 0.0, 0.5, 3.0, 30.0] {
            let naive = (1.0f64 + f64::exp(x)).ln();
            assert!((log1p_exp(x) - naive).abs() < 1e-12);
        }
        assert_eq!(log1p_exp(800.0), 800.0);
    }

    #[test]
    fn quantile_interpolation_on_tenths() {
        let v: Vec<f64> = (1..=10).map(|k| k as f64 / 10.0).collect();
        let q = quantiles(&v, &[0.025, 0.5, 0.975]);
        // h = 9p: 0.225 -> 0.1 + 0.225 * 0.1; 4.5 -> 0.55; 8.775 -> 0.9 + 0.775 * 0.1
        assert!((q[0] - 0.1225).abs() < 1e-15);
        assert!((q[1] - 0.55).abs() < 1e-15);
        assert!((q[2] - 0.9775).abs() < 1e-15);
    }

    #[test]
    fn sample_sd_of_arithmetic_sequence() {
        assert_eq!(sample_sd(&[10.0, 20.0, 30.0]), 10.0);
        assert!(sample_sd(&[1.0]).is_nan());
    }

    #[test]
    fn exact_sum_cancels() {
        assert_eq!(exact_sum([1e100, 1.0, -1e100]), 1.0);
        assert_eq!(exact_sum([0.1; 10]), 1.0);
        assert_eq!(exact_sum([1e-20, 1.0, -1.0]), 1e-20);
    }

    proptest! {
        #[test]
        fn exact_sum_is_order_independent(mut xs in proptest::collection::vec(-1e6f64..1e6, 1..20)) {
            let a = exact_sum(xs.iter().copied());
            xs.reverse();
            let b = exact_sum(xs.iter().copied());
            xs.sort_by(f64::total_cmp);
            let c = exact_sum(xs.iter().copied());
            prop_assert_eq!(a.to_bits(), b.to_bits());
            prop_assert_eq!(a.to_bits(), c.to_bits());
        }

        #[test]
        fn logit_round_trip(p in 1e-6f64..(1.0 - 1e-6)) {
            prop_assert!((inverse_logit(logit(p)) - p).abs() < 1e-12);
        }
    }
}
