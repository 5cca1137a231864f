//! Small statistics toolkit for the Monte Carlo experiments.

use rand::Rng;

use crate::seed::rng_from_seed;

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

pub fn std_error(xs: &[f64]) -> f64 {
    (variance(xs) / xs.len() as f64).sqrt()
}

pub fn covariance(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let mx = mean(xs);
    let my = mean(ys);
    xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

pub fn pearson(xs: &[f64], ys: &[f64]) -> f64 {
    covariance(xs, ys) / (variance(xs) * variance(ys)).sqrt()
}

pub fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Wilson score interval for a binomial proportion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Proportion {
    pub hits: usize,
    pub trials: usize,
    pub estimate: f64,
    pub lo: f64,
    pub hi: f64,
}

impl Proportion {
    pub fn wilson(hits: usize, trials: usize, zscore: f64) -> Self {
        let n = trials as f64;
        let p = hits as f64 / n;
        let z2 = zscore * zscore;
        let denom = 1.0 + z2 / n;
        let centre = (p + z2 / (2.0 * n)) / denom;
        let half = zscore * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
        Self {
            hits,
            trials,
            estimate: p,
            // The interval always contains p; clamp away rounding at p = 0, 1.
            lo: (centre - half).clamp(0.0, p),
            hi: (centre + half).clamp(p, 1.0),
        }
    }

    /// Binomial standard deviation of the estimate.
    pub fn sigma(&self) -> f64 {
        let p = self.estimate;
        (p * (1.0 - p) / self.trials as f64).sqrt()
    }
}

/// One-sample Kolmogorov–Smirnov distance against a continuous CDF.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> f64 {
    let mut v = samples.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len() as f64;
    v.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Two-sample KS distance and asymptotic p-value.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> (f64, f64) {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_by(|p, q| p.total_cmp(q));
    y.sort_by(|p, q| p.total_cmp(q));
    let (na, nb) = (x.len(), y.len());
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < na && j < nb {
        let v = x[i].min(y[j]);
        while i < na && x[i] <= v {
            i += 1;
        }
        while j < nb && y[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / na as f64 - j as f64 / nb as f64).abs());
    }
    let ne = (na * nb) as f64 / (na + nb) as f64;
    let lambda = (ne.sqrt() + 0.12 + 0.11 / ne.sqrt()) * d;
    (d, kolmogorov_survival(lambda))
}

/// `P(K > lambda)` for the Kolmogorov distribution.
pub fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=200 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        sum += sign * term;
        if term < 1e-16 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    linear_slope(&lx, &ly)
}

pub fn linear_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let mx = mean(xs);
    let my = mean(ys);
    let num: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    num / den
}

/// Jackknife standard error of the Pearson correlation.
pub fn jackknife_correlation_se(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len();
    // Leave-one-out sums keep this O(n).
    let (sx, sy): (f64, f64) = (xs.iter().sum(), ys.iter().sum());
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let syy: f64 = ys.iter().map(|y| y * y).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| x * y).sum();
    let m = (n - 1) as f64;
    let loo: Vec<f64> = (0..n)
        .map(|i| {
            let (x, y) = (xs[i], ys[i]);
            let (ax, ay) = ((sx - x) / m, (sy - y) / m);
            let cxy = (sxy - x * y) / m - ax * ay;
            let cxx = (sxx - x * x) / m - ax * ax;
            let cyy = (syy - y * y) / m - ay * ay;
            cxy / (cxx * cyy).sqrt()
        })
        .collect();
    let lm = mean(&loo);
    (m / n as f64 * loo.iter().map(|v| (v - lm) * (v - lm)).sum::<f64>()).sqrt()
}

/// Percentile bootstrap interval and standard error for a statistic.
pub fn bootstrap<F: Fn(&[f64]) -> f64>(xs: &[f64], stat: F, resamples: usize, seed: u64) -> (f64, f64, f64) {
    let mut rng = rng_from_seed(seed);
    let n = xs.len();
    let mut buf = vec![0.0; n];
    let mut vals: Vec<f64> = (0..resamples)
        .map(|_| {
            for b in buf.iter_mut() {
                *b = xs[rng.random_range(0..n)];
            }
            stat(&buf)
        })
        .collect();
    let se = variance(&vals).sqrt();
    vals.sort_by(|a, b| a.total_cmp(b));
    let lo = vals[((resamples as f64) * 0.025) as usize];
    let hi = vals[(((resamples as f64) * 0.975) as usize).min(resamples - 1)];
    (lo, hi, se)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_interval_brackets_estimate() {
        for &(k, n) in &[(0usize, 10usize), (3, 10), (10, 10), (500, 1000)] {
            let p = Proportion::wilson(k, n, 1.96);
            assert!(0.0 <= p.lo && p.lo <= p.estimate && p.estimate <= p.hi && p.hi <= 1.0);
        }
        assert_eq!(Proportion::wilson(0, 50, 1.96).lo, 0.0);
        assert!(Proportion::wilson(0, 50, 1.96).hi > 0.0);
    }

    #[test]
    fn ks_against_uniform() {
        let xs: Vec<f64> = (0..1000).map(|i| (i as f64 + 0.5) / 1000.0).collect();
        assert!(ks_statistic(&xs, |x| x) <= 0.5e-3 + 1e-12);
        let (d, p) = ks_two_sample(&xs, &xs);
        assert_eq!(d, 0.0);
        assert_eq!(p, 1.0);
    }

    #[test]
    fn kolmogorov_tail_values() {
        // Classical critical value: P(K > 1.3581) = 0.05.
        assert!((kolmogorov_survival(1.3581) - 0.05).abs() < 1e-3);
    }

    #[test]
    fn slope_of_power_law() {
        let xs = [1.0, 10.0, 100.0];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(1.5)).collect();
        assert!((loglog_slope(&xs, &ys) - 1.5).abs() < 1e-12);
    }

    #[test]
    fn jackknife_matches_textbook_scale() {
        let xs: Vec<f64> = (0..400).map(|i| ((i * 37) % 101) as f64).collect();
        let ys: Vec<f64> = (0..400).map(|i| ((i * 53) % 97) as f64).collect();
        let r = pearson(&xs, &ys);
        let se = jackknife_correlation_se(&xs, &ys);
        // For weak correlation the standard error is close to 1/sqrt(n).
        assert!(r.abs() < 0.2);
        assert!(se > 0.02 && se < 0.1, "se = {se}");
    }
}
