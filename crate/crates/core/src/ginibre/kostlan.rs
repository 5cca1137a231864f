//! Exact law of the Ginibre spectral radius.
//!
//! The squared moduli of the eigenvalues of `√n X` are distributed as
//! independent `Gamma(k, 1)` variables, `k = 1..n`, so
//!
//! ```text
//! P(ρ(X) ≤ r) = Π_k P(k, n r²),
//! ```
//!
//! with `P` the regularized lower incomplete gamma function. For integer `k`,
//! `P(k, x)` is the Poisson upper tail `Σ_{j≥k} e^{-x} x^j/j!`, which lets the
//! whole product be evaluated from one pass over the Poisson probabilities.

use crate::error::{Error, Result};
use crate::girko::gamma_n;
use crate::quad::pairwise_sum;

use super::gamma::ln_poisson_term;

fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// `log P(ρ ≤ r)` for the `n × n` complex Ginibre ensemble.
pub fn kostlan_radius_log_cdf(n: usize, r: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidDimension("spectral radius needs n >= 1".into()));
    }
    if !(r >= 0.0) {
        return Err(Error::InvalidParameter(format!("radius must be nonnegative, got {r}")));
    }
    if r == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    if r.is_infinite() {
        return Ok(0.0);
    }
    let x = n as f64 * r * r;
    let mut terms = vec![0.0; n];
    // k ≤ x: P(k, x) = 1 - Σ_{j<k} p_j with the lower sum at most about 1/2.
    let split = (x.floor() as usize).min(n);
    let mut lower = 0.0;
    for k in 1..=split {
        lower += ln_poisson_term((k - 1) as f64, x).exp();
        terms[k - 1] = (-lower).ln_1p();
    }
    // k > x: accumulate the upper tail downward in log space from a point
    // where the Poisson terms are negligible.
    if split < n {
        let top = n.max((x + 40.0 * x.sqrt() + 50.0).ceil() as usize);
        let mut upper = f64::NEG_INFINITY;
        for j in (split + 1..=top).rev() {
            upper = log_add_exp(upper, ln_poisson_term(j as f64, x));
            if j <= n {
                terms[j - 1] = upper;
            }
        }
    }
    Ok(pairwise_sum(&terms))
}

/// `P(ρ ≤ r)`.
pub fn kostlan_radius_cdf(n: usize, r: f64) -> Result<f64> {
    Ok(kostlan_radius_log_cdf(n, r)?.exp())
}

/// `P(ρ > r)` without cancellation when the CDF is close to one.
pub fn kostlan_radius_sf(n: usize, r: f64) -> Result<f64> {
    Ok(-kostlan_radius_log_cdf(n, r)?.exp_m1())
}

/// Standard Gumbel CDF `exp(-e^{-t})`.
pub fn gumbel_cdf(t: f64) -> f64 {
    (-(-t).exp()).exp()
}

/// Exact radius law for one `n`, with the Gumbel rescaling
/// `G_n = √(4nγ_n)(ρ - 1 - √(γ_n/4n))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadiusLaw {
    pub n: usize,
    pub gamma_n: f64,
}

impl RadiusLaw {
    /// Needs `γ_n > 0`, which holds for `n ≥ 171`.
    pub fn new(n: usize) -> Result<Self> {
        let g = gamma_n(n as f64);
        if n < 8 || !(g > 0.0) {
            return Err(Error::InvalidDimension(format!(
                "Gumbel rescaling needs gamma_n > 0, got {g:.4} at n = {n}"
            )));
        }
        Ok(Self { n, gamma_n: g })
    }

    /// Centering `1 + √(γ_n/4n)`.
    pub fn center(&self) -> f64 {
        1.0 + (self.gamma_n / (4.0 * self.n as f64)).sqrt()
    }

    /// Fluctuation scale `1/√(4nγ_n)`.
    pub fn scale(&self) -> f64 {
        1.0 / (4.0 * self.n as f64 * self.gamma_n).sqrt()
    }

    /// Radius at Gumbel coordinate `t`.
    pub fn radius_at(&self, t: f64) -> f64 {
        self.center() + t * self.scale()
    }

    /// Gumbel coordinate of radius `r`.
    pub fn gumbel_coordinate(&self, r: f64) -> f64 {
        (r - self.center()) / self.scale()
    }

    pub fn cdf(&self, r: f64) -> Result<f64> {
        kostlan_radius_cdf(self.n, r)
    }

    pub fn log_cdf(&self, r: f64) -> Result<f64> {
        kostlan_radius_log_cdf(self.n, r)
    }

    /// `P(G_n ≤ t)`; zero when `r(t)` is negative.
    pub fn gumbel_cdf(&self, t: f64) -> Result<f64> {
        self.cdf(self.radius_at(t).max(0.0))
    }

    /// `P(|ρ - 1 - √(γ_n/4n)| ≥ c/√(n log n))`.
    pub fn deviation_probability(&self, c: f64) -> Result<f64> {
        let nf = self.n as f64;
        let d = c / (nf * nf.ln()).sqrt();
        let hi = kostlan_radius_sf(self.n, self.center() + d)?;
        let lo = self.cdf((self.center() - d).max(0.0))?;
        Ok(hi + lo)
    }

    /// `sup |P(G_n ≤ t) - exp(-e^{-t})|` over an even grid of `points` values in `[t0, t1]`.
    pub fn sup_gumbel_error(&self, t0: f64, t1: f64, points: usize) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for i in 0..points {
            let t = t0 + (t1 - t0) * i as f64 / (points - 1).max(1) as f64;
            worst = worst.max((self.gumbel_cdf(t)? - gumbel_cdf(t)).abs());
        }
        Ok(worst)
    }
}

/// `P(G_n ≤ t)`.
pub fn gumbel_transform_cdf(n: usize, t: f64) -> Result<f64> {
    RadiusLaw::new(n)?.gumbel_cdf(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ginibre::gamma::reg_inc_gamma_p;

    #[test]
    fn one_by_one_is_exponential() {
        let p = kostlan_radius_cdf(1, 1.0).unwrap();
        assert!((p - (1.0 - (-1f64).exp())).abs() < 1e-15);
        assert!((p - 0.632_121).abs() < 1e-6);
    }

    #[test]
    fn zero_and_infinite_radius() {
        for n in [1, 5, 300] {
            assert_eq!(kostlan_radius_cdf(n, 0.0).unwrap(), 0.0);
            assert_eq!(kostlan_radius_cdf(n, f64::INFINITY).unwrap(), 1.0);
            assert!((kostlan_radius_cdf(n, 8.0).unwrap() - 1.0).abs() < 1e-12);
        }
        assert!(kostlan_radius_cdf(0, 1.0).is_err());
        assert!(kostlan_radius_cdf(3, -1.0).is_err());
    }

    #[test]
    fn poisson_pass_matches_direct_product() {
        for &(n, r) in &[
            (7usize, 0.4),
            (7, 1.3),
            (64, 0.9),
            (64, 1.05),
            (64, 1.4),
            (500, 0.98),
            (500, 1.1),
        ] {
            let x = n as f64 * r * r;
            let direct: f64 = (1..=n).map(|k| reg_inc_gamma_p(k as f64, x).unwrap().ln()).sum();
            let fast = kostlan_radius_log_cdf(n, r).unwrap();
            assert!(
                (fast - direct).abs() <= 1e-11 * direct.abs().max(1.0),
                "n={n} r={r}: {fast} vs {direct}"
            );
        }
    }

    #[test]
    fn cdf_is_monotone() {
        let mut prev = 0.0;
        for i in 0..400 {
            let r = 0.8 + i as f64 * 0.001;
            let p = kostlan_radius_cdf(256, r).unwrap();
            assert!(p >= prev);
            prev = p;
        }
    }

    #[test]
    fn gumbel_transform_is_monotone() {
        let law = RadiusLaw::new(1000).unwrap();
        let mut prev = 0.0;
        for i in 0..=70 {
            let t = -3.0 + 0.1 * i as f64;
            let p = law.gumbel_cdf(t).unwrap();
            assert!(p >= prev);
            assert!((law.gumbel_coordinate(law.radius_at(t)) - t).abs() < 1e-9);
            prev = p;
        }
        assert!(RadiusLaw::new(100).is_err());
        assert!(gumbel_transform_cdf(4, 0.0).is_err());
    }

    #[test]
    fn deviation_probability_shrinks_with_c() {
        let law = RadiusLaw::new(1000).unwrap();
        let p: Vec<f64> = [1.0, 2.0, 4.0, 8.0]
            .iter()
            .map(|&c| law.deviation_probability(c).unwrap())
            .collect();
        for w in p.windows(2) {
            assert!(w[1] <= w[0]);
        }
        assert!(p[0] > 0.0 && p[0] < 1.0);
    }
}
