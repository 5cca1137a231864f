//! Mean and variance of radial linear statistics of Ginibre eigenvalues.
//!
//! With `x = n|z|²`, the one-point function `K̃_n(z,z) d²z` becomes
//! `Q(n, x) dx`, and the angular integrals in `∬ f f |K̃|²` collapse the
//! kernel's series term by term. Writing `p_k` for the `Gamma(k+1)` density,
//!
//! ```text
//! E Σ f(σ_i)   = Σ_{k<n} g_k,                 g_k = ∫ f(√(x/n)) p_k(x) dx,
//! Var Σ f(σ_i) = Σ_{k<n} ∫ (f(√(x/n)) - g_k)² p_k(x) dx,
//! ```
//!
//! so the variance is a sum of nonnegative terms and never cancels.

use crate::error::{Error, Result};
use crate::girko::RadialTestFunction;
use crate::quad::{integrate_split, pairwise_sum, GaussLegendre};

use super::gamma::{ln_poisson_term, reg_inc_gamma_p, reg_inc_gamma_q};

/// Largest `n` accepted by [`linstat_var`].
pub const VAR_MAX_N: usize = 2000;

const BAND_NODES: usize = 32;

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidDimension("linear statistics need n >= 1".into()));
    }
    Ok(())
}

/// `E Σ_i f(σ_i) = ∫_0^∞ f(√(x/n)) Q(n, x) dx`.
pub fn linstat_mean(n: usize, f: &RadialTestFunction) -> Result<f64> {
    check_n(n)?;
    let nf = n as f64;
    let xs = f.knots().map(|r| nf * r * r);
    let s = nf.sqrt();
    // Q(n, ·) drops from 1 to 0 over a window of width ~√n around n.
    let mut breaks = xs.to_vec();
    breaks.extend([-10.0, -3.0, 0.0, 3.0, 10.0, 40.0].iter().map(|k| nf + k * s));
    let upper = xs[3].min(nf + 60.0 * s + 60.0);
    let lower = xs[0];
    let g = |x: f64| {
        let q = reg_inc_gamma_q(nf, x).unwrap_or(0.0);
        if q == 0.0 {
            0.0
        } else {
            f.value((x / nf).sqrt()) * q
        }
    };
    let (v, _) = integrate_split(g, lower, upper, &breaks, 1e-11 * nf);
    Ok(v)
}

/// Weighted moments `∫ φ(f) p_k` over the transition bands only.
struct BandRule {
    nodes: Vec<(f64, f64, f64)>,
}

impl BandRule {
    /// Composite Gauss–Legendre on each band, in `x`, with panels no wider than `width`.
    fn new(f: &RadialTestFunction, n: f64, width: f64) -> Self {
        let gl = GaussLegendre::new(BAND_NODES);
        let mut nodes = Vec::new();
        for (a, b) in f.bands() {
            let (xa, xb) = (n * a * a, n * b * b);
            let panels = (((xb - xa) / width).ceil() as usize).clamp(1, 4096);
            let h = (xb - xa) / panels as f64;
            for p in 0..panels {
                let lo = xa + h * p as f64;
                for (x, w) in gl.mapped(lo, lo + h) {
                    nodes.push((x, w, f.value((x / n).sqrt())));
                }
            }
        }
        Self { nodes }
    }
}

/// Per-k mean and variance of `f(√(x/n))` under `Gamma(k+1)`.
fn moments_k(k: usize, f: &RadialTestFunction, n: f64) -> Result<(f64, f64)> {
    let a = k as f64 + 1.0;
    let [x0, x1, x2, x3] = f.knots().map(|r| n * r * r);
    let plateau = if x2 > x1 {
        (reg_inc_gamma_p(a, x2)? - reg_inc_gamma_p(a, x1)?).max(0.0)
    } else {
        0.0
    };
    let outside = reg_inc_gamma_q(a, x3)? + if x0 > 0.0 { reg_inc_gamma_p(a, x0)? } else { 0.0 };
    let spread = a.sqrt().max(1.0);
    let rule = BandRule::new(f, n, 0.5 * spread);
    let dens: Vec<(f64, f64)> = rule
        .nodes
        .iter()
        .map(|&(x, w, fx)| {
            let p = if x > 0.0 {
                (ln_poisson_term(k as f64, x)).exp()
            } else {
                0.0
            };
            (w * p, fx)
        })
        .collect();
    let band_mass: Vec<f64> = dens.iter().map(|&(wp, fx)| wp * fx).collect();
    let g = plateau + pairwise_sum(&band_mass);
    let band_var: Vec<f64> = dens.iter().map(|&(wp, fx)| wp * (fx - g) * (fx - g)).collect();
    let var = plateau * (1.0 - g) * (1.0 - g) + outside * g * g + pairwise_sum(&band_var);
    Ok((g, var))
}

/// `Var Σ_i f(σ_i)` for `n ≤` [`VAR_MAX_N`].
pub fn linstat_var(n: usize, f: &RadialTestFunction) -> Result<f64> {
    check_n(n)?;
    if n > VAR_MAX_N {
        return Err(Error::InvalidDimension(format!(
            "linstat_var supports n <= {VAR_MAX_N}, got {n}"
        )));
    }
    let nf = n as f64;
    let terms = (0..n)
        .map(|k| moments_k(k, f, nf).map(|m| m.1))
        .collect::<Result<Vec<_>>>()?;
    Ok(pairwise_sum(&terms))
}

/// `Σ_k g_k`, the mean assembled from the same per-k moments as the variance.
pub fn linstat_mean_by_levels(n: usize, f: &RadialTestFunction) -> Result<f64> {
    check_n(n)?;
    let nf = n as f64;
    let terms = (0..n)
        .map(|k| moments_k(k, f, nf).map(|m| m.0))
        .collect::<Result<Vec<_>>>()?;
    Ok(pairwise_sum(&terms))
}
