//! The Ginibre correlation kernel
//!
//! ```text
//! K̃_n(z, w) = (n/π) e^{-n(|z|² + |w|²)/2} Σ_{k<n} (n z w̄)^k / k!
//!           = (n/π) e^{-n(|z|² + |w|² - 2 z w̄)/2} Γ(n, n z w̄)/Γ(n).
//! ```
//!
//! Values are kept as `mantissa · e^{log_scale}` so far-field evaluations
//! neither underflow nor lose their phase.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::girko::gamma_n;

use super::gamma::ln_reg_inc_gamma_q;

/// Relative cancellation beyond which an off-diagonal value is flagged.
pub const CANCELLATION_LIMIT: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelEval {
    pub n: usize,
    pub z: Complex64,
    pub w: Complex64,
    pub mantissa: Complex64,
    pub log_scale: f64,
    /// Ratio `Σ|terms| / |Σ terms|` exceeded [`CANCELLATION_LIMIT`].
    pub lost_precision: bool,
}

impl KernelEval {
    pub fn value(&self) -> Complex64 {
        self.mantissa * self.log_scale.exp()
    }

    /// `log |K̃_n(z, w)|`.
    pub fn ln_abs(&self) -> f64 {
        self.mantissa.norm().ln() + self.log_scale
    }
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidDimension("kernel needs n >= 1".into()));
    }
    Ok(())
}

/// `K̃_n(z, z) = (n/π) Q(n, n|z|²)`.
pub fn kernel_diag(n: usize, z: Complex64) -> Result<KernelEval> {
    check_n(n)?;
    let nf = n as f64;
    let ln_q = ln_reg_inc_gamma_q(nf, nf * z.norm_sqr())?;
    Ok(KernelEval {
        n,
        z,
        w: z,
        mantissa: Complex64::new(1.0, 0.0),
        log_scale: (nf / PI).ln() + ln_q,
        lost_precision: false,
    })
}

/// `K̃_n(z, w)` by direct summation of the truncated exponential series in
/// log scale. Costs `O(n)`.
pub fn kernel_offdiag(n: usize, z: Complex64, w: Complex64) -> Result<KernelEval> {
    check_n(n)?;
    let nf = n as f64;
    let base = -0.5 * nf * (z.norm_sqr() + w.norm_sqr()) + (nf / PI).ln();
    let zw = z * w.conj();
    if zw.norm() == 0.0 {
        return Ok(KernelEval {
            n,
            z,
            w,
            mantissa: Complex64::new(1.0, 0.0),
            log_scale: base,
            lost_precision: false,
        });
    }
    let ln_mod = (nf * zw.norm()).ln();
    let theta = zw.arg();
    // Log-magnitudes of the series terms and their maximum.
    let mut ln_terms = Vec::with_capacity(n);
    let mut ln_fact = 0.0;
    for k in 0..n {
        if k > 0 {
            ln_fact += (k as f64).ln();
        }
        ln_terms.push(k as f64 * ln_mod - ln_fact);
    }
    let top = ln_terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = Complex64::new(0.0, 0.0);
    let mut abs_sum = 0.0;
    for (k, &lt) in ln_terms.iter().enumerate() {
        let m = (lt - top).exp();
        sum += Complex64::from_polar(m, k as f64 * theta);
        abs_sum += m;
    }
    let lost_precision = sum.norm() * CANCELLATION_LIMIT < abs_sum;
    Ok(KernelEval {
        n,
        z,
        w,
        mantissa: sum,
        log_scale: base + top,
        lost_precision,
    })
}

/// The edge point `e^{iθ}(1 + √(γ_n/4n) + x/√(4γ_n n))`.
pub fn rescaled_point(n: usize, x: f64, theta: f64) -> Result<Complex64> {
    let nf = n as f64;
    let g = gamma_n(nf);
    if !(g > 0.0) {
        return Err(Error::InvalidDimension(format!(
            "edge rescaling needs gamma_n > 0, got {g:.4} at n = {n}"
        )));
    }
    let r = 1.0 + (g / (4.0 * nf)).sqrt() + x / (4.0 * g * nf).sqrt();
    Ok(Complex64::from_polar(r, theta))
}

/// `π K̃_n(z, z) / √(nγ_n)` at the rescaled point; tends to `e^{-x}`.
pub fn normalized_edge_density(n: usize, x: f64) -> Result<f64> {
    let z = rescaled_point(n, x, 0.0)?;
    let k = kernel_diag(n, z)?;
    let nf = n as f64;
    Ok(PI * k.value().re / (nf * gamma_n(nf)).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn origin_is_n_over_pi() {
        for n in [1usize, 3, 100, 10_000] {
            let k = kernel_diag(n, c(0.0, 0.0)).unwrap().value();
            assert!((k.re - n as f64 / PI).abs() <= 1e-14 * n as f64);
            assert_eq!(k.im, 0.0);
        }
    }

    #[test]
    fn diagonal_is_bounded_and_matches_series() {
        for n in [1usize, 5, 40, 300] {
            let cap = n as f64 / PI * (1.0 + 1e-10);
            for i in 0..60 {
                let z = Complex64::from_polar(0.03 * i as f64, 0.7 * i as f64);
                let d = kernel_diag(n, z).unwrap();
                let v = d.value().re;
                assert!((0.0..=cap).contains(&v));
                let s = kernel_offdiag(n, z, z).unwrap();
                assert!(s.value().im.abs() <= 1e-12 * v.max(1e-300));
                assert!((d.ln_abs() - s.ln_abs()).abs() < 1e-10, "n={n} z={z}");
            }
        }
    }

    #[test]
    fn offdiagonal_is_hermitian_and_decays() {
        let n = 50;
        let z = c(0.3, 0.2);
        let w = c(-0.1, 0.4);
        let a = kernel_offdiag(n, z, w).unwrap().value();
        let b = kernel_offdiag(n, w, z).unwrap().value();
        assert!((a - b.conj()).norm() < 1e-12 * a.norm());
        // Inside the bulk |K(z,w)|² ≈ (n/π)² e^{-n|z-w|²}.
        let expect = n as f64 / PI * (-0.5 * n as f64 * (z - w).norm_sqr()).exp();
        assert!((a.norm() / expect - 1.0).abs() < 1e-6);
        // Far apart values stay representable.
        let far = kernel_offdiag(2000, c(0.0, 0.0), c(0.9, 0.0)).unwrap();
        assert!(far.ln_abs() < -700.0 && far.ln_abs().is_finite());
    }

    #[test]
    fn reproducing_property() {
        // ∫ K(z,u) K(u,w) d²u = K(z,w), checked for n = 3 on a polar grid.
        let n = 3;
        let z = c(0.2, -0.1);
        let w = c(-0.3, 0.25);
        let gl = crate::quad::GaussLegendre::new(80);
        let m = 64;
        let mut acc = c(0.0, 0.0);
        for (r, wr) in gl.mapped(0.0, 3.0) {
            for j in 0..m {
                let u = Complex64::from_polar(r, 2.0 * PI * j as f64 / m as f64);
                let k1 = kernel_offdiag(n, z, u).unwrap().value();
                let k2 = kernel_offdiag(n, u, w).unwrap().value();
                acc += k1 * k2 * wr * r * 2.0 * PI / m as f64;
            }
        }
        let direct = kernel_offdiag(n, z, w).unwrap().value();
        assert!((acc - direct).norm() < 1e-8 * direct.norm());
    }

    #[test]
    fn edge_bound_for_positive_x() {
        let n = 1000;
        let g = gamma_n(n as f64);
        for i in 0..=20 {
            let x = 0.5 * i as f64;
            let z = rescaled_point(n, x, 0.3).unwrap();
            let k = kernel_diag(n, z).unwrap().value().re / (n as f64 * g).sqrt();
            assert!(k <= 10.0 * z.norm_sqr() * (-x / 3.0).exp(), "x = {x}: {k}");
        }
        let z = rescaled_point(n, 2.0, 0.0).unwrap();
        let k = kernel_diag(n, z).unwrap().value().re / (n as f64 * g).sqrt();
        assert!(k <= 10.0 * z.norm_sqr() * (-2.0f64 / 3.0).exp());
    }
}
