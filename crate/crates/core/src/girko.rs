//! Radial cutoff functions and Girko's Hermitization formula.
//!
//! For a compactly supported `f`,
//!
//! ```text
//! Σ_i f(σ_i) = (1/2π) ∫ Δf(z) Σ_i log λ_i^z d²z,
//! ```
//!
//! where `σ_i` are the eigenvalues of `X` and `λ_i^z` the singular values of
//! `X - z`. The right side is also split at `η₀` and `T` into
//!
//! ```text
//! I₀   = -(1/4π) ∫ Δf Σ_i log((λ² + η₀²)/λ²)
//! I_T  = -(1/4π) ∫ Δf Σ_i log((λ² + T²)/(λ² + η₀²))
//! rem  =  (1/4π) ∫ Δf Σ_i log(λ² + T²)
//! ```
//!
//! which sum to the log-determinant form exactly.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::ensembles::MatrixSample;
use crate::error::{Error, Result};
use crate::hermitization::{singular_spectrum, SingularSpectrum};
use crate::mde::solve_mde;
use crate::quad::{pairwise_sum, GaussLegendre};

/// `γ_n = log n - 2 log log n - log 2π`.
pub fn gamma_n(n: f64) -> f64 {
    n.ln() - 2.0 * n.ln().ln() - (2.0 * PI).ln()
}

/// Quintic smoothstep `6t⁵ - 15t⁴ + 10t³` and its first two derivatives.
fn smoothstep(t: f64) -> (f64, f64, f64) {
    let t = t.clamp(0.0, 1.0);
    let s = t * t * t * (10.0 - 15.0 * t + 6.0 * t * t);
    let d1 = 30.0 * t * t * (1.0 - t) * (1.0 - t);
    let d2 = 60.0 * t * (1.0 - t) * (1.0 - 2.0 * t);
    (s, d1, d2)
}

/// `max |S''| = 10/√3` for the quintic smoothstep.
pub const SMOOTHSTEP_MAX_SECOND_DERIVATIVE: f64 = 5.773_502_691_896_258;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestFunctionKind {
    /// Annulus `|r - L| ≤ l`, plateau `|r - L| ≤ 4l/5`.
    AnnulusF1,
    /// Outer region `[L + 4l/5, R + l/5]`, plateau `[L + l, R]`, `R = 1 + n^{-1/2+τ}`.
    OuterF2,
    Custom,
}

/// Optional replacements for the default geometry.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TestFunctionOverrides {
    pub center: Option<f64>,
    pub half_width: Option<f64>,
    /// `C_n` in `l_n = C_n / √(n log n)`; default `(log n)^{1/4}`.
    pub c_n: Option<f64>,
    /// `τ` in the outer plateau radius of f2; default 0.1.
    pub tau: Option<f64>,
}

/// `f(r)`: zero below `r0`, quintic ramp up on `[r0, r1]`, one on `[r1, r2]`,
/// ramp down on `[r2, r3]`, zero beyond.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialTestFunction {
    pub kind: TestFunctionKind,
    pub center: f64,
    pub half_width: f64,
    pub n: usize,
    knots: [f64; 4],
}

impl RadialTestFunction {
    /// A custom profile from its four knots `r0 ≤ r1 ≤ r2 < r3`, with `r0 < r1` unless both are 0.
    pub fn custom(knots: [f64; 4]) -> Result<Self> {
        let [r0, r1, r2, r3] = knots;
        let ok = r0 >= 0.0 && r0 <= r1 && r1 <= r2 && r2 < r3 && (r0 < r1 || r1 == 0.0);
        if !ok || knots.iter().any(|k| !k.is_finite()) {
            return Err(Error::InvalidParameter(format!("invalid knots {knots:?}")));
        }
        Ok(Self {
            kind: TestFunctionKind::Custom,
            center: 0.5 * (r1 + r2),
            half_width: 0.5 * (r3 - r0),
            n: 0,
            knots,
        })
    }

    pub fn knots(&self) -> [f64; 4] {
        self.knots
    }

    /// The two transition bands where `Δf` can be nonzero.
    pub fn bands(&self) -> Vec<(f64, f64)> {
        let [r0, r1, r2, r3] = self.knots;
        let mut b = Vec::with_capacity(2);
        if r1 > r0 {
            b.push((r0, r1));
        }
        b.push((r2, r3));
        b
    }

    /// `(f, f', f'')` at radius `r ≥ 0`.
    pub fn derivatives(&self, r: f64) -> (f64, f64, f64) {
        let [r0, r1, r2, r3] = self.knots;
        if r <= r0 || r >= r3 {
            if r <= r0 && r0 == r1 && r0 == 0.0 && r < r3 {
                return (1.0, 0.0, 0.0);
            }
            return (0.0, 0.0, 0.0);
        }
        if r < r1 {
            let h = r1 - r0;
            let (s, d1, d2) = smoothstep((r - r0) / h);
            return (s, d1 / h, d2 / (h * h));
        }
        if r <= r2 {
            return (1.0, 0.0, 0.0);
        }
        let h = r3 - r2;
        let (s, d1, d2) = smoothstep((r3 - r) / h);
        (s, -d1 / h, d2 / (h * h))
    }

    pub fn value(&self, r: f64) -> f64 {
        self.derivatives(r).0
    }

    pub fn at(&self, z: Complex64) -> f64 {
        self.value(z.norm())
    }

    /// `sup |f''|`, attained at the interior extrema of the quintic bridge.
    pub fn second_derivative_sup(&self) -> f64 {
        self.bands()
            .iter()
            .map(|(a, b)| SMOOTHSTEP_MAX_SECOND_DERIVATIVE / ((b - a) * (b - a)))
            .fold(0.0, f64::max)
    }
}

/// Build f1 or f2 for dimension `n`.
pub fn make_test_function(
    kind: TestFunctionKind,
    n: usize,
    overrides: TestFunctionOverrides,
) -> Result<RadialTestFunction> {
    if kind == TestFunctionKind::Custom {
        return Err(Error::InvalidParameter(
            "use RadialTestFunction::custom for custom profiles".into(),
        ));
    }
    if n < 2 {
        return Err(Error::InvalidDimension(format!("test functions need n >= 2, got {n}")));
    }
    let nf = n as f64;
    let g = gamma_n(nf);
    let center = match overrides.center {
        Some(c) => c,
        None if g > 0.0 => 1.0 + (g / (4.0 * nf)).sqrt(),
        None => {
            return Err(Error::InvalidDimension(format!(
                "γ_n = {g:.4} ≤ 0 at n = {n}; pass an explicit center"
            )))
        }
    };
    let c_n = overrides.c_n.unwrap_or_else(|| nf.ln().powf(0.25));
    let l = overrides.half_width.unwrap_or(c_n / (nf * nf.ln()).sqrt());
    if !(l > 0.0) || !(center - l > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "invalid geometry L = {center}, l = {l}"
        )));
    }
    let knots = match kind {
        TestFunctionKind::AnnulusF1 => [center - l, center - 0.8 * l, center + 0.8 * l, center + l],
        TestFunctionKind::OuterF2 => {
            let tau = overrides.tau.unwrap_or(0.1);
            let outer = 1.0 + nf.powf(-0.5 + tau);
            if outer <= center + l {
                return Err(Error::InvalidParameter(format!(
                    "outer plateau radius {outer} lies inside L + l = {}",
                    center + l
                )));
            }
            [center + 0.8 * l, center + l, outer, outer + 0.2 * l]
        }
        TestFunctionKind::Custom => unreachable!(),
    };
    Ok(RadialTestFunction {
        kind,
        center,
        half_width: l,
        n,
        knots,
    })
}

/// `Δf = f'' + f'/r`; at `r = 0` the smooth limit `2 f''(0)`.
pub fn laplacian(f: &RadialTestFunction, r: f64) -> Result<f64> {
    if r < 0.0 || !r.is_finite() {
        return Err(Error::InvalidParameter(format!("radius must be nonnegative, got {r}")));
    }
    let (_, d1, d2) = f.derivatives(r);
    if r == 0.0 {
        return Ok(2.0 * d2);
    }
    Ok(d2 + d1 / r)
}

const NORM_NODES: usize = 64;

/// `∫_ℂ |Δf| d²z`.
pub fn laplacian_l1_norm(f: &RadialTestFunction) -> f64 {
    radial_integral(f, |r, lap| lap.abs() * r, NORM_NODES) * 2.0 * PI
}

/// `∫_ℂ Δf d²z`, which vanishes for compactly supported `f`.
pub fn laplacian_integral(f: &RadialTestFunction) -> f64 {
    radial_integral(f, |r, lap| lap * r, NORM_NODES) * 2.0 * PI
}

/// `sup |Δf|` sampled densely on the bands.
pub fn laplacian_sup_norm(f: &RadialTestFunction) -> f64 {
    f.bands()
        .iter()
        .flat_map(|&(a, b)| (0..=2000).map(move |k| a + (b - a) * k as f64 / 2000.0))
        .map(|r| laplacian(f, r).unwrap_or(0.0).abs())
        .fold(0.0, f64::max)
}

/// `∫ g(r, Δf(r)) dr` over the bands. Each band is split at the zero of `S''`
/// so that `|Δf|` is smooth on every panel.
fn radial_integral<G: Fn(f64, f64) -> f64>(f: &RadialTestFunction, g: G, nodes: usize) -> f64 {
    let gl = GaussLegendre::new(nodes);
    radial_nodes(f, &gl)
        .into_iter()
        .map(|(r, w)| w * g(r, laplacian(f, r).unwrap_or(0.0)))
        .sum()
}

fn radial_nodes(f: &RadialTestFunction, gl: &GaussLegendre) -> Vec<(f64, f64)> {
    f.bands()
        .into_iter()
        .flat_map(|(a, b)| {
            let mid = 0.5 * (a + b);
            gl.mapped(a, mid).chain(gl.mapped(mid, b)).collect::<Vec<_>>()
        })
        .collect()
}

/// Sum of `f(|σ_i|)` over the eigenvalues of `X`.
pub fn girko_lhs(x: &MatrixSample, f: &RadialTestFunction) -> Result<f64> {
    Ok(x.eigenvalues()?.iter().map(|s| f.at(*s)).sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GirkoForm {
    LogDet,
    EtaSplit,
}

/// Polar product rule for the `z`-integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    /// Gauss–Legendre nodes per transition band.
    pub radial_nodes: usize,
    /// Initial uniform angular nodes per radius.
    pub angular_nodes: usize,
    /// Relative change below which refinement stops.
    pub rel_tol: f64,
    pub max_radial_nodes: usize,
    pub max_angular_nodes: usize,
    /// Upper cutoff `T` of the η-integral in the split form.
    pub t_cutoff: f64,
    /// Split point `η₀`; default `n^{-1+0.1}`.
    pub eta0: Option<f64>,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            radial_nodes: 64,
            angular_nodes: 128,
            rel_tol: 1e-3,
            max_radial_nodes: 256,
            max_angular_nodes: 1 << 14,
            t_cutoff: 1e6,
            eta0: None,
        }
    }
}

impl QuadratureSpec {
    pub fn eta0_for(&self, n: usize) -> f64 {
        self.eta0.unwrap_or_else(|| (n as f64).powf(-0.9))
    }
}

/// Both sides of Girko's formula for one matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GirkoEstimate {
    pub lhs: f64,
    pub rhs_logdet: f64,
    /// `(I₀, I_T)`; present for the split form.
    pub rhs_split: Option<(f64, f64)>,
    /// `(1/4π) ∫ Δf Σ log(λ² + T²)`; present for the split form.
    pub remainder: Option<f64>,
    pub quad_error: f64,
    /// Number of `z`-nodes (one SVD each) in the final rule.
    pub nodes: usize,
    /// Singular values floored by the clamp policy, summed over nodes.
    pub clamped: usize,
}

/// Per-node integrand values: `[Σ log λ, Σ log((λ²+η₀²)/λ²), Σ log(λ²+T²)]`.
type NodeValues = [f64; 3];

fn node_values(spec: &SingularSpectrum, eta0: f64, t: f64) -> (NodeValues, usize) {
    let floor = 1e-14 * spec.largest();
    let mut clamped = 0;
    let mut acc = [0.0; 3];
    for l in spec.lambdas.iter() {
        let lc = if *l < floor {
            clamped += 1;
            floor
        } else {
            *l
        };
        let l2 = lc * lc;
        acc[0] += lc.ln();
        acc[1] += (eta0 * eta0 / l2).ln_1p();
        acc[2] += (l2 + t * t).ln();
    }
    (acc, clamped)
}

struct Ring {
    mean: NodeValues,
    nodes: usize,
    error: f64,
    clamped: usize,
}

/// Angular means at radius `r` by the periodic trapezoid rule, doubling until the
/// log-determinant mean changes by less than `tol`.
fn angular_means(x: &MatrixSample, r: f64, spec: &QuadratureSpec, eta0: f64, tol: f64) -> Result<Ring> {
    let eval = |theta: f64| -> Result<(NodeValues, usize)> {
        let z = Complex64::from_polar(r, theta);
        let s = singular_spectrum(x, z, false)?;
        Ok(node_values(&s, eta0, spec.t_cutoff))
    };
    let mut count = spec.angular_nodes.max(4);
    let initial = (0..count)
        .into_par_iter()
        .map(|k| eval(2.0 * PI * k as f64 / count as f64))
        .collect::<Result<Vec<_>>>()?;
    let mut clamped: usize = initial.iter().map(|v| v.1).sum();
    let mut sums: Vec<Vec<f64>> = (0..3).map(|j| initial.iter().map(|v| v.0[j]).collect()).collect();
    let mean =
        |sums: &[Vec<f64>], count: usize| -> NodeValues { [0, 1, 2].map(|j| pairwise_sum(&sums[j]) / count as f64) };
    let mut current = mean(&sums, count);
    let mut error = f64::INFINITY;
    while count < spec.max_angular_nodes {
        let fresh = (0..count)
            .into_par_iter()
            .map(|k| eval(2.0 * PI * (k as f64 + 0.5) / count as f64))
            .collect::<Result<Vec<_>>>()?;
        clamped += fresh.iter().map(|v| v.1).sum::<usize>();
        for (j, s) in sums.iter_mut().enumerate() {
            s.extend(fresh.iter().map(|v| v.0[j]));
        }
        count *= 2;
        let next = mean(&sums, count);
        error = (next[0] - current[0]).abs();
        current = next;
        if error <= tol {
            break;
        }
    }
    Ok(Ring {
        mean: current,
        nodes: count,
        error,
        clamped,
    })
}

struct RadialPass {
    integrals: NodeValues,
    error: f64,
    nodes: usize,
    clamped: usize,
}

fn radial_pass(
    x: &MatrixSample,
    f: &RadialTestFunction,
    spec: &QuadratureSpec,
    eta0: f64,
    per_band: usize,
) -> Result<RadialPass> {
    // Half the per-band budget on each side of the band midpoint.
    let gl = GaussLegendre::new((per_band / 2).max(2));
    let nodes = radial_nodes(f, &gl);
    // Each ring gets an equal share of half the error budget, so rings where
    // |Δf| is small stop refining early.
    let budget = 0.5 * spec.rel_tol / nodes.len() as f64;
    let mut terms: Vec<NodeValues> = Vec::with_capacity(nodes.len());
    let mut error = 0.0;
    let mut count = 0;
    let mut clamped = 0;
    for (r, w) in nodes {
        let lap = laplacian(f, r)?;
        let weight = w * r * lap;
        let ring = angular_means(x, r, spec, eta0, budget / weight.abs().max(1e-300))?;
        terms.push(ring.mean.map(|v| weight * v));
        error += (w * r * lap.abs()) * ring.error.min(1e6);
        count += ring.nodes;
        clamped += ring.clamped;
    }
    let integrals = [0, 1, 2].map(|j| pairwise_sum(&terms.iter().map(|t| t[j]).collect::<Vec<_>>()));
    Ok(RadialPass {
        integrals,
        error,
        nodes: count,
        clamped,
    })
}

/// Right side of Girko's formula by polar quadrature, one SVD per node.
pub fn girko_rhs(
    x: &MatrixSample,
    f: &RadialTestFunction,
    form: GirkoForm,
    quad: &QuadratureSpec,
) -> Result<GirkoEstimate> {
    let lhs = girko_lhs(x, f)?;
    let eta0 = quad.eta0_for(x.n);
    if !(eta0 > 0.0 && eta0 < quad.t_cutoff) {
        return Err(Error::InvalidParameter(format!("need 0 < η₀ < T, got η₀ = {eta0}")));
    }
    // The estimate uses `radial_nodes` per band; the rule with half as many
    // nodes serves as the error check, and both double until they agree.
    let mut per_band = quad.radial_nodes.max(8);
    let mut coarse = radial_pass(x, f, quad, eta0, per_band / 2)?;
    let mut pass = radial_pass(x, f, quad, eta0, per_band)?;
    let mut radial_change = (pass.integrals[0] - coarse.integrals[0]).abs();
    while radial_change > quad.rel_tol * pass.integrals[0].abs().max(1.0) && per_band * 2 <= quad.max_radial_nodes {
        per_band *= 2;
        coarse = pass;
        pass = radial_pass(x, f, quad, eta0, per_band)?;
        radial_change = (pass.integrals[0] - coarse.integrals[0]).abs();
    }
    let [logdet, small, large] = pass.integrals;
    let (rhs_split, remainder) = match form {
        GirkoForm::LogDet => (None, None),
        GirkoForm::EtaSplit => {
            let i0 = -small / 2.0;
            let rem = large / 2.0;
            // I_T = -(1/4π)∫Δf Σ[log(λ²+T²) - log(λ²+η₀²)] = logdet - I₀ - rem.
            let it = logdet - i0 - rem;
            (Some((i0, it)), Some(rem))
        }
    };
    let quad_error = radial_change + pass.error;
    Ok(GirkoEstimate {
        lhs,
        rhs_logdet: logdet,
        rhs_split,
        remainder,
        quad_error,
        nodes: pass.nodes,
        clamped: pass.clamped,
    })
}

/// `η₀² Σ_i 1/(λ_i² + η̃²)`, the integral over `[0, η₀]` of `Im Tr G` with `η`
/// frozen at `η̃` in the denominator.
pub fn small_eta_surrogate(spec: &SingularSpectrum, eta0: f64, eta_tilde: f64) -> Result<f64> {
    if !(eta0 > 0.0 && eta0 <= eta_tilde) {
        return Err(Error::InvalidParameter(format!(
            "need 0 < η₀ ≤ η̃, got η₀ = {eta0}, η̃ = {eta_tilde}"
        )));
    }
    let t2 = eta_tilde * eta_tilde;
    Ok(eta0 * eta0 * spec.lambdas.iter().map(|l| 1.0 / (l * l + t2)).sum::<f64>())
}

/// `∫_ℂ Δf(z) (𝔪^z)^p (conj 𝔪^z)^q d²z` with `𝔪^z = z u^z(iη̃)`.
pub fn radial_moment(
    f: &RadialTestFunction,
    p: u32,
    q: u32,
    eta_tilde: f64,
    angular_nodes: usize,
) -> Result<Complex64> {
    let gl = GaussLegendre::new(NORM_NODES / 2);
    let mut total = Complex64::new(0.0, 0.0);
    for (r, w) in radial_nodes(f, &gl) {
        let lap = laplacian(f, r)?;
        let mut ring = Complex64::new(0.0, 0.0);
        for k in 0..angular_nodes {
            let z = Complex64::from_polar(r, 2.0 * PI * k as f64 / angular_nodes as f64);
            let u = solve_mde(z, Complex64::new(0.0, eta_tilde))?.u;
            let frak = z * u;
            ring += frak.powu(p) * frak.conj().powu(q);
        }
        total += ring * (2.0 * PI / angular_nodes as f64) * (w * r * lap);
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::sample_ginibre;
    use crate::stats::loglog_slope;
    use ndarray::array;

    fn f1(n: usize) -> RadialTestFunction {
        make_test_function(TestFunctionKind::AnnulusF1, n, TestFunctionOverrides::default()).unwrap()
    }

    #[test]
    fn default_geometry() {
        assert!((gamma_n(1000.0) - 1.20459).abs() < 1e-5);
        let f = f1(1000);
        assert!((f.center - 1.01736).abs() < 1e-5);
        assert_eq!(f.value(f.center), 1.0);
        assert_eq!(f.value(f.center + 2.0 * f.half_width), 0.0);
        assert_eq!(f.value(f.center + 0.8 * f.half_width), 1.0);
        assert_eq!(f.value(f.center - f.half_width), 0.0);
        // γ_n < 0 without an explicit center.
        assert!(make_test_function(TestFunctionKind::AnnulusF1, 50, TestFunctionOverrides::default()).is_err());
        let o = TestFunctionOverrides {
            center: Some(1.05),
            half_width: Some(0.02),
            ..Default::default()
        };
        assert!(make_test_function(TestFunctionKind::AnnulusF1, 50, o).is_ok());
    }

    #[test]
    fn f2_geometry() {
        let f = make_test_function(TestFunctionKind::OuterF2, 10_000, TestFunctionOverrides::default()).unwrap();
        let [r0, r1, r2, r3] = f.knots();
        let l = f.half_width;
        assert!((r0 - (f.center + 0.8 * l)).abs() < 1e-15);
        assert!((r1 - (f.center + l)).abs() < 1e-15);
        assert!((r2 - (1.0 + 10_000f64.powf(-0.4))).abs() < 1e-15);
        assert!((r3 - r2 - 0.2 * l).abs() < 1e-15);
        assert_eq!(f.value(0.5 * (r1 + r2)), 1.0);
    }

    #[test]
    fn c2_at_knots_and_second_derivative_bound() {
        for f in [
            f1(1000),
            make_test_function(TestFunctionKind::OuterF2, 1000, TestFunctionOverrides::default()).unwrap(),
        ] {
            // Every piece meets its neighbour with matching value, slope and curvature.
            for (t, v) in [(0.0, 0.0), (1.0, 1.0)] {
                assert_eq!(smoothstep(t), (v, 0.0, 0.0));
            }
            for k in f.knots() {
                let h = 1e-8 * f.half_width;
                let (a0, a1, a2) = f.derivatives(k - h);
                let (b0, b1, b2) = f.derivatives(k + h);
                let l = f.half_width;
                assert!((a0 - b0).abs() < 1e-8);
                assert!((a1 - b1).abs() * l < 1e-6);
                assert!((a2 - b2).abs() * l * l < 1e-3);
            }
            // A quintic bridge over a band of width l/5 gives sup|f''| = 25·(10/√3)/l².
            let c = f.second_derivative_sup() * f.half_width * f.half_width;
            assert!((c - 25.0 * SMOOTHSTEP_MAX_SECOND_DERIVATIVE).abs() < 1e-9);
            let sampled = laplacian_sup_norm(&f);
            assert!(sampled <= 1.01 * f.second_derivative_sup() * (1.0 + 2.0 * f.half_width));
        }
    }

    #[test]
    fn laplacian_properties() {
        let f = f1(1000);
        assert_eq!(laplacian(&f, f.center).unwrap(), 0.0);
        assert!(laplacian_integral(&f).abs() <= 1e-8 * laplacian_l1_norm(&f));
        assert!(laplacian_integral(&f).abs() <= 1e-8);
        assert!(laplacian(&f, -1.0).is_err());
        let disk = RadialTestFunction::custom([0.0, 0.0, 0.5, 0.7]).unwrap();
        assert_eq!(laplacian(&disk, 0.0).unwrap(), 0.0);
        assert_eq!(disk.value(0.0), 1.0);
        assert!(laplacian_integral(&disk).abs() <= 1e-10);
    }

    #[test]
    fn l1_norm_exponent() {
        let ns = [1e3, 1e4, 1e5, 1e6];
        let norms: Vec<f64> = ns.iter().map(|&n| laplacian_l1_norm(&f1(n as usize))).collect();
        let slope = loglog_slope(&ns, &norms);
        assert!((slope - 0.5).abs() <= 0.05, "{slope}");
        for (&n, &v) in ns.iter().zip(&norms) {
            let f = f1(n as usize);
            // Each band contributes 2 sup|f'| = 2·(15/8)·5/l, so the norm is close to 37.5·2πL/l.
            let scale = 2.0 * PI * f.center / f.half_width;
            assert!((v / scale / 37.5 - 1.0).abs() < 0.02, "{}", v / scale);
        }
    }

    #[test]
    fn scalar_girko() {
        let f = f1(1000);
        let on = MatrixSample::from_entries(array![[Complex64::new(f.center, 0.0)]]).unwrap();
        let off = MatrixSample::from_entries(array![[Complex64::new(0.3, 0.0)]]).unwrap();
        assert_eq!(girko_lhs(&on, &f).unwrap(), 1.0);
        assert_eq!(girko_lhs(&off, &f).unwrap(), 0.0);
        let est = girko_rhs(&on, &f, GirkoForm::EtaSplit, &QuadratureSpec::default()).unwrap();
        assert!((est.rhs_logdet - 1.0).abs() <= 1e-2, "{est:?}");
        let (i0, it) = est.rhs_split.unwrap();
        assert!((i0 + it + est.remainder.unwrap() - est.rhs_logdet).abs() <= 1e-8);
    }

    #[test]
    fn small_ginibre_identity() {
        let x = sample_ginibre(12, 3).unwrap();
        let radius = x.spectral_radius().unwrap();
        let f = RadialTestFunction::custom([0.2, 0.45, radius + 0.05, radius + 0.3]).unwrap();
        let est = girko_rhs(&x, &f, GirkoForm::EtaSplit, &QuadratureSpec::default()).unwrap();
        let tol = (10.0 * est.quad_error).max(1e-2 * est.lhs.abs().max(1.0));
        assert!((est.lhs - est.rhs_logdet).abs() <= tol, "{est:?}");
        let (i0, it) = est.rhs_split.unwrap();
        assert!((i0 + it + est.remainder.unwrap() - est.rhs_logdet).abs() <= 1e-8);
    }

    #[test]
    fn surrogate_closed_forms() {
        let z = Complex64::new(0.0, 0.0);
        let s = SingularSpectrum::from_values(z, vec![1.0]).unwrap();
        assert!((small_eta_surrogate(&s, 1.0, 1.0).unwrap() - 0.5).abs() < 1e-15);
        let s = SingularSpectrum::from_values(z, vec![0.0]).unwrap();
        assert!((small_eta_surrogate(&s, 0.1, 0.3).unwrap() - 1.0 / 9.0).abs() < 1e-14);
        assert!(small_eta_surrogate(&s, 0.3, 0.1).is_err());
    }

    #[test]
    fn radial_orthogonality() {
        let f = f1(1000);
        let eta = 1000f64.powf(-0.8);
        let diag = radial_moment(&f, 1, 1, eta, 16).unwrap();
        assert!(diag.norm() > 1e-3);
        for (p, q) in [(1, 0), (0, 2), (2, 1), (3, 1), (0, 3)] {
            let v = radial_moment(&f, p, q, eta, 16).unwrap();
            assert!(v.norm() <= 1e-9 * laplacian_l1_norm(&f), "p={p} q={q}: {v}");
        }
    }
}
