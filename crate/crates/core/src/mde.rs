//! Scalar Dyson equation of the Hermitization and the density it generates.
//!
//! For `w` in the upper half plane, `m = m^z(w)` is the root of
//!
//! ```text
//! -1/m = w + m - |z|² / (w + m),      Im m · Im w > 0,
//! ```
//!
//! equivalently of the cubic `m³ + 2w m² + (w² + 1 - |z|²) m + w = 0`. With
//! `u = m/(w+m)` the block representative is `M = [[m, -z u], [-z̄ u, m]]` and
//! `ρ^z(E) = Im m^z(E + i0) / π` is the symmetrized singular-value density of `X - z`.
//!
//! Roots are tracked by continuation in `η` from `η = 10` downward. Closed-form
//! Cardano roots serve as an independent check.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quad::{integrate_split, GaussLegendre};

const ETA_START: f64 = 10.0;
/// Smallest `η` reached before the final polish on the real axis.
pub const ETA_FLOOR: f64 = 1e-10;
/// Threshold on `ρ` used to locate support edges.
pub const EDGE_THRESHOLD: f64 = 1e-8;
const RESIDUAL_TOL: f64 = 1e-12;
const HOLDER_CONST: f64 = 10.0;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// One solution of the Dyson equation at `(z, w)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MdeSolution {
    pub z: Complex64,
    pub w: Complex64,
    pub m: Complex64,
    pub u: Complex64,
    /// `[[m, -z u], [-z̄ u, m]]`.
    pub mmat: [[Complex64; 2]; 2],
    pub residual: f64,
    /// `1 - m² - |z|² u²`.
    pub beta: Complex64,
    /// `1 + m² - |z|² u²`, which also equals `w/(w+m)`.
    pub beta_star: Complex64,
}

impl MdeSolution {
    fn assemble(z: Complex64, w: Complex64, m: Complex64) -> Self {
        let z2 = z.norm_sqr();
        let wm = w + m;
        // At w = m = 0 (centre of a gap) u = m/(w+m) degenerates; the Dyson equation
        // itself gives u = (1 + w m + m²)/|z|².
        let u = if wm.norm() > 1e-8 * (1.0 + m.norm()) || z2 == 0.0 {
            m / wm
        } else {
            (1.0 + w * m + m * m) / z2
        };
        let zu = z * u;
        Self {
            z,
            w,
            m,
            u,
            mmat: [[m, -zu], [-z.conj() * u, m]],
            residual: residual(z2, w, m),
            beta: 1.0 - m * m - z2 * u * u,
            beta_star: 1.0 + m * m - z2 * u * u,
        }
    }

    /// `ρ = Im m / π`.
    pub fn density(&self) -> f64 {
        self.m.im / PI
    }

    /// `w/(w+m)`, the closed form of `β*`; `None` where it is 0/0.
    pub fn beta_star_dual(&self) -> Option<Complex64> {
        let wm = self.w + self.m;
        (wm.norm() > 1e-8).then(|| self.w / wm)
    }

    /// Eigenvalues `m ± |z| u` of `M`.
    pub fn m_eigenvalues(&self) -> [Complex64; 2] {
        let a = self.z.norm() * self.u;
        [self.m + a, self.m - a]
    }
}

fn cubic(z2: f64, w: Complex64, m: Complex64) -> (Complex64, Complex64) {
    let a1 = w * w + 1.0 - z2;
    let p = ((m + 2.0 * w) * m + a1) * m + w;
    let dp = (3.0 * m + 4.0 * w) * m + a1;
    (p, dp)
}

/// `|-1/m - (w + m - |z|²/(w+m))|` relative to the largest term of the equation.
///
/// The scale is `max(1, 1/|m|, |z|²/|w+m|)`, so where all terms are O(1) this is
/// the plain residual; near the centre of a gap, where `m` and `w + m` are tiny,
/// it stays meaningful in double precision.
fn residual(z2: f64, w: Complex64, m: Complex64) -> f64 {
    let (p, _) = cubic(z2, w, m);
    if p.norm() == 0.0 {
        return 0.0;
    }
    let wm = w + m;
    let scale = 1f64.max(1.0 / m.norm()).max(z2 / wm.norm());
    let direct = (-1.0 / m - (wm - z2 / wm)).norm();
    let poly = p.norm() / (m * wm).norm();
    let r = if direct.is_finite() { direct.min(poly) } else { poly };
    r / scale
}

fn newton(z2: f64, w: Complex64, mut m: Complex64) -> Option<Complex64> {
    let mut prev = f64::INFINITY;
    for _ in 0..60 {
        let (p, dp) = cubic(z2, w, m);
        if dp.norm() == 0.0 {
            return None;
        }
        let step = p / dp;
        m -= step;
        if !m.re.is_finite() || !m.im.is_finite() {
            return None;
        }
        let size = step.norm();
        let scale = 1.0 + m.norm();
        // Converged, or stalled at the round-off floor (small P' near edges).
        if size <= 1e-15 * scale || (size <= 1e-9 * scale && size >= 0.5 * prev) {
            return Some(m);
        }
        prev = size;
    }
    None
}

/// Path `(η_k, m_k)` of the continuation at fixed `E` from `η = 10` down to `eta_end`.
pub fn continuation_path(z: Complex64, energy: f64, eta_end: f64) -> Result<Vec<(f64, Complex64)>> {
    if !(eta_end > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "continuation needs eta_end > 0, got {eta_end}"
        )));
    }
    let z2 = z.norm_sqr();
    let mut eta = ETA_START.max(eta_end);
    let w0 = c(energy, eta);
    let failure = |w: Complex64, detail: String| Error::SolverFailure { z, w, detail };
    let mut m = newton(z2, w0, -1.0 / w0)
        .filter(|m| m.im > 0.0)
        .ok_or_else(|| failure(w0, "no root with Im m > 0 at the starting point".into()))?;
    let mut path = vec![(eta, m)];
    let mut ratio: f64 = 0.5;
    while eta > eta_end {
        let next = (eta * ratio).max(eta_end);
        let w = c(energy, next);
        let admissible = |mn: &Complex64| {
            mn.im > 0.0 && (mn - m).norm() <= HOLDER_CONST * (eta - next).cbrt() && residual(z2, w, *mn) <= RESIDUAL_TOL
        };
        // Near a square-root edge two roots almost coalesce and Newton can land on
        // the one below the axis; the closed-form root in the upper half plane is
        // then used as the starting point instead.
        let accepted = newton(z2, w, m).filter(admissible).or_else(|| {
            mde_roots(z, w)
                .into_iter()
                .filter(|r| r.im > 0.0)
                .max_by(|a, b| a.im.total_cmp(&b.im))
                .and_then(|r| newton(z2, w, r))
                .filter(admissible)
        });
        match accepted {
            Some(mn) => {
                m = mn;
                eta = next;
                path.push((eta, m));
                ratio = (ratio * ratio).max(0.25);
            }
            None => {
                ratio = ratio.sqrt();
                if ratio > 1.0 - 1e-9 {
                    return Err(failure(w, "continuation step size collapsed".into()));
                }
            }
        }
    }
    Ok(path)
}

/// Solve at `w` with `Im w > 0`.
pub fn solve_mde(z: Complex64, w: Complex64) -> Result<MdeSolution> {
    if !(w.im > 0.0) {
        return Err(Error::InvalidParameter(format!("solve_mde needs Im w > 0, got {w}")));
    }
    let path = continuation_path(z, w.re, w.im)?;
    let (_, m) = *path.last().expect("path is nonempty");
    let sol = MdeSolution::assemble(z, w, m);
    if sol.residual > RESIDUAL_TOL {
        return Err(Error::SolverFailure {
            z,
            w,
            detail: format!("residual {:e} above tolerance", sol.residual),
        });
    }
    Ok(sol)
}

/// Boundary value `m^z(E + i0)`.
///
/// Continues down to `η = 1e-10`, then moves to the nearest root of the real
/// cubic at `η = 0` when that root is Hölder-close and solves the equation to
/// tolerance. Real roots give `ρ = 0` exactly, so gaps are clean.
pub fn boundary_m(z: Complex64, energy: f64) -> Result<MdeSolution> {
    let path = continuation_path(z, energy, ETA_FLOOR)?;
    let (_, m_eta) = *path.last().expect("path is nonempty");
    let z2 = z.norm_sqr();
    let w = c(energy, 0.0);
    let roots = real_cubic_roots(2.0 * energy, energy * energy + 1.0 - z2, energy);
    let nearest = roots
        .iter()
        .copied()
        .filter(|r| r.im >= 0.0)
        .min_by(|a, b| (a - m_eta).norm().total_cmp(&(b - m_eta).norm()));
    if let Some(m0) = nearest {
        let sol = MdeSolution::assemble(z, w, m0);
        if (m0 - m_eta).norm() <= HOLDER_CONST * ETA_FLOOR.cbrt() && sol.residual <= RESIDUAL_TOL {
            return Ok(sol);
        }
    }
    Ok(MdeSolution::assemble(z, c(energy, ETA_FLOOR), m_eta))
}

/// `ρ^z(E)`.
pub fn density(z: Complex64, energy: f64) -> Result<f64> {
    Ok(boundary_m(z, energy)?.density().max(0.0))
}

/// Roots of `m³ + a m² + b m + c` with complex coefficients (Cardano).
pub fn cubic_roots(a: Complex64, b: Complex64, cc: Complex64) -> [Complex64; 3] {
    let p = b - a * a / 3.0;
    let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + cc;
    let disc = (q * q / 4.0 + p * p * p / 27.0).sqrt();
    let c1 = -q / 2.0 + disc;
    let c2 = -q / 2.0 - disc;
    let big = if c1.norm() >= c2.norm() { c1 } else { c2 };
    let omega = Complex64::from_polar(1.0, 2.0 * PI / 3.0);
    let mut out = [Complex64::new(0.0, 0.0); 3];
    if big.norm() == 0.0 {
        let t = (-q).powf(1.0 / 3.0);
        for (k, o) in out.iter_mut().enumerate() {
            *o = t * omega.powi(k as i32) - a / 3.0;
        }
    } else {
        let cr = big.powf(1.0 / 3.0);
        for (k, o) in out.iter_mut().enumerate() {
            let ck = cr * omega.powi(k as i32);
            *o = ck - p / (3.0 * ck) - a / 3.0;
        }
    }
    for r in out.iter_mut() {
        for _ in 0..3 {
            let f = ((*r + a) * *r + b) * *r + cc;
            let df = (3.0 * *r + 2.0 * a) * *r + b;
            if df.norm() > 0.0 {
                *r -= f / df;
            }
        }
    }
    out
}

/// Roots of a real cubic `m³ + a m² + b m + c`; real roots have exactly zero imaginary part.
pub fn real_cubic_roots(a: f64, b: f64, cc: f64) -> Vec<Complex64> {
    let p = b - a * a / 3.0;
    let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + cc;
    let shift = -a / 3.0;
    let f = |x: f64| ((x + a) * x + b) * x + cc;
    let df = |x: f64| (3.0 * x + 2.0 * a) * x + b;
    let polish = |mut x: f64| {
        for _ in 0..4 {
            let d = df(x);
            if d != 0.0 {
                let nx = x - f(x) / d;
                if nx.is_finite() {
                    x = nx;
                }
            }
        }
        x
    };
    let h = q * q / 4.0 + p * p * p / 27.0;
    if h <= 0.0 {
        // Three real roots.
        if p == 0.0 {
            return vec![c(shift, 0.0); 3];
        }
        let r = 2.0 * (-p / 3.0).sqrt();
        let arg = (3.0 * q / (p * r)).clamp(-1.0, 1.0);
        let phi = arg.acos() / 3.0;
        (0..3)
            .map(|k| c(polish(r * (phi - 2.0 * PI * k as f64 / 3.0).cos() + shift), 0.0))
            .collect()
    } else {
        let s = h.sqrt();
        let big = (-q / 2.0 - q.signum() * s).cbrt();
        let other = if big != 0.0 { -p / (3.0 * big) } else { 0.0 };
        let x = polish(big + other + shift);
        // Deflate to the quadratic m² + (a + x) m + (b + (a + x) x).
        let qb = a + x;
        let qc = b + qb * x;
        let disc = qb * qb - 4.0 * qc;
        let im = (-disc).max(0.0).sqrt() / 2.0;
        let re = -qb / 2.0;
        vec![c(x, 0.0), c(re, im), c(re, -im)]
    }
}

/// The three roots of the Dyson cubic at `(z, w)`.
pub fn mde_roots(z: Complex64, w: Complex64) -> [Complex64; 3] {
    cubic_roots(2.0 * w, w * w + 1.0 - z.norm_sqr(), w)
}

/// Positive-half support `[inner, outer]` of `ρ^z`; `inner = Δ/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Support {
    pub inner: f64,
    pub outer: f64,
}

impl Support {
    pub fn gap(&self) -> f64 {
        2.0 * self.inner
    }
}

fn bisect_edge<F: Fn(f64) -> Result<bool>>(inside: F, mut lo: f64, mut hi: f64) -> Result<f64> {
    // Invariant: inside(lo) != inside(hi); returns the transition point.
    let lo_in = inside(lo)?;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo.min(hi) || mid >= lo.max(hi) {
            break;
        }
        if inside(mid)? == lo_in {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Locate the support by bisection on `ρ ≤ 1e-8`.
pub fn support(z: Complex64) -> Result<Support> {
    let inside = |e: f64| density(z, e).map(|r| r > EDGE_THRESHOLD);
    let top = z.norm() + 3.0;
    // A point inside the support: the maximizer of ρ on a coarse grid.
    let mut best = (0.0, -1.0);
    for k in 0..=300 {
        let e = top * k as f64 / 300.0;
        let r = density(z, e)?;
        if r > best.1 {
            best = (e, r);
        }
    }
    let p = best.0;
    let outer = bisect_edge(inside, p, top)?;
    let inner = if inside(0.0)? || z.norm() <= 1.0 {
        0.0
    } else {
        bisect_edge(inside, 0.0, p)?
    };
    Ok(Support { inner, outer })
}

/// `ρ` sampled on a symmetric grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityProfile {
    pub z: Complex64,
    pub grid: Vec<f64>,
    pub rho: Vec<f64>,
    /// `Δ`, zero when `|z| ≤ 1`.
    pub gap: f64,
    /// `Δ/2`.
    pub edge: f64,
    pub outer_edge: f64,
}

impl DensityProfile {
    pub fn trapezoid_mass(&self) -> f64 {
        self.grid
            .windows(2)
            .zip(self.rho.windows(2))
            .map(|(e, r)| 0.5 * (e[1] - e[0]) * (r[0] + r[1]))
            .sum()
    }
}

/// Quintic grading `t³(10 - 15t + 6t²)`: clusters nodes at both ends so the
/// square-root edges and the cube-root cusp become smooth in `t`.
fn graded(t: f64) -> f64 {
    t * t * t * (10.0 - 15.0 * t + 6.0 * t * t)
}

fn graded_derivative(t: f64) -> f64 {
    30.0 * t * t * (1.0 - t) * (1.0 - t)
}

/// Density on a symmetric grid over `[-E_max, E_max]` with `points` nodes.
///
/// Nodes inside the support are graded toward its edges; the gap and the
/// region beyond the support get uniform nodes.
pub fn density_profile(z: Complex64, e_max: f64, points: usize) -> Result<DensityProfile> {
    if points < 16 {
        return Err(Error::InvalidParameter(format!(
            "density profile needs at least 16 points, got {points}"
        )));
    }
    if !(e_max > 0.0) {
        return Err(Error::InvalidParameter(format!("E_max must be positive, got {e_max}")));
    }
    let sup = support(z)?;
    let half = points / 2;
    let a = sup.inner.min(e_max);
    let b = sup.outer.min(e_max);
    let mut pos = Vec::with_capacity(half + 1);
    // Budget: a few uniform nodes in the gap and the tail, the rest in the support.
    let n_gap = if a > 0.0 { (half / 10).max(2) } else { 0 };
    let n_tail = if e_max > b { (half / 10).max(2) } else { 0 };
    let n_sup = half.saturating_sub(n_gap + n_tail).max(4);
    for k in 0..n_gap {
        pos.push(a * k as f64 / n_gap as f64);
    }
    for k in 0..=n_sup {
        pos.push(a + (b - a) * graded(k as f64 / n_sup as f64));
    }
    for k in 1..=n_tail {
        pos.push(b + (e_max - b) * k as f64 / n_tail as f64);
    }
    let mut grid: Vec<f64> = pos.iter().rev().filter(|&&e| e > 0.0).map(|e| -e).collect();
    grid.extend(pos.iter().copied());
    let rho = grid
        .iter()
        .map(|&e| density(z, e.abs()))
        .collect::<Result<Vec<f64>>>()?;
    Ok(DensityProfile {
        z,
        grid,
        rho,
        gap: sup.gap(),
        edge: sup.inner,
        outer_edge: sup.outer,
    })
}

const PANELS: usize = 200;
const PANEL_ORDER: usize = 20;

/// Cumulative half-mass `F(γ) = ∫₀^γ ρ` on graded panels.
#[derive(Debug, Clone)]
pub struct CumulativeDensity {
    z: Complex64,
    support: Support,
    gl: GaussLegendre,
    /// `F` at panel boundaries in the graded variable.
    cumulative: Vec<f64>,
}

impl CumulativeDensity {
    pub fn new(z: Complex64) -> Result<Self> {
        let support = support(z)?;
        let gl = GaussLegendre::new(PANEL_ORDER);
        let mut this = Self {
            z,
            support,
            gl,
            cumulative: vec![0.0],
        };
        let mut acc = 0.0;
        for j in 0..PANELS {
            acc += this.panel_integral(j as f64 / PANELS as f64, (j + 1) as f64 / PANELS as f64)?;
            this.cumulative.push(acc);
        }
        Ok(this)
    }

    pub fn support(&self) -> Support {
        self.support
    }

    /// Total mass on the positive axis, `1/2` up to quadrature error.
    pub fn half_mass(&self) -> f64 {
        self.cumulative[PANELS]
    }

    fn energy(&self, t: f64) -> f64 {
        self.support.inner + (self.support.outer - self.support.inner) * graded(t)
    }

    fn panel_integral(&self, t0: f64, t1: f64) -> Result<f64> {
        let width = self.support.outer - self.support.inner;
        let mut s = 0.0;
        for (t, wt) in self.gl.mapped(t0, t1) {
            s += wt * density(self.z, self.energy(t))? * width * graded_derivative(t);
        }
        Ok(s)
    }

    /// `F(γ)`.
    pub fn mass_below(&self, gamma: f64) -> Result<f64> {
        if gamma <= self.support.inner {
            return Ok(0.0);
        }
        if gamma >= self.support.outer {
            return Ok(self.half_mass());
        }
        let t = self.invert_grading(gamma);
        let j = ((t * PANELS as f64) as usize).min(PANELS - 1);
        Ok(self.cumulative[j] + self.panel_integral(j as f64 / PANELS as f64, t)?)
    }

    fn invert_grading(&self, e: f64) -> f64 {
        let target = (e - self.support.inner) / (self.support.outer - self.support.inner);
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if graded(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Solve `F(γ) = q` for `0 < q < 1/2`.
    pub fn quantile(&self, q: f64) -> Result<f64> {
        let total = self.half_mass();
        if q > 0.5 + 1e-12 || q > total + 1e-9 {
            return Err(Error::OutOfRange(format!("mass {q} exceeds the half-mass {total}")));
        }
        if q >= total {
            return Ok(self.support.outer);
        }
        let j = self.cumulative.partition_point(|&f| f <= q).clamp(1, PANELS) - 1;
        let (t0, t1) = (j as f64 / PANELS as f64, (j + 1) as f64 / PANELS as f64);
        let base = self.cumulative[j];
        // Bisection in the graded variable; F is increasing in t.
        let (mut lo, mut hi) = (t0, t1);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if base + self.panel_integral(t0, mid)? < q {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-15 {
                break;
            }
        }
        Ok(self.energy(0.5 * (lo + hi)))
    }
}

/// Quantiles `γ_1 < … < γ_k` with `∫₀^{γ_i} ρ = i/(2n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantileTable {
    pub n: usize,
    pub gammas: Vec<f64>,
}

pub fn quantiles(z: Complex64, n: usize, k: usize) -> Result<QuantileTable> {
    if k == 0 {
        return Err(Error::InvalidParameter("need at least one quantile".into()));
    }
    if k > n {
        return Err(Error::OutOfRange(format!("quantile index {k} exceeds n = {n}")));
    }
    let cum = CumulativeDensity::new(z)?;
    let gammas = (1..=k)
        .map(|i| {
            if i == n {
                Ok(cum.support().outer)
            } else {
                cum.quantile(i as f64 / (2 * n) as f64)
            }
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(QuantileTable { n, gammas })
}

/// Local eigenvalue spacing `η_f` at energy `E`.
///
/// Inside the support `η_f` solves `∫_{-η_f}^{η_f} ρ(E + x) dx = 1/(2n)`. In
/// the gap around the origin it is `min(n^{-3/4}, Δ^{1/9} n^{-2/3})`; beyond
/// the outer edge the edge scale `n^{-2/3}` is returned.
pub fn fluctuation_scale(z: Complex64, energy: f64, n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "fluctuation scale needs n >= 2, got {n}"
        )));
    }
    let nf = n as f64;
    let e = energy.abs();
    let sup = support(z)?;
    if e < sup.inner {
        return Ok(nf.powf(-0.75).min(sup.gap().powf(1.0 / 9.0) * nf.powf(-2.0 / 3.0)));
    }
    if e > sup.outer {
        return Ok(nf.powf(-2.0 / 3.0));
    }
    let target = 1.0 / (2.0 * nf);
    let mut breaks = vec![0.0, sup.inner, sup.outer, -sup.inner, -sup.outer, e];
    breaks.retain(|b| b.is_finite());
    let window = |eta: f64| -> Result<f64> {
        let f = |x: f64| density(z, x.abs()).unwrap_or(f64::NAN);
        let (v, _) = integrate_split(f, e - eta, e + eta, &breaks, 1e-14);
        if v.is_nan() {
            return Err(Error::SolverFailure {
                z,
                w: c(e, 0.0),
                detail: "density evaluation failed inside fluctuation window".into(),
            });
        }
        Ok(v)
    };
    let rho_e = density(z, e)?;
    let mut hi = if rho_e > 0.0 { target / rho_e } else { nf.powf(-0.5) };
    while window(hi)? < target {
        hi *= 2.0;
        if hi > 10.0 {
            return Err(Error::OutOfRange("fluctuation window exceeds the support".into()));
        }
    }
    let mut lo = 0.0;
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if window(mid)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-12 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Cusp parameter `σ = ⟨(sgn(Re U) Im U / ρ̂)³⟩` from the 2×2 reduction.
///
/// `M` is normal with eigenvalues `μ± = m ± |z| u`, so `U` has eigenvalues
/// `μ±/|μ±|` when `Im μ± > 0`. `ρ̂ = ⟨Im M⟩ = Im m`, and `sgn(0) = 0`.
pub fn stability_sigma(sol: &MdeSolution) -> Result<f64> {
    let im_m = sol.m.im;
    if im_m <= 1e-14 {
        return Err(Error::NearSingular { w: sol.w, im_m });
    }
    let sgn = |x: f64| {
        if x > 0.0 {
            1.0
        } else if x < 0.0 {
            -1.0
        } else {
            0.0
        }
    };
    let mu = sol.m_eigenvalues();
    if mu.iter().any(|m| m.im <= 0.0) {
        return Err(Error::NearSingular {
            w: sol.w,
            im_m: mu[0].im.min(mu[1].im),
        });
    }
    let sum: f64 = mu
        .iter()
        .map(|m| {
            // Round-off in Re μ on the imaginary axis would otherwise leak into sgn.
            let re = if m.re.abs() <= 1e-14 * m.norm() { 0.0 } else { m.re };
            sgn(re) * (m.im / (m.norm() * im_m)).powi(3)
        })
        .sum();
    Ok(0.5 * sum)
}
