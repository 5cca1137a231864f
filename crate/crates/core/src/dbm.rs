//! Singular-value Dyson Brownian motion.
//!
//! Under `dX = dB/√n` the singular values of `X - z` solve
//!
//! ```text
//! dλ_i = db_i/√(2n) + (1/2n) Σ_{j≠i} dt/(λ_i - λ_j),
//! ```
//!
//! where the sum runs over the symmetric set `{±λ_j}` including the mirror
//! `-λ_i`. Only the positive half is stored. Two flavours are provided: the
//! matrix flow, exact in law and with pathwise correlated drivers across
//! shifts, and the particle system integrated by Euler–Maruyama.

use ndarray::Array2;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::ensembles::{evolve, sample_iid, EntryDistribution, FlowKind, MatrixSample};
use crate::error::{Error, Result};
use crate::hermitization::{driver_correlation, overlaps, resolvent_trace, singular_spectrum, OverlapTable};
use crate::seed::{mix64, rng_from_seed};
use crate::stats::{covariance, jackknife_correlation_se, pearson, variance, Proportion};

/// Spacing below which a step counts as a collision.
pub const COLLISION_SPACING: f64 = 1e-12;
/// Floor at which a particle is reflected.
pub const POSITIVITY_FLOOR: f64 = 1e-14;
/// Maximal number of step halvings.
pub const MAX_HALVINGS: u32 = 40;

/// Positive half of a mirror-symmetric particle configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleState {
    pub n: usize,
    /// Weight of the `b` drivers; `1 - alpha` goes to the `β` drivers.
    pub alpha: f64,
    pub lambdas: Vec<f64>,
    pub t: f64,
}

impl ParticleState {
    pub fn new(lambdas: Vec<f64>) -> Result<Self> {
        Self::interpolated(1.0, &lambdas, &lambdas)
    }

    /// `r(0, α) = α λ(0) + (1 - α) μ(0)`.
    pub fn interpolated(alpha: f64, lambda0: &[f64], mu0: &[f64]) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::InvalidParameter(format!(
                "alpha must lie in [0, 1], got {alpha}"
            )));
        }
        if lambda0.is_empty() || lambda0.len() != mu0.len() {
            return Err(Error::InvalidInput(
                "initial configurations must be nonempty and of equal length".into(),
            ));
        }
        let mut lambdas: Vec<f64> = lambda0
            .iter()
            .zip(mu0)
            .map(|(l, m)| alpha * l + (1.0 - alpha) * m)
            .collect();
        lambdas.sort_by(|a, b| a.total_cmp(b));
        if !(lambdas[0] > 0.0) || lambdas.iter().any(|l| !l.is_finite()) {
            return Err(Error::InvalidInput("particles must be positive and finite".into()));
        }
        if lambdas.windows(2).any(|w| w[1] - w[0] < COLLISION_SPACING) {
            return Err(Error::InvalidInput("initial particles collide".into()));
        }
        Ok(Self {
            n: lambdas.len(),
            alpha,
            lambdas,
            t: 0.0,
        })
    }

    pub fn min_spacing(&self) -> f64 {
        let gaps = self.lambdas.windows(2).map(|w| w[1] - w[0]);
        gaps.fold(2.0 * self.lambdas[0], f64::min)
    }
}

/// Drift of every particle, including the image charges `-λ_j`.
pub fn drift(lambdas: &[f64]) -> Vec<f64> {
    let n = lambdas.len();
    let scale = 1.0 / (2.0 * n as f64);
    (0..n)
        .map(|i| {
            let li = lambdas[i];
            let mut s = 0.5 / li;
            for (j, &lj) in lambdas.iter().enumerate() {
                if j != i {
                    s += 1.0 / (li - lj) + 1.0 / (li + lj);
                }
            }
            scale * s
        })
        .collect()
}

/// Bookkeeping for one accepted macro-step.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepReport {
    pub rejections: u32,
    pub reflections: u32,
}

fn euler(lambdas: &[f64], dt: f64, increments: &[f64]) -> Vec<f64> {
    let n = lambdas.len();
    let noise = 1.0 / (2.0 * n as f64).sqrt();
    let d = drift(lambdas);
    lambdas
        .iter()
        .zip(&d)
        .zip(increments)
        .map(|((l, a), db)| l + a * dt + noise * db)
        .collect()
}

fn collides(sorted: &[f64]) -> bool {
    sorted.windows(2).any(|w| w[1] - w[0] < COLLISION_SPACING)
}

fn advance<R: Rng + ?Sized>(
    lambdas: &[f64],
    dt: f64,
    increments: &[f64],
    depth: u32,
    t: f64,
    rng: &mut R,
    report: &mut StepReport,
) -> Result<Vec<f64>> {
    let mut next = euler(lambdas, dt, increments);
    for l in next.iter_mut() {
        if *l < POSITIVITY_FLOOR {
            *l = POSITIVITY_FLOOR.max(-*l);
            report.reflections += 1;
        }
    }
    next.sort_by(|a, b| a.total_cmp(b));
    if !collides(&next) && next.iter().all(|l| l.is_finite()) {
        return Ok(next);
    }
    if depth >= MAX_HALVINGS {
        let min_spacing = next.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
        return Err(Error::Collision {
            t,
            retries: depth,
            min_spacing,
        });
    }
    report.rejections += 1;
    // Split the Brownian increment over the two halves by its bridge midpoint.
    let half_sd = 0.5 * dt.sqrt();
    let bridge: Vec<f64> = increments
        .iter()
        .map(|_| half_sd * rng.sample::<f64, _>(StandardNormal))
        .collect();
    let first: Vec<f64> = increments.iter().zip(&bridge).map(|(b, m)| 0.5 * b + m).collect();
    let second: Vec<f64> = increments.iter().zip(&bridge).map(|(b, m)| 0.5 * b - m).collect();
    let mid = advance(lambdas, 0.5 * dt, &first, depth + 1, t, rng, report)?;
    advance(&mid, 0.5 * dt, &second, depth + 1, t + 0.5 * dt, rng, report)
}

/// One Euler–Maruyama step with driver increments of variance `dt`.
///
/// `b` and `beta` are combined as `α db + (1 - α) dβ`. A step that brings two
/// particles within [`COLLISION_SPACING`] is split in half, using `rng` for the
/// bridge midpoints, up to [`MAX_HALVINGS`] times.
pub fn dbm_step<R: Rng + ?Sized>(
    state: &ParticleState,
    dt: f64,
    b: &[f64],
    beta: &[f64],
    rng: &mut R,
) -> Result<(ParticleState, StepReport)> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
    }
    if b.len() != state.n || beta.len() != state.n {
        return Err(Error::InvalidInput(format!("expected {} driver increments", state.n)));
    }
    let a = state.alpha;
    let combined: Vec<f64> = b.iter().zip(beta).map(|(x, y)| a * x + (1.0 - a) * y).collect();
    let mut report = StepReport::default();
    let lambdas = advance(&state.lambdas, dt, &combined, 0, state.t, rng, &mut report)?;
    Ok((
        ParticleState {
            n: state.n,
            alpha: a,
            lambdas,
            t: state.t + dt,
        },
        report,
    ))
}

fn gaussian_increments<R: Rng + ?Sized>(n: usize, dt: f64, rng: &mut R) -> Vec<f64> {
    let sd = dt.sqrt();
    (0..n).map(|_| sd * rng.sample::<f64, _>(StandardNormal)).collect()
}

/// Run the particle system to time `t1` in `steps` equal steps with
/// independent standard drivers drawn from `seed`.
pub fn run_particles(initial: &ParticleState, t1: f64, steps: usize, seed: u64) -> Result<(ParticleState, StepReport)> {
    let mut noise = rng_from_seed(seed);
    let mut refine = rng_from_seed(mix64(seed, u64::MAX));
    run_with(initial, t1, steps, &mut noise, &mut refine)
}

fn run_with<R: Rng>(
    initial: &ParticleState,
    t1: f64,
    steps: usize,
    noise: &mut R,
    refine: &mut R,
) -> Result<(ParticleState, StepReport)> {
    if steps == 0 || !(t1 > 0.0) {
        return Err(Error::InvalidParameter("need steps >= 1 and t1 > 0".into()));
    }
    let dt = t1 / steps as f64;
    let mut state = initial.clone();
    let mut total = StepReport::default();
    for _ in 0..steps {
        let b = gaussian_increments(state.n, dt, noise);
        let (next, rep) = dbm_step(&state, dt, &b, &b, refine)?;
        total.rejections += rep.rejections;
        total.reflections += rep.reflections;
        state = next;
    }
    Ok((state, total))
}

/// Recorded output of a shared matrix path seen from two shifts.
#[derive(Debug, Clone)]
pub struct MatrixFlowPair {
    pub z1: Complex64,
    pub z2: Complex64,
    pub times: Vec<f64>,
    /// Singular values of `X_t - z₁` at each recording time.
    pub lambdas1: Vec<Vec<f64>>,
    pub lambdas2: Vec<Vec<f64>>,
    /// Overlaps of the `k_window` smallest singular vectors.
    pub overlaps: Vec<OverlapTable>,
    /// Implied driver correlations `d[b_i^{z₁}, b_j^{z₂}]/dt`.
    pub driver_corr: Vec<Array2<f64>>,
    /// Final matrix.
    pub x: MatrixSample,
}

/// Evolve `X_0` by `dX = dB/√n` with exact Gaussian increments and record both
/// singular spectra and overlap data after each of `steps` equal steps.
pub fn run_matrix_flow_pair(
    x0: &MatrixSample,
    z1: Complex64,
    z2: Complex64,
    t1: f64,
    steps: usize,
    k_window: usize,
    seed: u64,
) -> Result<MatrixFlowPair> {
    if steps == 0 || !(t1 > 0.0) {
        return Err(Error::InvalidParameter("need steps >= 1 and t1 > 0".into()));
    }
    let dt = t1 / steps as f64;
    let flow = FlowKind::brownian(dt)?;
    let same = z1 == z2;
    let mut x = x0.clone();
    let mut out = MatrixFlowPair {
        z1,
        z2,
        times: Vec::with_capacity(steps),
        lambdas1: Vec::with_capacity(steps),
        lambdas2: Vec::with_capacity(steps),
        overlaps: Vec::with_capacity(steps),
        driver_corr: Vec::with_capacity(steps),
        x: x0.clone(),
    };
    let vectors = k_window > 0;
    for step in 0..steps {
        x = evolve(&x, flow, dt, mix64(seed, step as u64))?;
        let s1 = singular_spectrum(&x, z1, vectors)?;
        let s2 = if same {
            s1.clone()
        } else {
            singular_spectrum(&x, z2, vectors)?
        };
        if vectors {
            out.overlaps.push(overlaps(&s1, &s2, k_window)?);
            // Unit-norm vectors; the half-norm convention gives 4 Re[...] for the same number.
            out.driver_corr.push(driver_correlation(&s1, &s2, k_window)?);
        }
        out.times.push(x.flow_time);
        out.lambdas1.push(s1.lambdas);
        out.lambdas2.push(s2.lambdas);
    }
    out.x = x;
    Ok(out)
}

/// How the reference process `μ` in a coupling run is driven.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DriverSpec {
    /// `λ` from the matrix flow, `μ` from particle DBMs with independent drivers.
    MatrixInduced,
    /// `λ` and `μ` both particle DBMs with independent drivers.
    Independent,
    /// `λ` and `μ` particle DBMs fed the same drivers; an exact-coupling check.
    Shared,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingConfig {
    pub n: usize,
    pub z1: Complex64,
    pub z2: Complex64,
    pub t1: f64,
    /// Compare indices `1..=k`.
    pub k: usize,
    pub steps: usize,
    pub drivers: DriverSpec,
    pub seed: u64,
}

/// Per-shift distances `max_{i≤k} |λ_i^{z_l}(t₁) - μ_i^{(l)}(t₁)|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingResult {
    pub dist: [f64; 2],
    pub rejections: u32,
    pub reflections: u32,
}

/// `t₁ = n^{-1/2 + ω₁}`.
pub fn coupling_time(n: usize, omega1: f64) -> Result<f64> {
    if !(omega1 > 0.0 && omega1 <= 0.2) {
        return Err(Error::InvalidParameter(format!(
            "omega1 must lie in (0, 0.2], got {omega1}"
        )));
    }
    Ok((n as f64).powf(-0.5 + omega1))
}

/// One coupling trial from a fresh Ginibre initial condition.
pub fn coupling_run(cfg: &CouplingConfig) -> Result<CouplingResult> {
    if cfg.k == 0 || cfg.k > cfg.n {
        return Err(Error::InvalidParameter(format!("k must lie in 1..={}", cfg.n)));
    }
    let x0 = sample_iid(cfg.n, EntryDistribution::ComplexGaussian, mix64(cfg.seed, 0))?;
    let zs = [cfg.z1, cfg.z2];
    let init: Vec<Vec<f64>> = zs
        .iter()
        .map(|&z| singular_spectrum(&x0, z, false).map(|s| s.lambdas))
        .collect::<Result<_>>()?;
    let mut result = CouplingResult {
        dist: [0.0; 2],
        rejections: 0,
        reflections: 0,
    };
    let lambda_final: Vec<Vec<f64>> = match cfg.drivers {
        DriverSpec::MatrixInduced => {
            let pair = run_matrix_flow_pair(&x0, cfg.z1, cfg.z2, cfg.t1, 1, 0, mix64(cfg.seed, 1))?;
            vec![pair.lambdas1[0].clone(), pair.lambdas2[0].clone()]
        }
        DriverSpec::Independent | DriverSpec::Shared => (0..2)
            .map(|l| {
                let s = ParticleState::new(init[l].clone())?;
                let (end, rep) = run_particles(&s, cfg.t1, cfg.steps, mix64(cfg.seed, 10 + l as u64))?;
                result.rejections += rep.rejections;
                result.reflections += rep.reflections;
                Ok(end.lambdas)
            })
            .collect::<Result<_>>()?,
    };
    for l in 0..2 {
        let s = ParticleState::new(init[l].clone())?;
        let mu_seed = match cfg.drivers {
            DriverSpec::Shared => mix64(cfg.seed, 10 + l as u64),
            _ => mix64(cfg.seed, 20 + l as u64),
        };
        let (end, rep) = run_particles(&s, cfg.t1, cfg.steps, mu_seed)?;
        result.rejections += rep.rejections;
        result.reflections += rep.reflections;
        result.dist[l] = (0..cfg.k)
            .map(|i| (lambda_final[l][i] - end.lambdas[i]).abs())
            .fold(0.0, f64::max);
    }
    Ok(result)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecorrelationConfig {
    pub n: usize,
    pub z1: Complex64,
    pub z2: Complex64,
    /// Tail threshold `a` for `λ₁ ≤ a`.
    pub threshold: f64,
    /// Spectral parameter `η̃` of the trace covariance.
    pub eta_tilde: f64,
    /// Flow time applied to the initial matrix; 0 uses it as drawn.
    pub t1: f64,
    pub trials: usize,
    pub ensemble: EntryDistribution,
    pub seed: u64,
}

impl DecorrelationConfig {
    /// Defaults `a = n^{-3/4-0.05}` and `η̃ = n^{-3/4-0.05}`.
    pub fn new(n: usize, z1: Complex64, z2: Complex64, trials: usize, seed: u64) -> Self {
        let nf = n as f64;
        Self {
            n,
            z1,
            z2,
            threshold: nf.powf(-0.8),
            eta_tilde: nf.powf(-0.8),
            t1: 0.0,
            trials,
            ensemble: EntryDistribution::ComplexGaussian,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecorrelationStats {
    pub z1: Complex64,
    pub z2: Complex64,
    pub t1: f64,
    pub trials: usize,
    pub joint_tail: Proportion,
    pub marginal_tails: (Proportion, Proportion),
    /// Covariance of `Im⟨G^{z₁}(iη̃)⟩` and `Im⟨G^{z₂}(iη̃)⟩`.
    pub trace_cov: f64,
    pub trace_vars: (f64, f64),
    pub trace_corr: f64,
    pub trace_corr_se: f64,
    /// Pearson correlation of `λ₁^{z₁}` and `λ₁^{z₂}` with its jackknife error.
    pub lambda_corr: f64,
    pub lambda_corr_se: f64,
    /// Raw per-trial `(λ₁^{z₁}, λ₁^{z₂}, Im⟨G^{z₁}⟩, Im⟨G^{z₂}⟩)` in trial order.
    pub samples: Vec<[f64; 4]>,
}

/// One decorrelation trial: smallest singular values and trace functionals at both shifts.
pub fn decorrelation_trial(cfg: &DecorrelationConfig, trial: usize) -> Result<[f64; 4]> {
    let seed = mix64(cfg.seed, trial as u64);
    let mut x = sample_iid(cfg.n, cfg.ensemble, seed)?;
    if cfg.t1 > 0.0 {
        x = evolve(&x, FlowKind::brownian(cfg.t1)?, cfg.t1, mix64(seed, 1))?;
    }
    let s1 = singular_spectrum(&x, cfg.z1, false)?;
    let s2 = if cfg.z1 == cfg.z2 {
        s1.clone()
    } else {
        singular_spectrum(&x, cfg.z2, false)?
    };
    let g1 = resolvent_trace(&s1, cfg.eta_tilde)?.avg_trace.im;
    let g2 = resolvent_trace(&s2, cfg.eta_tilde)?.avg_trace.im;
    Ok([s1.smallest(), s2.smallest(), g1, g2])
}

pub fn decorrelation_experiment(cfg: &DecorrelationConfig) -> Result<DecorrelationStats> {
    if cfg.trials < 3 {
        return Err(Error::Config("decorrelation needs at least 3 trials".into()));
    }
    if !(cfg.threshold > 0.0 && cfg.eta_tilde > 0.0 && cfg.t1 >= 0.0) {
        return Err(Error::Config(
            "threshold and eta_tilde must be positive, t1 nonnegative".into(),
        ));
    }
    let samples: Vec<[f64; 4]> = (0..cfg.trials)
        .into_par_iter()
        .map(|i| decorrelation_trial(cfg, i))
        .collect::<Result<_>>()?;
    Ok(summarize(cfg, samples))
}

/// Assemble the statistics from per-trial samples, e.g. those of [`decorrelation_trial`].
pub fn summarize(cfg: &DecorrelationConfig, samples: Vec<[f64; 4]>) -> DecorrelationStats {
    let a = cfg.threshold;
    let count = |pred: &dyn Fn(&[f64; 4]) -> bool| samples.iter().filter(|s| pred(s)).count();
    let m1 = count(&|s| s[0] <= a);
    let m2 = count(&|s| s[1] <= a);
    let joint = count(&|s| s[0] <= a && s[1] <= a);
    let col = |k: usize| samples.iter().map(|s| s[k]).collect::<Vec<f64>>();
    let (l1, l2, g1, g2) = (col(0), col(1), col(2), col(3));
    let t = samples.len();
    let z = 1.96;
    DecorrelationStats {
        z1: cfg.z1,
        z2: cfg.z2,
        t1: cfg.t1,
        trials: t,
        joint_tail: Proportion::wilson(joint, t, z),
        marginal_tails: (Proportion::wilson(m1, t, z), Proportion::wilson(m2, t, z)),
        trace_cov: covariance(&g1, &g2),
        trace_vars: (variance(&g1), variance(&g2)),
        trace_corr: pearson(&g1, &g2),
        trace_corr_se: jackknife_correlation_se(&g1, &g2),
        lambda_corr: pearson(&l1, &l2),
        lambda_corr_se: jackknife_correlation_se(&l1, &l2),
        samples,
    }
}

/// Two shifts at modulus `r`, mirror images across the real axis, a chord `d` apart.
pub fn shift_pair(r: f64, d: f64) -> Result<(Complex64, Complex64)> {
    if !(r > 0.0 && d >= 0.0 && d <= 2.0 * r) {
        return Err(Error::InvalidParameter(format!("chord {d} impossible at radius {r}")));
    }
    let half = (d / (2.0 * r)).asin();
    Ok((Complex64::from_polar(r, half), Complex64::from_polar(r, -half)))
}
