//! Lower tail of the smallest singular value of `X - z` outside the unit disk,
//! and resolvent moments at small `η`.
//!
//! For `|z|² = 1 + δ` the reference shape is
//!
//! ```text
//! P(λ₁ ≤ y δ^{3/2}) ≲ y² (nδ²)^{4/3} e^{-nδ²/2},
//! ```
//!
//! of which only the exponents are tested; the constant is not known.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::ensembles::{sample_iid, EntryDistribution};
use crate::error::{Error, Result};
use crate::hermitization::{resolvent_trace, singular_spectrum};
use crate::seed::mix64;
use crate::stats::{bootstrap, mean, Proportion};

/// Minimum expected number of hits before a tail run is accepted.
pub const MIN_EXPECTED_HITS: f64 = 25.0;

/// Thresholds either relative to `δ^{3/2}` or absolute.
#[derive(Debug, Clone, PartialEq)]
pub enum Thresholds {
    Relative(Vec<f64>),
    Absolute(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TailConfig {
    pub n: usize,
    pub ensemble: EntryDistribution,
    /// `δ = |z|² - 1`.
    pub delta: f64,
    pub thresholds: Thresholds,
    pub trials: usize,
    pub seed: u64,
    /// Refuse runs whose predicted hit count is below [`MIN_EXPECTED_HITS`].
    pub check_budget: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TailExperiment {
    pub n: usize,
    pub ensemble: EntryDistribution,
    pub delta: f64,
    /// Absolute thresholds `E`, ascending.
    pub thresholds: Vec<f64>,
    /// The same thresholds as `y = E/δ^{3/2}`.
    pub ys: Vec<f64>,
    pub trials: usize,
    pub estimates: Vec<Proportion>,
    /// `λ₁` per trial, in trial order.
    pub lambda1: Vec<f64>,
}

/// Reference shape `y² (nδ²)^{4/3} e^{-nδ²/2}` with constant one.
pub fn predicted_tail(n: usize, delta: f64, y: f64) -> f64 {
    let nd2 = n as f64 * delta * delta;
    y * y * nd2.powf(4.0 / 3.0) * (-0.5 * nd2).exp()
}

/// Accepted window `2n^{-1/2} ≤ δ ≤ 0.3`.
pub fn check_delta(n: usize, delta: f64) -> Result<()> {
    let lo = 2.0 / (n as f64).sqrt();
    if !(delta >= lo * (1.0 - 1e-12) && delta <= 0.3) {
        return Err(Error::Config(format!(
            "delta = {delta} outside [{lo:.4}, 0.3] for n = {n}"
        )));
    }
    Ok(())
}

impl TailConfig {
    fn absolute_thresholds(&self) -> Vec<f64> {
        let scale = self.delta.powf(1.5);
        let mut t = match &self.thresholds {
            Thresholds::Relative(ys) => ys.iter().map(|y| y * scale).collect(),
            Thresholds::Absolute(es) => es.clone(),
        };
        t.sort_by(|a, b| a.total_cmp(b));
        t
    }

    /// Check the configuration and return the absolute thresholds, ascending.
    pub fn validate(&self) -> Result<Vec<f64>> {
        if self.n < 2 {
            return Err(Error::Config("tail experiments need n >= 2".into()));
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be positive".into()));
        }
        check_delta(self.n, self.delta)?;
        let t = self.absolute_thresholds();
        if t.is_empty() || t.iter().any(|e| !(*e > 0.0)) {
            return Err(Error::Config("thresholds must be positive and nonempty".into()));
        }
        if self.check_budget {
            let y = t[0] / self.delta.powf(1.5);
            let p = predicted_tail(self.n, self.delta, y).min(1.0);
            let expected = p * self.trials as f64;
            if expected < MIN_EXPECTED_HITS {
                return Err(Error::RareEventBudget {
                    expected,
                    suggested_trials: (MIN_EXPECTED_HITS / p).ceil() as usize,
                });
            }
        }
        Ok(t)
    }
}

/// `λ₁(X - z)` at `z = √(1 + δ)` for trial `trial`, drawn from `mix64(seed, trial)`.
pub fn tail_trial(cfg: &TailConfig, trial: usize) -> Result<f64> {
    let x = sample_iid(cfg.n, cfg.ensemble, mix64(cfg.seed, trial as u64))?;
    let z = Complex64::new((1.0 + cfg.delta).sqrt(), 0.0);
    Ok(singular_spectrum(&x, z, false)?.smallest())
}

pub fn tail_estimate(cfg: &TailConfig) -> Result<TailExperiment> {
    let thresholds = cfg.validate()?;
    let lambda1: Vec<f64> = (0..cfg.trials)
        .into_par_iter()
        .map(|i| tail_trial(cfg, i))
        .collect::<Result<_>>()?;
    let estimates = thresholds
        .iter()
        .map(|&e| Proportion::wilson(lambda1.iter().filter(|&&l| l <= e).count(), cfg.trials, 1.96))
        .collect();
    let scale = cfg.delta.powf(1.5);
    Ok(TailExperiment {
        n: cfg.n,
        ensemble: cfg.ensemble,
        delta: cfg.delta,
        ys: thresholds.iter().map(|e| e / scale).collect(),
        thresholds,
        trials: cfg.trials,
        estimates,
        lambda1,
    })
}

/// Largest `|p̂_a - p̂_b| / √(σ_a² + σ_b²)` over matched thresholds.
pub fn max_tail_discrepancy(a: &TailExperiment, b: &TailExperiment) -> Result<f64> {
    if a.thresholds != b.thresholds {
        return Err(Error::InvalidInput("tail curves use different thresholds".into()));
    }
    Ok(a.estimates
        .iter()
        .zip(&b.estimates)
        .map(|(p, q)| {
            let s = (p.sigma().powi(2) + q.sigma().powi(2)).sqrt();
            let d = (p.estimate - q.estimate).abs();
            if s > 0.0 {
                d / s
            } else if d == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        })
        .fold(0.0, f64::max))
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentConfig {
    pub n: usize,
    pub ensemble: EntryDistribution,
    pub delta: f64,
    pub eta: f64,
    pub ks: Vec<u32>,
    pub trials: usize,
    pub resamples: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentRow {
    pub k: u32,
    pub moment: f64,
    pub lo: f64,
    pub hi: f64,
    pub se: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentTable {
    pub n: usize,
    pub delta: f64,
    pub eta: f64,
    pub rows: Vec<MomentRow>,
    /// `Im⟨G^z(iη)⟩` per trial.
    pub samples: Vec<f64>,
}

impl MomentTable {
    pub fn row(&self, k: u32) -> Option<&MomentRow> {
        self.rows.iter().find(|r| r.k == k)
    }
}

/// Empirical `E[(Im⟨G^z(iη)⟩)^k]` with percentile bootstrap intervals.
pub fn resolvent_moment_estimate(cfg: &MomentConfig) -> Result<MomentTable> {
    let nf = cfg.n as f64;
    if !(cfg.eta > 1.0 / nf && cfg.eta <= nf.powf(-0.75)) {
        return Err(Error::Config(format!(
            "eta = {} outside (1/n, n^(-3/4)] for n = {}",
            cfg.eta, cfg.n
        )));
    }
    if cfg.trials < 2 || cfg.resamples < 2 || cfg.ks.is_empty() {
        return Err(Error::Config(
            "need trials >= 2, resamples >= 2 and at least one k".into(),
        ));
    }
    if !(cfg.delta >= 0.0) {
        return Err(Error::Config(format!("delta must be nonnegative, got {}", cfg.delta)));
    }
    let z = Complex64::new((1.0 + cfg.delta).sqrt(), 0.0);
    let samples: Vec<f64> = (0..cfg.trials)
        .into_par_iter()
        .map(|i| {
            let x = sample_iid(cfg.n, cfg.ensemble, mix64(cfg.seed, i as u64))?;
            let spec = singular_spectrum(&x, z, false)?;
            Ok(resolvent_trace(&spec, cfg.eta)?.avg_trace.im)
        })
        .collect::<Result<_>>()?;
    let rows = cfg
        .ks
        .iter()
        .map(|&k| {
            let stat = |xs: &[f64]| mean(&xs.iter().map(|y| y.powi(k as i32)).collect::<Vec<_>>());
            let moment = stat(&samples);
            let (lo, hi, se) = bootstrap(&samples, stat, cfg.resamples, mix64(cfg.seed, u64::MAX - k as u64));
            MomentRow { k, moment, lo, hi, se }
        })
        .collect();
    Ok(MomentTable {
        n: cfg.n,
        delta: cfg.delta,
        eta: cfg.eta,
        rows,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(n: usize, trials: usize) -> TailConfig {
        TailConfig {
            n,
            ensemble: EntryDistribution::ComplexGaussian,
            delta: 2.0 / (n as f64).sqrt(),
            thresholds: Thresholds::Relative(vec![1.0, 0.5, 100.0]),
            trials,
            seed: 1,
            check_budget: false,
        }
    }

    #[test]
    fn delta_window_is_enforced() {
        let mut c = config(100, 10);
        c.delta = 0.1;
        assert!(tail_estimate(&c).is_err());
        c.delta = 0.2;
        assert!(tail_estimate(&c).is_ok());
        c.delta = 0.31;
        assert!(matches!(tail_estimate(&c), Err(Error::Config(_))));
    }

    #[test]
    fn budget_refuses_rare_events() {
        let mut c = config(100, 10);
        c.check_budget = true;
        c.thresholds = Thresholds::Relative(vec![0.01]);
        match tail_estimate(&c) {
            Err(Error::RareEventBudget {
                expected,
                suggested_trials,
            }) => {
                assert!(expected < MIN_EXPECTED_HITS);
                assert!(predicted_tail(100, c.delta, 0.01) * suggested_trials as f64 >= MIN_EXPECTED_HITS);
            }
            other => panic!("expected a budget refusal, got {other:?}"),
        }
    }

    #[test]
    fn estimates_are_sorted_and_monotone() {
        let e = tail_estimate(&config(64, 300)).unwrap();
        assert_eq!(e.ys, vec![0.5, 1.0, 100.0]);
        for w in e.estimates.windows(2) {
            assert!(w[0].hits <= w[1].hits);
        }
        for p in &e.estimates {
            assert!(0.0 <= p.lo && p.lo <= p.estimate && p.estimate <= p.hi && p.hi <= 1.0);
        }
        // Far above the median every trial counts.
        assert!(e.estimates[2].estimate >= 0.5);
        assert_eq!(max_tail_discrepancy(&e, &e).unwrap(), 0.0);
    }

    #[test]
    fn moments_respect_jensen() {
        let n = 64;
        let cfg = MomentConfig {
            n,
            ensemble: EntryDistribution::ComplexGaussian,
            delta: 0.25,
            eta: (n as f64).powf(-0.8),
            ks: vec![1, 2, 4],
            trials: 200,
            resamples: 200,
            seed: 3,
        };
        let t = resolvent_moment_estimate(&cfg).unwrap();
        let m1 = t.row(1).unwrap().moment;
        let m2 = t.row(2).unwrap().moment;
        let m4 = t.row(4).unwrap().moment;
        assert!(m2 >= m1 * m1);
        assert!(m4 >= m2 * m2);
        for r in &t.rows {
            assert!(r.lo <= r.moment * (1.0 + 1e-12) && r.moment <= r.hi * (1.0 + 1e-12));
        }
        let mut bad = cfg.clone();
        bad.eta = 0.5;
        assert!(resolvent_moment_estimate(&bad).is_err());
    }
}
