//! Matrix ensembles and the exact Brownian / Ornstein–Uhlenbeck matrix flows.
//!
//! Every entry is `n^{-1/2} χ` with `E χ = 0`, `E|χ|² = 1` and `E χ² = 0`.
//! Entries are drawn in row-major order from a generator seeded with the
//! sample's seed, so `(n, ensemble, seed)` determines the matrix bit for bit.

use std::f64::consts::{PI, SQRT_2};
use std::fmt;
use std::str::FromStr;

use ndarray::Array2;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::seed::rng_from_seed;

/// Law of a single normalized entry `χ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EntryDistribution {
    /// Real and imaginary parts independent `N(0, 1/2)`.
    ComplexGaussian,
    /// Uniform on `{1, i, -1, -i}`.
    SymmetricComplexBernoulli,
    /// Uniform on the disk of radius `√2`.
    UniformComplexDisk,
}

impl EntryDistribution {
    pub const ALL: [EntryDistribution; 3] = [
        EntryDistribution::ComplexGaussian,
        EntryDistribution::SymmetricComplexBernoulli,
        EntryDistribution::UniformComplexDisk,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EntryDistribution::ComplexGaussian => "complex-gaussian",
            EntryDistribution::SymmetricComplexBernoulli => "symmetric-complex-bernoulli",
            EntryDistribution::UniformComplexDisk => "uniform-complex-disk",
        }
    }

    /// Draw one `χ`.
    pub fn draw<R: Rng + ?Sized>(self, rng: &mut R) -> Complex64 {
        match self {
            EntryDistribution::ComplexGaussian => {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex64::new(re, im) / SQRT_2
            }
            EntryDistribution::SymmetricComplexBernoulli => match rng.random_range(0..4u8) {
                0 => Complex64::new(1.0, 0.0),
                1 => Complex64::new(0.0, 1.0),
                2 => Complex64::new(-1.0, 0.0),
                _ => Complex64::new(0.0, -1.0),
            },
            EntryDistribution::UniformComplexDisk => {
                let r = SQRT_2 * rng.random::<f64>().sqrt();
                let theta = 2.0 * PI * rng.random::<f64>();
                Complex64::from_polar(r, theta)
            }
        }
    }
}

impl fmt::Display for EntryDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EntryDistribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "complex-gaussian" | "gaussian" => Ok(EntryDistribution::ComplexGaussian),
            "symmetric-complex-bernoulli" | "bernoulli" => Ok(EntryDistribution::SymmetricComplexBernoulli),
            "uniform-complex-disk" | "uniform-disk" | "disk" => Ok(EntryDistribution::UniformComplexDisk),
            other => Err(Error::Config(format!("unknown entry distribution '{other}'"))),
        }
    }
}

/// Provenance tag of a sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Ensemble {
    Ginibre,
    Iid(EntryDistribution),
    /// Built by the caller from explicit entries.
    Custom,
}

impl fmt::Display for Ensemble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ensemble::Ginibre => f.write_str("ginibre"),
            Ensemble::Iid(d) => write!(f, "iid:{d}"),
            Ensemble::Custom => f.write_str("custom"),
        }
    }
}

/// An `n × n` complex matrix together with where it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixSample {
    pub n: usize,
    pub entries: Array2<Complex64>,
    pub ensemble: Ensemble,
    pub seed: u64,
    pub flow_time: f64,
}

impl MatrixSample {
    /// Wrap explicit entries; the matrix must be square and nonempty.
    pub fn from_entries(entries: Array2<Complex64>) -> Result<Self> {
        let (r, c) = entries.dim();
        if r != c || r == 0 {
            return Err(Error::InvalidDimension(format!(
                "expected a nonempty square matrix, got {r}x{c}"
            )));
        }
        Ok(Self {
            n: r,
            entries,
            ensemble: Ensemble::Custom,
            seed: 0,
            flow_time: 0.0,
        })
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Self::from_entries(Array2::zeros((n, n)))
    }

    /// Eigenvalues of the matrix (non-Hermitian, unordered).
    pub fn eigenvalues(&self) -> Result<Vec<Complex64>> {
        use ndarray_linalg::EigVals;
        self.entries
            .eigvals()
            .map(|v| v.to_vec())
            .map_err(|e| Error::Numerical {
                seed: self.seed,
                z: Complex64::new(0.0, 0.0),
                detail: format!("eigenvalue solver: {e}"),
            })
    }

    /// Largest eigenvalue modulus.
    pub fn spectral_radius(&self) -> Result<f64> {
        Ok(self.eigenvalues()?.iter().map(|l| l.norm()).fold(0.0, f64::max))
    }
}

fn check_dimension(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidDimension("n must be at least 1".into()));
    }
    Ok(())
}

fn fill(n: usize, dist: EntryDistribution, seed: u64) -> Array2<Complex64> {
    let mut rng = rng_from_seed(seed);
    let scale = 1.0 / (n as f64).sqrt();
    Array2::from_shape_simple_fn((n, n), || dist.draw(&mut rng) * scale)
}

/// Complex Ginibre matrix: entries with independent `N(0, 1/(2n))` parts.
pub fn sample_ginibre(n: usize, seed: u64) -> Result<MatrixSample> {
    check_dimension(n)?;
    Ok(MatrixSample {
        n,
        entries: fill(n, EntryDistribution::ComplexGaussian, seed),
        ensemble: Ensemble::Ginibre,
        seed,
        flow_time: 0.0,
    })
}

/// I.i.d. matrix with entries `n^{-1/2} χ`.
pub fn sample_iid(n: usize, dist: EntryDistribution, seed: u64) -> Result<MatrixSample> {
    check_dimension(n)?;
    Ok(MatrixSample {
        n,
        entries: fill(n, dist, seed),
        ensemble: Ensemble::Iid(dist),
        seed,
        flow_time: 0.0,
    })
}

/// Like [`sample_iid`] but taking the distribution by name.
pub fn sample_iid_named(n: usize, dist: &str, seed: u64) -> Result<MatrixSample> {
    sample_iid(n, dist.parse()?, seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlowType {
    Brownian,
    OrnsteinUhlenbeck,
}

/// A matrix flow with its nominal step size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowKind {
    kind: FlowType,
    dt: f64,
}

impl FlowKind {
    pub fn new(kind: FlowType, dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "flow step dt must be positive, got {dt}"
            )));
        }
        Ok(Self { kind, dt })
    }

    pub fn brownian(dt: f64) -> Result<Self> {
        Self::new(FlowType::Brownian, dt)
    }

    pub fn ornstein_uhlenbeck(dt: f64) -> Result<Self> {
        Self::new(FlowType::OrnsteinUhlenbeck, dt)
    }

    pub fn kind(&self) -> FlowType {
        self.kind
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Coefficients `(a, b)` of the exact update `X_t = a X_0 + b U`.
    pub fn coefficients(&self, t: f64) -> (f64, f64) {
        match self.kind {
            FlowType::Brownian => (1.0, t.sqrt()),
            FlowType::OrnsteinUhlenbeck => ((-t / 2.0).exp(), (-(-t).exp_m1()).sqrt()),
        }
    }
}

/// Run the flow for time `t` in one exact Gaussian step, with fresh noise drawn from `seed`.
pub fn evolve(x: &MatrixSample, flow: FlowKind, t: f64, seed: u64) -> Result<MatrixSample> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "flow time must be nonnegative, got {t}"
        )));
    }
    check_dimension(x.n)?;
    if t == 0.0 {
        return Ok(x.clone());
    }
    let (a, b) = flow.coefficients(t);
    let noise = fill(x.n, EntryDistribution::ComplexGaussian, seed);
    let entries = &x.entries * a + &noise * b;
    Ok(MatrixSample {
        n: x.n,
        entries,
        ensemble: x.ensemble,
        seed: x.seed,
        flow_time: x.flow_time + t,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn moments(dist: EntryDistribution, draws: usize, seed: u64) -> (Complex64, f64, Complex64) {
        let mut rng = rng_from_seed(seed);
        let (mut m1, mut m2, mut msq) = (Complex64::new(0.0, 0.0), 0.0, Complex64::new(0.0, 0.0));
        for _ in 0..draws {
            let c = dist.draw(&mut rng);
            m1 += c;
            m2 += c.norm_sqr();
            msq += c * c;
        }
        let d = draws as f64;
        (m1 / d, m2 / d, msq / d)
    }

    #[test]
    fn entry_moments_are_normalized() {
        for dist in EntryDistribution::ALL {
            let (m1, m2, msq) = moments(dist, 1_000_000, 11);
            assert!(m1.norm() <= 5e-3, "{dist}: mean {m1}");
            assert!((m2 - 1.0).abs() <= 5e-3, "{dist}: second moment {m2}");
            assert!(msq.norm() <= 5e-3, "{dist}: E chi^2 {msq}");
        }
    }

    #[test]
    fn zero_dimension_is_rejected() {
        assert!(matches!(sample_ginibre(0, 1), Err(Error::InvalidDimension(_))));
        assert!(matches!(
            sample_iid(0, EntryDistribution::UniformComplexDisk, 1),
            Err(Error::InvalidDimension(_))
        ));
    }

    #[test]
    fn unknown_distribution_is_a_config_error() {
        assert!(matches!(sample_iid_named(4, "cauchy", 1), Err(Error::Config(_))));
        for dist in EntryDistribution::ALL {
            assert_eq!(dist.name().parse::<EntryDistribution>().unwrap(), dist);
        }
    }

    #[test]
    fn same_seed_same_bits() {
        let a = sample_ginibre(64, 7).unwrap();
        let b = sample_ginibre(64, 7).unwrap();
        assert_eq!(a.entries, b.entries);
        assert_eq!(a.seed, 7);
        let c = sample_ginibre(64, 8).unwrap();
        assert_ne!(a.entries, c.entries);
    }

    #[test]
    fn scalar_ginibre_variance() {
        let m: f64 = (0..100_000u64)
            .map(|s| sample_ginibre(1, s).unwrap().entries[[0, 0]].norm_sqr())
            .sum::<f64>()
            / 1e5;
        assert!((m - 1.0).abs() < 0.02, "{m}");
    }

    #[test]
    fn bernoulli_scalar_has_unit_modulus() {
        for s in 0..100 {
            let x = sample_iid(1, EntryDistribution::SymmetricComplexBernoulli, s).unwrap();
            assert_eq!(x.entries[[0, 0]].norm(), 1.0);
        }
    }

    #[test]
    fn disk_second_moment() {
        let x = sample_iid(200, EntryDistribution::UniformComplexDisk, 3).unwrap();
        let m = x.entries.iter().map(|c| c.norm_sqr()).sum::<f64>() / 200.0;
        assert!((m - 1.0).abs() < 0.02, "{m}");
    }

    #[test]
    fn circular_law_fraction() {
        let x = sample_ginibre(256, 5).unwrap();
        let inside = x.eigenvalues().unwrap().iter().filter(|l| l.norm() <= 1.0).count();
        assert!((inside as f64 / 256.0 - 1.0).abs() <= 0.05);
    }

    #[test]
    fn zero_time_is_identity() {
        let x = sample_ginibre(8, 1).unwrap();
        let flow = FlowKind::brownian(0.1).unwrap();
        assert_eq!(evolve(&x, flow, 0.0, 99).unwrap(), x);
        assert!(matches!(evolve(&x, flow, -1.0, 99), Err(Error::InvalidParameter(_))));
        assert!(FlowKind::ornstein_uhlenbeck(0.0).is_err());
    }

    #[test]
    fn flows_preserve_entry_variance() {
        let n = 4;
        let trials = 10_000u64;
        let ou = FlowKind::ornstein_uhlenbeck(0.01).unwrap();
        let bm = FlowKind::brownian(0.01).unwrap();
        let zero = MatrixSample::zeros(n).unwrap();
        let (mut v_ou, mut v_bm) = (0.0, 0.0);
        for s in 0..trials {
            let x = sample_ginibre(n, s).unwrap();
            let y = evolve(&x, ou, 0.7, s + 1_000_000).unwrap();
            assert!((y.flow_time - 0.7).abs() < 1e-15);
            v_ou += y.entries.iter().map(|c| c.norm_sqr()).sum::<f64>();
            let w = evolve(&zero, bm, 1.0, s).unwrap();
            v_bm += w.entries.iter().map(|c| c.norm_sqr()).sum::<f64>();
        }
        let denom = (trials * (n * n) as u64) as f64;
        let target = 1.0 / n as f64;
        assert!((v_ou / denom / target - 1.0).abs() < 0.02);
        assert!((v_bm / denom / target - 1.0).abs() < 0.02);
    }
}
