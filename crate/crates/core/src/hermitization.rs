//! Hermitization `H^z = [[0, X - z], [(X - z)*, 0]]`, singular spectra and resolvents.
//!
//! The `2n` eigenvalues of `H^z` are `±λ_i` where `λ_i` are the singular values
//! of `X - z`. Singular vectors are stored with unit norm: `(X - z) v_i = λ_i u_i`.
//! The eigenvectors of `H^z` are then `(u_i, ±v_i)/√2`.

use ndarray::{s, Array1, Array2, Axis};
use ndarray_linalg::{JobSvd, SVD, SVDDC};
use num_complex::Complex64;

use crate::ensembles::MatrixSample;
use crate::error::{Error, Result};

const CLAMP_RATIO: f64 = 1e-14;

/// `X - z` as a dense matrix.
pub fn shifted(x: &MatrixSample, z: Complex64) -> Array2<Complex64> {
    let mut a = x.entries.clone();
    a.diag_mut().mapv_inplace(|d| d - z);
    a
}

/// The `2n × 2n` Hermitian block matrix.
pub fn hermitize(x: &MatrixSample, z: Complex64) -> Array2<Complex64> {
    let n = x.n;
    let a = shifted(x, z);
    let mut h = Array2::zeros((2 * n, 2 * n));
    h.slice_mut(s![..n, n..]).assign(&a);
    h.slice_mut(s![n.., ..n]).assign(&a.t().mapv(|c| c.conj()));
    h
}

/// Singular values of `X - z` in ascending order, optionally with vectors.
#[derive(Debug, Clone)]
pub struct SingularSpectrum {
    pub z: Complex64,
    pub n: usize,
    pub lambdas: Vec<f64>,
    /// Columns `u_i`, in the order of `lambdas`.
    pub left_vectors: Option<Array2<Complex64>>,
    /// Columns `v_i`, in the order of `lambdas`.
    pub right_vectors: Option<Array2<Complex64>>,
}

impl SingularSpectrum {
    /// Build from explicit values (no vectors). Values are sorted.
    pub fn from_values(z: Complex64, mut lambdas: Vec<f64>) -> Result<Self> {
        if lambdas.iter().any(|l| !(*l >= 0.0)) {
            return Err(Error::InvalidInput("singular values must be nonnegative".into()));
        }
        lambdas.sort_by(|a, b| a.total_cmp(b));
        Ok(Self {
            z,
            n: lambdas.len(),
            lambdas,
            left_vectors: None,
            right_vectors: None,
        })
    }

    pub fn smallest(&self) -> f64 {
        self.lambdas[0]
    }

    pub fn largest(&self) -> f64 {
        self.lambdas[self.n - 1]
    }

    pub fn has_vectors(&self) -> bool {
        self.left_vectors.is_some() && self.right_vectors.is_some()
    }

    /// Values floored at `1e-14 λ_n` for use in reciprocals and logarithms.
    pub fn clamped(&self) -> impl Iterator<Item = f64> + '_ {
        let floor = CLAMP_RATIO * self.largest();
        self.lambdas.iter().map(move |&l| l.max(floor))
    }

    fn vectors(&self) -> Result<(&Array2<Complex64>, &Array2<Complex64>)> {
        match (&self.left_vectors, &self.right_vectors) {
            (Some(u), Some(v)) => Ok((u, v)),
            _ => Err(Error::MissingData("singular vectors were not computed".into())),
        }
    }
}

/// SVD of `X - z`.
pub fn singular_spectrum(x: &MatrixSample, z: Complex64, want_vectors: bool) -> Result<SingularSpectrum> {
    let a = shifted(x, z);
    singular_spectrum_of(&a, z, want_vectors).map_err(|detail| Error::Numerical {
        seed: x.seed,
        z,
        detail,
    })
}

fn singular_spectrum_of(
    a: &Array2<Complex64>,
    z: Complex64,
    want_vectors: bool,
) -> std::result::Result<SingularSpectrum, String> {
    let n = a.nrows();
    if a.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err("matrix has non-finite entries".into());
    }
    if !want_vectors {
        let (_, sigma, _) = a.svd(false, false).map_err(|e| format!("SVD did not converge: {e}"))?;
        let mut lambdas = sigma.to_vec();
        lambdas.reverse();
        return Ok(SingularSpectrum {
            z,
            n,
            lambdas,
            left_vectors: None,
            right_vectors: None,
        });
    }
    let (u, sigma, vt) = a.svddc(JobSvd::All).map_err(|e| format!("SVD did not converge: {e}"))?;
    let (u, vt) = u.zip(vt).ok_or("SVD returned no vectors")?;
    // LAPACK orders descending; reverse to ascending.
    let mut left = Array2::zeros((n, n));
    let mut right = Array2::zeros((n, n));
    for (k, i) in (0..n).rev().enumerate() {
        let mut uk = u.column(i).to_owned();
        let mut vk: Array1<Complex64> = vt.row(i).mapv(|c| c.conj());
        fix_phase(&mut uk, &mut vk);
        left.column_mut(k).assign(&uk);
        right.column_mut(k).assign(&vk);
    }
    let mut lambdas = sigma.to_vec();
    lambdas.reverse();
    Ok(SingularSpectrum {
        z,
        n,
        lambdas,
        left_vectors: Some(left),
        right_vectors: Some(right),
    })
}

/// Rotate `(u, v)` jointly so the largest-modulus entry of `v` is real positive.
/// The first such entry wins ties.
fn fix_phase(u: &mut Array1<Complex64>, v: &mut Array1<Complex64>) {
    let (_, pivot) = v.iter().fold((-1.0, Complex64::new(1.0, 0.0)), |(best, p), c| {
        if c.norm() > best {
            (c.norm(), *c)
        } else {
            (best, p)
        }
    });
    if pivot.norm() == 0.0 {
        return;
    }
    let phase = (pivot / pivot.norm()).conj();
    u.mapv_inplace(|c| c * phase);
    v.mapv_inplace(|c| c * phase);
}

/// `⟨G^z(iη)⟩` and `Im Tr G^z(iη)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolventFunctionals {
    pub eta: f64,
    pub avg_trace: Complex64,
    pub im_trace: f64,
}

pub fn resolvent_trace(spec: &SingularSpectrum, eta: f64) -> Result<ResolventFunctionals> {
    if !(eta > 0.0) {
        return Err(Error::InvalidParameter(format!("eta must be positive, got {eta}")));
    }
    let im_trace = 2.0 * spec.lambdas.iter().map(|l| eta / (l * l + eta * eta)).sum::<f64>();
    Ok(ResolventFunctionals {
        eta,
        avg_trace: Complex64::new(0.0, im_trace / (2 * spec.n) as f64),
        im_trace,
    })
}

/// Dense `(H^z - w)^{-1}` assembled from the singular decomposition.
pub fn resolvent_matrix(spec: &SingularSpectrum, w: Complex64) -> Result<Array2<Complex64>> {
    if !(w.im > 0.0) {
        return Err(Error::InvalidParameter(format!("resolvent needs Im w > 0, got {w}")));
    }
    let (u, v) = spec.vectors()?;
    let n = spec.n;
    let a: Vec<Complex64> = spec.lambdas.iter().map(|&l| w / (l * l - w * w)).collect();
    let b: Vec<Complex64> = spec.lambdas.iter().map(|&l| l / (l * l - w * w)).collect();
    let scale = |m: &Array2<Complex64>, c: &[Complex64]| {
        let mut out = m.clone();
        for (mut col, &f) in out.axis_iter_mut(Axis(1)).zip(c) {
            col.mapv_inplace(|x| x * f);
        }
        out
    };
    let uh = u.t().mapv(|c| c.conj());
    let vh = v.t().mapv(|c| c.conj());
    let ua = scale(u, &a);
    let va = scale(v, &a);
    let ub = scale(u, &b);
    let vb = scale(v, &b);
    let mut g = Array2::zeros((2 * n, 2 * n));
    g.slice_mut(s![..n, ..n]).assign(&ua.dot(&uh));
    g.slice_mut(s![n.., n..]).assign(&va.dot(&vh));
    g.slice_mut(s![..n, n..]).assign(&ub.dot(&vh));
    g.slice_mut(s![n.., ..n]).assign(&vb.dot(&uh));
    Ok(g)
}

fn inner(a: ndarray::ArrayView1<Complex64>, b: ndarray::ArrayView1<Complex64>) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// `|⟨u_i, u'_j⟩|² + |⟨v_i, v'_j⟩|²` for the `k` smallest indices on each side.
#[derive(Debug, Clone, PartialEq)]
pub struct OverlapTable {
    pub k: usize,
    pub entries: Array2<f64>,
}

impl OverlapTable {
    pub fn max(&self) -> f64 {
        self.entries.iter().copied().fold(0.0, f64::max)
    }
}

fn check_pair(spec1: &SingularSpectrum, spec2: &SingularSpectrum, k: usize) -> Result<()> {
    if spec1.n != spec2.n {
        return Err(Error::InvalidInput(format!(
            "dimension mismatch: {} vs {}",
            spec1.n, spec2.n
        )));
    }
    if k == 0 || k > spec1.n {
        return Err(Error::InvalidInput(format!(
            "window k = {k} must lie in 1..={}",
            spec1.n
        )));
    }
    Ok(())
}

pub fn overlaps(spec1: &SingularSpectrum, spec2: &SingularSpectrum, k: usize) -> Result<OverlapTable> {
    check_pair(spec1, spec2, k)?;
    let (u1, v1) = spec1.vectors()?;
    let (u2, v2) = spec2.vectors()?;
    let entries = Array2::from_shape_fn((k, k), |(i, j)| {
        inner(u1.column(i), u2.column(j)).norm_sqr() + inner(v1.column(i), v2.column(j)).norm_sqr()
    });
    Ok(OverlapTable { k, entries })
}

/// Correlation of the DBM drivers `b_i^{z₁}` and `b_j^{z₂}` induced by a shared matrix flow.
///
/// With unit vectors this is `Re[⟨u_i, u'_j⟩⟨v'_j, v_i⟩]`; with the half-norm
/// eigenvector convention the same quantity picks up a factor 4.
pub fn driver_correlation(spec1: &SingularSpectrum, spec2: &SingularSpectrum, k: usize) -> Result<Array2<f64>> {
    check_pair(spec1, spec2, k)?;
    let (u1, v1) = spec1.vectors()?;
    let (u2, v2) = spec2.vectors()?;
    Ok(Array2::from_shape_fn((k, k), |(i, j)| {
        (inner(u1.column(i), u2.column(j)) * inner(v2.column(j), v1.column(i))).re
    }))
}
