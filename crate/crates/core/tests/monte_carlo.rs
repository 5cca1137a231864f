//! Monte Carlo checks of the simulators against each other and against exact laws.
//! These are statistical: every threshold leaves room for several standard errors.

use num_complex::Complex64;
use rayon::prelude::*;

use spectral_edge::dbm::{
    coupling_run, coupling_time, decorrelation_experiment, run_matrix_flow_pair, run_particles, shift_pair,
    CouplingConfig, DecorrelationConfig, DriverSpec, ParticleState,
};
use spectral_edge::ensembles::{sample_ginibre, EntryDistribution};
use spectral_edge::ginibre::kostlan_radius_cdf;
use spectral_edge::hermitization::singular_spectrum;
use spectral_edge::seed::mix64;
use spectral_edge::stats::{kolmogorov_survival, ks_statistic, ks_two_sample, median};
use spectral_edge::tail_stats::{
    predicted_tail, resolvent_moment_estimate, tail_estimate, MomentConfig, TailConfig, Thresholds,
};

#[test]
fn kostlan_matches_small_ginibre() {
    let (n, trials) = (8, 4000);
    let rho: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|i| sample_ginibre(n, mix64(41, i)).unwrap().spectral_radius().unwrap())
        .collect();
    let d = ks_statistic(&rho, |r| kostlan_radius_cdf(n, r).unwrap());
    let p = kolmogorov_survival((trials as f64).sqrt() * d);
    assert!(p >= 0.01, "KS {d:.4}, p = {p:.4}");
}

#[test]
fn particle_and_matrix_flows_agree_in_law() {
    let (n, t, trials) = (64, 0.01, 500u64);
    let z = Complex64::new(1.0, 0.0);
    let matrix: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let x0 = sample_ginibre(n, mix64(51, i)).unwrap();
            run_matrix_flow_pair(&x0, z, z, t, 1, 0, mix64(52, i)).unwrap().lambdas1[0][0]
        })
        .collect();
    let particle: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let x0 = sample_ginibre(n, mix64(53, i)).unwrap();
            let s = ParticleState::new(singular_spectrum(&x0, z, false).unwrap().lambdas).unwrap();
            run_particles(&s, t, 400, mix64(54, i)).unwrap().0.lambdas[0]
        })
        .collect();
    let (d, p) = ks_two_sample(&matrix, &particle);
    assert!(p >= 0.01, "two-sample KS {d:.4}, p = {p:.4}");
}

#[test]
fn coupled_processes_stay_close() {
    let n = 128;
    let nf = n as f64;
    let (z1, z2) = shift_pair(1.0, 1.0).unwrap();
    let t1 = coupling_time(n, 0.1).unwrap();
    let dists: Vec<f64> = (0..200u64)
        .into_par_iter()
        .flat_map_iter(|s| {
            let cfg = CouplingConfig {
                n,
                z1,
                z2,
                t1,
                k: 2,
                steps: 2000,
                drivers: DriverSpec::MatrixInduced,
                seed: mix64(61, s),
            };
            coupling_run(&cfg).unwrap().dist
        })
        .collect();
    let med = median(&dists);
    assert!(med <= nf.powf(-0.75), "median coupling distance {med:.4}");
}

#[test]
fn equal_shifts_are_fully_correlated() {
    let n = 64;
    let z = Complex64::new(1.0, 0.0);
    let mut cfg = DecorrelationConfig::new(n, z, z, 200, 71);
    cfg.t1 = (n as f64).powf(-0.4);
    let st = decorrelation_experiment(&cfg).unwrap();
    assert!(st.lambda_corr >= 0.9);
    assert_eq!(st.joint_tail, st.marginal_tails.0);
    assert!(st.trace_cov.abs() <= (st.trace_vars.0 * st.trace_vars.1).sqrt() * (1.0 + 1e-12));
}

#[test]
fn decorrelation_is_symmetric_in_the_shifts() {
    let n = 64;
    let (z1, z2) = shift_pair(1.05, 0.4).unwrap();
    let a = decorrelation_experiment(&DecorrelationConfig::new(n, z1, z2, 300, 72)).unwrap();
    let b = decorrelation_experiment(&DecorrelationConfig::new(n, z2, z1, 300, 72)).unwrap();
    // Same matrices, roles swapped.
    assert_eq!(a.marginal_tails.0, b.marginal_tails.1);
    assert_eq!(a.joint_tail, b.joint_tail);
    assert!((a.trace_corr - b.trace_corr).abs() <= 1e-12);
}

// The bound holds for y <= C/(nδ²) with a constant independent of δ, so the
// ratio to the reference shape must not grow as δ moves away from the edge.
#[test]
fn tail_stays_below_the_reference_shape() {
    let n = 200;
    let nf = n as f64;
    let mut ratios = Vec::new();
    for (j, k) in [2.0, 2.5, 3.0].iter().enumerate() {
        let delta = k / nf.sqrt();
        let y = 1.0 / (nf * delta * delta);
        let cfg = TailConfig {
            n,
            ensemble: EntryDistribution::ComplexGaussian,
            delta,
            thresholds: Thresholds::Relative(vec![y]),
            trials: 8000,
            seed: mix64(81, j as u64),
            check_budget: false,
        };
        let p = tail_estimate(&cfg).unwrap().estimates[0];
        if j == 0 {
            assert!(p.hits >= 10, "too few hits at delta = {delta}: {}", p.hits);
        }
        ratios.push(p.estimate / predicted_tail(n, delta, y));
    }
    assert!(
        ratios[1..].iter().all(|&r| r <= 3.0 * ratios[0]),
        "ratios to the reference shape {ratios:?}"
    );
}

fn moment_config(n: usize, ensemble: EntryDistribution, eta: f64, trials: usize, seed: u64) -> MomentConfig {
    MomentConfig {
        n,
        ensemble,
        delta: 2.0 / (n as f64).sqrt(),
        eta,
        ks: vec![1],
        trials,
        resamples: 500,
        seed,
    }
}

#[test]
fn first_moment_has_the_local_scale() {
    let n = 200;
    let eta = (n as f64).powf(-0.75);
    let t = resolvent_moment_estimate(&moment_config(n, EntryDistribution::ComplexGaussian, eta, 300, 91)).unwrap();
    let ratio = t.row(1).unwrap().moment / ((n as f64).sqrt() * eta);
    assert!((0.05..=20.0).contains(&ratio), "{ratio}");
}

#[test]
fn bernoulli_moments_match_ginibre() {
    let n = 500;
    let eta = (n as f64).powf(-0.9);
    let g = resolvent_moment_estimate(&moment_config(n, EntryDistribution::ComplexGaussian, eta, 300, 92)).unwrap();
    let b = resolvent_moment_estimate(&moment_config(
        n,
        EntryDistribution::SymmetricComplexBernoulli,
        eta,
        300,
        93,
    ))
    .unwrap();
    let (g, b) = (g.row(1).unwrap(), b.row(1).unwrap());
    let s = (g.se * g.se + b.se * b.se).sqrt();
    assert!(
        (g.moment - b.moment).abs() <= 3.0 * s,
        "{} vs {} (σ {s})",
        g.moment,
        b.moment
    );
}
