use num_complex::Complex64;
use proptest::prelude::*;

use spectral_edge::dbm::{run_particles, shift_pair, ParticleState};
use spectral_edge::ensembles::{sample_iid, EntryDistribution};
use spectral_edge::ginibre::{kernel_diag, kernel_offdiag, kostlan_radius_cdf, reg_inc_gamma_p, reg_inc_gamma_q};
use spectral_edge::girko::RadialTestFunction;
use spectral_edge::mde::solve_mde;
use spectral_edge::seed::mix64;
use spectral_edge::stats::Proportion;

fn ensemble() -> impl Strategy<Value = EntryDistribution> {
    prop::sample::select(EntryDistribution::ALL.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn sampling_is_a_function_of_the_seed(n in 1usize..12, dist in ensemble(), seed: u64) {
        let a = sample_iid(n, dist, seed).unwrap();
        let b = sample_iid(n, dist, seed).unwrap();
        prop_assert_eq!(&a.entries, &b.entries);
        let c = sample_iid(n, dist, mix64(seed, 1)).unwrap();
        prop_assert_ne!(&a.entries, &c.entries);
    }

    #[test]
    fn derived_seeds_are_distinct(master: u64, i in 0u64..1000, j in 0u64..1000) {
        prop_assume!(i != j);
        prop_assert_ne!(mix64(master, i), mix64(master, j));
    }

    #[test]
    fn kostlan_cdf_is_monotone(n in 1usize..400, r in 0.0f64..2.0, dr in 0.0f64..0.1) {
        let a = kostlan_radius_cdf(n, r).unwrap();
        let b = kostlan_radius_cdf(n, r + dr).unwrap();
        prop_assert!((0.0..=1.0).contains(&a));
        prop_assert!(b >= a * (1.0 - 1e-12), "cdf({r}) = {a} > cdf({}) = {b}", r + dr);
    }

    #[test]
    fn incomplete_gamma_halves_sum_to_one(a in 0.1f64..1e4, t in 0.0f64..3.0) {
        let x = a * t;
        let p = reg_inc_gamma_p(a, x).unwrap();
        let q = reg_inc_gamma_q(a, x).unwrap();
        prop_assert!((0.0..=1.0).contains(&p) && (0.0..=1.0).contains(&q));
        prop_assert!((p + q - 1.0).abs() <= 1e-12, "P + Q - 1 = {}", p + q - 1.0);
    }

    #[test]
    fn kernel_is_positive_semidefinite_in_pairs(
        n in 1usize..300,
        (zr, zi, wr, wi) in (-1.5f64..1.5, -1.5f64..1.5, -1.5f64..1.5, -1.5f64..1.5),
    ) {
        let z = Complex64::new(zr, zi);
        let w = Complex64::new(wr, wi);
        let kzw = kernel_offdiag(n, z, w).unwrap();
        prop_assume!(!kzw.lost_precision);
        let kzz = kernel_diag(n, z).unwrap().ln_abs();
        let kww = kernel_diag(n, w).unwrap().ln_abs();
        // |K(z,w)|² ≤ K(z,z) K(w,w)
        prop_assert!(2.0 * kzw.ln_abs() <= kzz + kww + 1e-9);
        prop_assert!(kzz <= (n as f64 / std::f64::consts::PI).ln() + 1e-12);
    }

    #[test]
    fn dyson_equation_is_solved(zr in -1.6f64..1.6, zi in -1.6f64..1.6, e in -2.5f64..2.5, log_eta in -6.0f64..1.0) {
        let s = solve_mde(Complex64::new(zr, zi), Complex64::new(e, 10f64.powf(log_eta))).unwrap();
        prop_assert!(s.m.im > 0.0);
        prop_assert!(s.residual <= 1e-12, "residual {}", s.residual);
    }

    #[test]
    fn wilson_interval_contains_estimate(trials in 1usize..5000, frac in 0.0f64..=1.0) {
        let hits = ((trials as f64) * frac).round() as usize;
        let p = Proportion::wilson(hits, trials, 1.96);
        prop_assert!(0.0 <= p.lo && p.lo <= p.estimate && p.estimate <= p.hi && p.hi <= 1.0);
    }

    #[test]
    fn test_functions_stay_in_unit_interval(a in 0.0f64..1.0, w in (0.01f64..0.5, 0.0f64..0.5, 0.01f64..0.5), r in 0.0f64..3.0) {
        let knots = [a, a + w.0, a + w.0 + w.1, a + w.0 + w.1 + w.2];
        let f = RadialTestFunction::custom(knots).unwrap();
        let v = f.value(r);
        prop_assert!((0.0..=1.0).contains(&v));
        if r >= knots[1] && r <= knots[2] {
            prop_assert_eq!(v, 1.0);
        }
    }

    #[test]
    fn shift_pairs_have_requested_geometry(r in 0.1f64..2.0, frac in 0.0f64..=1.0) {
        let d = 2.0 * r * frac;
        let (z1, z2) = shift_pair(r, d).unwrap();
        prop_assert!((z1.norm() - r).abs() <= 1e-12 && (z2.norm() - r).abs() <= 1e-12);
        prop_assert!(((z1 - z2).norm() - d).abs() <= 1e-9);
        prop_assert_eq!(z1, z2.conj());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn particles_stay_positive_and_ordered(n in 1usize..24, seed: u64, t1 in 1e-3f64..0.2) {
        let init: Vec<f64> = (1..=n).map(|i| i as f64 / n as f64).collect();
        let state = ParticleState::new(init).unwrap();
        let (end, _) = run_particles(&state, t1, 200, seed).unwrap();
        prop_assert!(end.lambdas[0] > 0.0);
        prop_assert!(end.lambdas.windows(2).all(|w| w[0] < w[1]));
        prop_assert!((end.t - t1).abs() <= 1e-9 * t1);
    }
}
