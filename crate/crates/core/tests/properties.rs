use std::f64::consts::PI;

use proptest::prelude::*;
use rand::Rng;

use qslkit::bloch::{bloch_from_density, density_from_bloch, DensityMatrix};
use qslkit::bounds::{energy_stats, tau_bd, two_level_bound_suite};
use qslkit::dynamics::{first_hit_time_profile, unitary_evolve, AngleProfile};
use qslkit::experiments::random_spectrum;
use qslkit::oat::{oat_extremes, oat_extremes_brute, oat_point, OatParams};
use qslkit::reachable::{s0_density, s_residual, sample_s0, S0Descriptor};
use qslkit::sampling::{random_mixed_state, random_pure_state, random_state_with_norm2, sample_rng};
use qslkit::spectrum::{classify_structure, oqsl, Spectrum};
use qslkit::threelevel::{classify, hit_time_els3, tau_bd_diag, tau_circle_max, Region, XYPoint, SCALED_TAU_CAP};

fn state(seed: u64, n: usize) -> DensityMatrix {
    let mut rng = sample_rng(seed, n as u64);
    if seed.is_multiple_of(2) {
        random_mixed_state(&mut rng, n).unwrap()
    } else {
        random_pure_state(&mut rng, n).unwrap()
    }
}

fn spectrum(seed: u64, n: usize) -> Spectrum {
    random_spectrum(&mut sample_rng(seed, 1000 + n as u64), n, 1e-3).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn bloch_round_trip_and_purity(seed in any::<u64>(), n in 2usize..=8) {
        let rho = state(seed, n);
        let r = bloch_from_density(&rho).unwrap();
        let back = density_from_bloch(&r);
        prop_assert!((back.matrix() - rho.matrix()).norm() < 1e-12);
        let again = bloch_from_density(&back).unwrap();
        for (a, b) in again.components().iter().zip(r.components()) {
            prop_assert!((a - b).abs() < 1e-12);
        }
        let nf = n as f64;
        prop_assert!((rho.purity() - (1.0 / nf + (nf - 1.0) * r.norm_sqr() / nf)).abs() < 1e-12);
        prop_assert!(r.norm() <= 1.0 + 1e-12);
    }

    #[test]
    fn unitary_evolution_preserves_spectrum(seed in any::<u64>(), n in 2usize..=6, t in 0.0f64..50.0) {
        let rho = state(seed, n);
        let sp = spectrum(seed, n);
        let rt = unitary_evolve(&rho, &sp, t).unwrap();
        let (r0, r1) = (bloch_from_density(&rho).unwrap(), bloch_from_density(&rt).unwrap());
        prop_assert!((r0.norm() - r1.norm()).abs() < 1e-12);
        for (a, b) in rho.eigenvalues().iter().zip(rt.eigenvalues()) {
            prop_assert!((a - b).abs() < 1e-12);
        }
        prop_assert_eq!(rho.populations(), rt.populations());
    }

    #[test]
    fn bd_bound_dominates_oqsl(seed in any::<u64>(), n in 2usize..=6, theta in 0.01f64..=PI) {
        let rho = state(seed, n);
        let sp = spectrum(seed, n);
        let stats = energy_stats(&rho, &sp).unwrap();
        let bd = tau_bd(&stats, &sp, theta).unwrap();
        let tau = oqsl(&sp, theta).unwrap();
        prop_assert!(bd >= tau - 1e-12);
        // Bhatia-Davis variance inequality and the Mandelstam-Tamm ordering
        let product = (sp.e_max() - stats.mean) * (stats.mean - sp.e_min());
        prop_assert!(stats.variance() <= product + 1e-12);
        if stats.deviation > 0.0 {
            prop_assert!(theta / (2.0 * stats.deviation) >= bd - 1e-12 * bd);
        }
    }

    #[test]
    fn two_level_pure_bd_equals_fisher(alpha in 0.01f64..PI - 0.01, theta in 0.01f64..=PI, e0 in 0.0f64..2.0, g in 0.1f64..3.0) {
        let r = two_level_bound_suite(alpha, 1.0, theta, e0, e0 + g).unwrap();
        let (bd, f) = (r.tau_bd.unwrap(), r.tau_f.unwrap());
        prop_assert!((bd - f).abs() <= 1e-12 * bd.max(1.0), "{} vs {}", bd, f);
    }

    #[test]
    fn oqsl_scaling_and_shift(seed in any::<u64>(), n in 2usize..=6, c in 0.1f64..10.0, theta in 0.01f64..=PI) {
        let sp = spectrum(seed, n);
        let scaled = oqsl(&sp.scaled(c).unwrap(), theta).unwrap();
        prop_assert!((scaled - oqsl(&sp, theta).unwrap() / c).abs() < 1e-12 * scaled);
        let a = classify_structure(&sp, 999, 1e-9);
        let b = classify_structure(&sp.shifted(c).unwrap(), 999, 1e-9);
        prop_assert_eq!(a.equally_spaced, b.equally_spaced);
        prop_assert_eq!(a.symmetric, b.symmetric);
        prop_assert_eq!(a.odd_ratio_condition, b.odd_ratio_condition);
    }

    #[test]
    fn first_hit_never_early(seed in any::<u64>(), n in 2usize..=5, theta in 0.05f64..=PI) {
        let rho = state(seed, n);
        let sp = spectrum(seed, n);
        let profile = AngleProfile::from_density(&rho, &sp).unwrap();
        if let Some(h) = profile.default_horizon() {
            let tol = 1e-9;
            if let Some(t) = first_hit_time_profile(&profile, theta, h, tol).unwrap() {
                prop_assert!(profile.theta(t) >= theta - 2.0 * tol);
                prop_assert!(t <= h);
            }
        }
    }

    #[test]
    fn s0_states_reach_pi_at_pair_time(seed in any::<u64>(), n in 2usize..=6) {
        let mut rng = sample_rng(seed, 0);
        let sp = spectrum(seed, n);
        let desc = S0Descriptor::random(&mut rng, n).unwrap();
        let rho = s0_density(&desc).unwrap();
        prop_assert!(rho.eigenvalues()[0] >= -1e-10);
        let b = sample_s0(&desc).unwrap();
        let profile = AngleProfile::new(&b, &sp).unwrap();
        let h = profile.default_horizon().unwrap();
        let t = first_hit_time_profile(&profile, PI, h, 1e-12).unwrap().unwrap();
        prop_assert!((t - PI / desc.gap(&sp)).abs() < 1e-8);
        prop_assert!(s_residual(&b, &sp, PI, t).unwrap().abs() < 1e-8);
    }

    #[test]
    fn three_level_bounds(seed in any::<u64>(), norm2 in 0.05f64..=1.0, theta in 0.05f64..=PI, gap in 0.2f64..5.0) {
        let mut rng = sample_rng(seed, 7);
        let rho = random_state_with_norm2(&mut rng, 3, norm2).unwrap();
        let b = bloch_from_density(&rho).unwrap();
        let p = XYPoint::from_bloch(&b).unwrap();
        let tm = tau_circle_max(&p, theta, gap).unwrap();
        let tbd = tau_bd_diag(b.components()[2], b.components()[7], theta, gap);
        prop_assert!(tbd <= tm * (1.0 + 1e-9));
        let v = classify(&p, theta, gap).unwrap();
        if v.in_s {
            prop_assert!(gap * tm <= SCALED_TAU_CAP + 1e-12);
        }
        prop_assert_eq!(v.region != Region::None, v.in_s);
        let t = hit_time_els3(&p, theta, gap).unwrap();
        prop_assert_eq!(t.is_some(), v.in_s);
        if let (true, Some(t)) = (v.bd_valid, t) {
            prop_assert!(t >= tbd - 1e-9);
        }
    }

    #[test]
    fn oat_closed_form_is_brute_force(n in 1u32..=15, chi in 0.1f64..5.0, ratio in -30.0f64..30.0, phi in 0.0f64..=PI) {
        let p = OatParams::new(2 * n, chi, ratio * chi).unwrap();
        let (hi, lo) = oat_extremes(&p).unwrap();
        let (bhi, blo) = oat_extremes_brute(&p);
        prop_assert!((hi - bhi).abs() <= 1e-12 * bhi.abs().max(1.0));
        prop_assert!((lo - blo).abs() <= 1e-12 * blo.abs().max(1.0));
        prop_assert!(oat_point(&p, PI, phi).unwrap().relative >= -1e-12);
    }

    #[test]
    fn seeded_streams_are_independent_of_order(seed in any::<u64>(), a in 0u64..1000, b in 0u64..1000) {
        let x: f64 = sample_rng(seed, a).random();
        let _: f64 = sample_rng(seed, b).random();
        let y: f64 = sample_rng(seed, a).random();
        prop_assert_eq!(x, y);
    }
}
