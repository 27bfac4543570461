use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rtp_core::attack::mu_ceo;
use rtp_core::stability::{
    boundary_curve, delay_coefficients, delay_ros_limit, eta_bar_at, jury, root_modulus_gap,
    root_modulus_gap_increasing, roots, roots_in_unit_circle, ros_nesting_check, scaling_eta_bar,
    scaling_ros_limit, AttackFamily, CharPoly, JuryVerdict, ETA_TOLERANCE, LIMIT_PROBE_H,
};

fn open_unit(rng: &mut ChaCha8Rng) -> f64 {
    loop {
        let x: f64 = rng.random();
        if x > 0.0 {
            return x;
        }
    }
}

/// A random attack-family polynomial with h ∈ (0, 100], η ∈ (0, 1), ρ ∈ (0, 1], τ ∈ [1, 20].
fn random_family_poly(rng: &mut ChaCha8Rng) -> CharPoly {
    let h = 100.0 * open_unit(rng);
    let eta = open_unit(rng).min(1.0 - 1e-12);
    let rho = open_unit(rng);
    match rng.random_range(0..3) {
        0 => CharPoly::delay(h, eta, rho, rng.random_range(1..=20)).unwrap(),
        1 => CharPoly::scaling(h, eta, rho, libm::pow(open_unit(rng) * 2.0, -0.8)).unwrap(),
        _ => CharPoly::scaled_delay(h, eta, rho, rng.random_range(1..=20), 0.5 + open_unit(rng))
            .unwrap(),
    }
}

#[test]
fn jury_agrees_with_eigenvalue_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut checked = 0;
    for _ in 0..10_000 {
        let p = random_family_poly(&mut rng);
        let oracle = roots_in_unit_circle(&p).unwrap();
        if (oracle.max_modulus - 1.0).abs() <= 1e-6 {
            continue;
        }
        checked += 1;
        let verdict = jury(&p);
        let expect = if oracle.max_modulus < 1.0 {
            JuryVerdict::Stable
        } else {
            JuryVerdict::Unstable
        };
        assert_eq!(
            verdict,
            expect,
            "{:?} max |z| = {}",
            p.coeffs(),
            oracle.max_modulus
        );
    }
    assert!(checked > 9_000);
}

#[test]
fn half_compromised_delay_never_destabilises() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..10_000 {
        let h = 100.0 * open_unit(&mut rng);
        let eta = open_unit(&mut rng).min(1.0 - 1e-12);
        let rho = 0.5 * open_unit(&mut rng);
        let tau = rng.random_range(1..=20);
        let p = CharPoly::delay(h, eta, rho, tau).unwrap();
        let r = roots_in_unit_circle(&p).unwrap();
        assert!(
            r.max_modulus < 1.0,
            "h {h} eta {eta} rho {rho} tau {tau}: {}",
            r.max_modulus
        );

        let u = delay_coefficients(h, eta, rho);
        for z in roots(&p).unwrap() {
            let theta = libm::atan2(z.im, z.re);
            assert!(root_modulus_gap(u, tau, theta, 1.0) > 0.0);
            assert!(root_modulus_gap_increasing(u, tau, theta));
        }
    }
}

#[test]
fn scaling_closed_form_matches_jury() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut checked = 0;
    for _ in 0..1_000 {
        let h = 100.0 * open_unit(&mut rng);
        let eta = open_unit(&mut rng).min(1.0 - 1e-12);
        let rho = open_unit(&mut rng);
        let gamma_mu = libm::pow(2.0 * open_unit(&mut rng), -0.8);
        let bar = scaling_eta_bar(h, rho, gamma_mu).unwrap().min(1.0);
        if (eta - bar).abs() < 1e-9 {
            continue;
        }
        checked += 1;
        let stable =
            jury(&CharPoly::scaling(h, eta, rho, gamma_mu).unwrap()) == JuryVerdict::Stable;
        assert_eq!(stable, eta < bar, "h {h} eta {eta} rho {rho} gm {gamma_mu}");
    }
    assert!(checked > 990);
}

#[test]
fn limits_match_large_h_boundaries() {
    for (rho, gamma) in [(1.0, 0.5), (0.7, 0.3), (0.4, 0.9), (1.0, 1.4)] {
        let gm = gamma * mu_ceo(gamma, -0.8).unwrap();
        let far = scaling_eta_bar(LIMIT_PROBE_H, rho, gm).unwrap().min(1.0);
        assert!((scaling_ros_limit(rho, gm).unwrap() - far).abs() < 1e-4);
    }
    for (rho, tau) in [(1.0, 1), (1.0, 3), (0.75, 4), (0.6, 5), (0.9, 2)] {
        let lim = delay_ros_limit(rho, tau).unwrap();
        let jury_far = eta_bar_at(&AttackFamily::Delay { rho, tau }, LIMIT_PROBE_H, 1e-7)
            .unwrap()
            .value();
        assert!(
            (lim - jury_far).abs() < 1e-4,
            "rho {rho} tau {tau}: {lim} vs {jury_far}"
        );
    }
}

#[test]
fn delay_limit_shrinks_with_rho_and_tau() {
    let rhos = [0.55, 0.65, 0.75, 0.85, 1.0];
    for tau in 1..=6 {
        let lims: Vec<f64> = rhos
            .iter()
            .map(|&r| delay_ros_limit(r, tau).unwrap())
            .collect();
        assert!(lims.windows(2).all(|w| w[1] <= w[0]), "tau {tau}: {lims:?}");
    }
    for &rho in &rhos {
        let lims: Vec<f64> = (1..=6).map(|t| delay_ros_limit(rho, t).unwrap()).collect();
        assert!(lims.windows(2).all(|w| w[1] <= w[0]), "rho {rho}: {lims:?}");
    }
}

#[test]
fn nesting_over_delays() {
    let grid = [0.1, 1.0, 10.0, 100.0];
    for rho in [0.5, 0.75, 1.0] {
        for tau in 1..=6 {
            assert!(
                ros_nesting_check(rho, tau, &grid).unwrap(),
                "rho {rho} tau {tau}"
            );
        }
    }
}

#[test]
fn delay_boundaries_are_non_increasing() {
    let grid: Vec<f64> = (0..25)
        .map(|i| libm::pow(10.0, -1.0 + i as f64 * 0.125))
        .collect();
    for (rho, tau) in [(1.0, 2), (1.0, 6), (0.75, 4)] {
        let b = boundary_curve(&AttackFamily::Delay { rho, tau }, &grid, ETA_TOLERANCE).unwrap();
        assert!(b.non_increasing, "rho {rho} tau {tau}");
        assert!(b.samples.iter().all(|s| s.single_crossing));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn scaling_bound_shrinks_with_rho_and_gain(
        h in 0.01f64..100.0,
        rho in 0.01f64..1.0,
        drho in 0.0f64..0.5,
        gm in 0.2f64..5.0,
        dgm in 0.0f64..3.0,
    ) {
        let rho2 = (rho + drho).min(1.0);
        let a = scaling_eta_bar(h, rho, gm).unwrap();
        let b = scaling_eta_bar(h, rho2, gm).unwrap();
        if gm > 1.0 {
            prop_assert!(b <= a + 1e-12);
            let c = scaling_eta_bar(h, rho, gm + dgm).unwrap();
            prop_assert!(c <= a + 1e-12);
        }
    }

    #[test]
    fn scaled_delay_with_unit_gain_is_delay(h in 0.01f64..50.0, eta in 0.01f64..0.99, rho in 0.01f64..1.0, tau in 1usize..15) {
        prop_assert_eq!(
            CharPoly::scaled_delay(h, eta, rho, tau, 1.0).unwrap(),
            CharPoly::delay(h, eta, rho, tau).unwrap()
        );
    }

    #[test]
    fn degree_one_root_is_explicit(h in 0.01f64..50.0, eta in 0.01f64..0.99, rho in 0.01f64..1.0, gm in 0.2f64..4.0) {
        let p = CharPoly::scaling(h, eta, rho, gm).unwrap();
        let r = roots_in_unit_circle(&p).unwrap();
        let c = p.coeffs();
        prop_assert!((r.max_modulus - (c[1] / c[0]).abs()).abs() < 1e-12);
    }
}
