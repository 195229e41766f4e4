use proptest::prelude::*;
use rnls::closed_forms::{classify_regime, me_explicit_d1k1, omega_thresholds, q_exact_1d, MassCurve, ModelParams, Regime};

fn curve(d: usize, k: usize, p: f64) -> MassCurve<f64> {
    MassCurve::for_params(&ModelParams::new(d, k, p, 1.0).unwrap()).unwrap()
}

#[test]
fn cubic_line_soliton_values() {
    let c = curve(1, 0, 2.0);
    assert!((c.mass(1.0).unwrap() - 2.0).abs() < 1e-12);
    assert!((c.energy(1.0).unwrap() + 2.0 / 3.0).abs() < 1e-12);
}

#[test]
fn thresholds_for_sextic_regularized_line() {
    let (w1, w2) = omega_thresholds(6.0, 1.0).unwrap();
    let s = 10f64.sqrt();
    assert!((w1 - 2.0 * s / (4.0 * s + 6.0 * 8f64.sqrt())).abs() < 1e-15);
    assert!((w1 - 0.213_525_491_562_421_1).abs() < 1e-12);
    assert_eq!(w2, 0.5);
    let c = curve(1, 1, 6.0);
    assert!(c.mass_prime(w1).unwrap().abs() < 1e-10);
    assert!(c.energy(w2).unwrap().abs() < 1e-12);
}

#[test]
fn explicit_table_matches_curve() {
    for w in [0.05, 0.3, 1.0, 4.0] {
        let ex = me_explicit_d1k1(6.0, 1.0, w).unwrap();
        let c = curve(1, 1, 6.0);
        assert!((ex.mass - c.mass(w).unwrap()).abs() < 1e-12 * ex.mass);
        assert!((ex.energy - c.energy(w).unwrap()).abs() < 1e-12 * (1.0 + ex.energy.abs()));
        assert_eq!(ex.pbeta_pairing, 2.0 * ex.mass);
    }
}

#[test]
fn mass_critical_line_has_flat_curve() {
    let c = curve(1, 0, 4.0);
    let m1 = c.mass(1.0).unwrap();
    for w in [0.01, 0.5, 3.0, 100.0] {
        assert!((c.mass(w).unwrap() - m1).abs() < 1e-12 * m1);
        assert!(c.mass_prime(w).unwrap().abs() < 1e-12);
    }
}

#[test]
fn regimes_on_the_line() {
    let r = |k, p| classify_regime(&ModelParams::new(1, k, p, 1.0).unwrap()).unwrap().regime;
    assert_eq!(r(0, 6.0), Regime::SupercriticalK0);
    assert_eq!(r(0, 2.0), Regime::SubcriticalAllStable);
    assert!(r(1, 6.0).label().starts_with("k_ge_1"));
}

proptest! {
    #[test]
    fn slope_agrees_with_finite_difference(omega in 0.05f64..5.0, p in 0.5f64..8.0, k in 0usize..=1) {
        let c = curve(1, k, p);
        let exact = c.mass_prime(omega).unwrap();
        let fd = c.mass_prime_fd(omega).unwrap();
        prop_assert!((exact - fd).abs() < 1e-6 * (1.0 + exact.abs()), "{exact} vs {fd}");
    }

    #[test]
    fn profile_solves_its_ode(p in 0.5f64..8.0, x in -6.0f64..6.0) {
        let h = 1e-3;
        let q = |x| q_exact_1d(p, x);
        let qxx = (q(x + h) - 2.0 * q(x) + q(x - h)) / (h * h);
        let res = -qxx + q(x) - q(x).powf(p + 1.0);
        prop_assert!(res.abs() < 1e-4 * (1.0 + q(x)), "residual {res}");
    }

    #[test]
    fn energy_is_minus_action_slope_identity(omega in 0.05f64..5.0, p in 0.5f64..3.9) {
        // dE/domega = -omega dm/domega along the bound-state family
        let c = curve(1, 1, p);
        let h = 1e-5 * omega;
        let de = (c.energy(omega + h).unwrap() - c.energy(omega - h).unwrap()) / (2.0 * h);
        let mp = c.mass_prime(omega).unwrap();
        prop_assert!((de + omega * mp).abs() < 1e-5 * (1.0 + (omega * mp).abs()), "{de} vs {}", -omega * mp);
    }
}
