use proptest::prelude::*;
use rnls::closed_forms::{phi_profile, ModelParams, ProfileSource, QNorms};
use rnls::functionals::FunctionalReport;
use rnls::ground_state::{auto_grid, bound_state, minimize_im, shoot_radial, FlowOptions, ShootingOptions};
use rnls::{Grid, GridSpec};

#[test]
fn townes_profile_mass() {
    let q = shoot_radial(2, 2.0f64, &ShootingOptions::default()).unwrap();
    let norms = QNorms::from_radial(&q);
    assert!((norms.l2_sq - 11.700_896_5).abs() < 1e-5, "{}", norms.l2_sq);
    // Pohozaev: |grad Q|^2 = d p / (2 (p + 2)) int Q^{p+2} and |grad Q|^2 + |Q|^2 = int Q^{p+2}
    assert!((norms.grad_sq - 0.5 * norms.lp_pow).abs() < 1e-6 * norms.lp_pow);
    assert!((norms.grad_sq + norms.l2_sq - norms.lp_pow).abs() < 1e-6 * norms.lp_pow);
}

#[test]
fn three_dimensional_cubic_profile_obeys_pohozaev() {
    let q = shoot_radial(3, 2.0f64, &ShootingOptions::default()).unwrap();
    let n = QNorms::from_radial(&q);
    assert!((n.grad_sq - 0.75 * n.lp_pow).abs() < 1e-6 * n.lp_pow);
    assert!((n.grad_sq + n.l2_sq - n.lp_pow).abs() < 1e-6 * n.lp_pow);
    assert!((q.value(0.0) - 4.337_4).abs() < 1e-3, "{}", q.value(0.0));
}

#[test]
fn flow_recovers_the_line_soliton() {
    let params = ModelParams::new(1, 0, 2.0f64, 1.0).unwrap();
    let grid = Grid::<f64>::new(GridSpec::cubic(1, 0, 512, 40.0).unwrap());
    let res = minimize_im(&params, &grid, 2.0, &FlowOptions::default()).unwrap();
    assert!(res.converged && !res.infimum_not_attained);
    assert!((res.energy + 2.0 / 3.0).abs() < 1e-8, "{}", res.energy);
    assert!((res.omega_hat - 1.0).abs() < 1e-6, "{}", res.omega_hat);
}

#[test]
fn sampled_profile_solves_the_profile_equation() {
    for (d, k, p, omega) in [(1, 1, 6.0, 0.3), (2, 1, 2.0, 1.0), (2, 0, 1.0, 2.0)] {
        let params = ModelParams::new(d, k, p, 1.0).unwrap().with_omega(omega).unwrap();
        let grid = auto_grid(&params, omega, None).unwrap();
        let phi = bound_state(&params, &grid).unwrap().phi;
        let r = FunctionalReport::evaluate(&phi, p, 1.0, omega).unwrap();
        assert!(r.el_residual < 1e-4, "({d},{k},{p},{omega}): {}", r.el_residual);
        assert!(r.pohozaev_1.abs() < 1e-6 && r.pohozaev_2.abs() < 1e-6, "{r:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn exact_line_profile_has_closed_form_norms(p in 0.8f64..8.0, omega in 0.2f64..4.0, beta in 0.0f64..2.0) {
        let params = ModelParams::new(1, 1, p, beta).unwrap().with_omega(omega).unwrap();
        let grid = auto_grid(&params, omega, None).unwrap();
        let phi = phi_profile(&params, ProfileSource::Exact1d, &grid).unwrap();
        let r = FunctionalReport::evaluate(&phi, p, beta, omega).unwrap();
        let c = rnls::MassCurve::for_params(&params).unwrap();
        prop_assert!((r.mass - c.mass(omega).unwrap()).abs() < 1e-8 * r.mass, "{} vs {}", r.mass, c.mass(omega).unwrap());
        prop_assert!((r.energy - c.energy(omega).unwrap()).abs() < 1e-8 * (r.mass + r.energy.abs()));
    }
}
