use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4, PI};

use approx::assert_abs_diff_eq;
use proptest::prelude::*;
use qdistill_core::cavity::*;
use qdistill_core::quadrature::Tolerance;
use qdistill_core::spectral::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const FIG_OMEGA_TAU: f64 = FRAC_PI_4;
const FIG_G_TILDE: f64 = 5.0;

fn fig_state() -> GaussianParticleState {
    GaussianParticleState::new(0.1, 0.0, 0.2, 5.0, FRAC_1_SQRT_2).unwrap()
}

fn fig1() -> ModelParams {
    ModelParams::coherent(FIG_OMEGA_TAU, FIG_G_TILDE, 1.0, PI).unwrap()
}

fn fig2() -> ModelParams {
    ModelParams::number_one(FIG_OMEGA_TAU, FIG_G_TILDE).unwrap()
}

fn random_coherent(rng: &mut ChaCha8Rng) -> (ModelParams, GaussianParticleState) {
    let params = ModelParams::coherent(
        rng.gen_range(0.3..2.5),
        rng.gen_range(1.0..6.0),
        rng.gen_range(0.0..1.5),
        rng.gen_range(0.0..2.0 * PI),
    )
    .unwrap();
    let dp0 = rng.gen_range(0.1..0.4);
    let pi0 = rng.gen_range(0.4..1.0);
    let dx0 = GaussianParticleState::min_dx0(dp0, pi0) * rng.gen_range(1.0..3.0);
    let state = GaussianParticleState::new(rng.gen_range(-0.3..0.3), rng.gen_range(-2.0..2.0), dp0, dx0, pi0).unwrap();
    (params, state)
}

#[test]
fn initial_density_trace_and_purity() {
    let tol = Tolerance::default();
    for (x0, dx0) in [(0.0, 5.0), (1.5, 3.6), (-4.0, 20.0)] {
        let s = GaussianParticleState { x0, dx0, ..fig_state() };
        let rho = initial_density(&s).unwrap();
        assert_abs_diff_eq!(rho.trace(tol).unwrap(), 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(rho.purity(tol).unwrap(), FRAC_1_SQRT_2, epsilon = 1e-6);
    }
}

#[test]
fn initial_density_rejects_imaginary_b() {
    let bad = GaussianParticleState {
        dx0: 1.0,
        ..fig_state()
    };
    assert!(matches!(initial_density(&bad), Err(qdistill_core::Error::InvalidState(_))));
}

#[test]
fn peak_and_curvature_at_bundled_parameters() {
    let s = fig_state();
    let k1 = kernel_coherent(&fig1(), &s).unwrap();
    let d1 = analyze(&k1).unwrap();
    assert_abs_diff_eq!(d1.e_star, 0.2, epsilon = 1e-9);
    assert!(d1.big_lambda_star.abs() <= 1e-10);
    // 2G² = 200 sin²(π/8)
    assert_abs_diff_eq!(d1.curvature, 29.289_321_881_345_25, epsilon = 1e-6);
    assert_abs_diff_eq!(delta_n(&d1, 10).unwrap(), 0.058_431, epsilon = 1e-6);

    let k2 = kernel_number1(&fig2(), &s).unwrap();
    let d2 = analyze(&k2).unwrap();
    assert_abs_diff_eq!(d2.e_star, 0.0, epsilon = 1e-9);
    assert_abs_diff_eq!(d2.curvature / filter_curvature(&fig2()), 1.0, epsilon = 1e-6);
}

#[test]
fn peak_matches_selected_momentum_over_parameter_grid() {
    let s = fig_state();
    for omega_tau in [0.4, FRAC_PI_4, 2.0] {
        for g_tilde in [1.5, 5.0] {
            for alpha_mod in [0.3, 1.0] {
                for gamma in [0.0, 1.0, PI / 2.0, 2.5, PI] {
                    let p = ModelParams::coherent(omega_tau, g_tilde, alpha_mod, gamma).unwrap();
                    let k = kernel_coherent(&p, &s).unwrap();
                    let peak = locate_peak(&k).unwrap();
                    assert!(
                        (peak - selected_momentum(&p)).abs() <= 1e-8,
                        "{p:?}: {peak} vs {}",
                        selected_momentum(&p)
                    );
                    let data = laplace_data(&k, peak).unwrap();
                    assert_abs_diff_eq!(data.big_lambda_star, peak_decay_rate(&p), epsilon = 1e-10);
                }
            }
        }
    }
}

#[test]
fn closed_forms_match_quadrature_at_fig1() {
    let (p, s) = (fig1(), fig_state());
    let k = kernel_coherent(&p, &s).unwrap();
    let rho = initial_density(&s).unwrap();
    let d = Distiller::new(&k, &rho);
    for n in [0, 1, 2, 5, 10, 20, 50] {
        let closed = survival_closed_coherent(&p, &s, n).unwrap();
        let exact = d.survival_exact(n).unwrap();
        assert!((exact - closed).abs() / closed <= 1e-5, "P({n}) {exact} vs {closed}");
        assert_abs_diff_eq!(d.purity_exact(n).unwrap(), purity_closed_coherent(&p, &s, n).unwrap(), epsilon = 1e-5);
    }
    assert_abs_diff_eq!(d.survival_exact(10).unwrap(), 0.24993, epsilon = 1e-4);
    assert_abs_diff_eq!(d.purity_exact(10).unwrap(), 0.96286, epsilon = 1e-4);
}

#[test]
fn closed_forms_match_quadrature_on_random_sets() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for _ in 0..5 {
        let (p, s) = random_coherent(&mut rng);
        let k = kernel_coherent(&p, &s).unwrap();
        let rho = initial_density(&s).unwrap();
        let d = Distiller::new(&k, &rho);
        for n in [0, 1, 2, 5, 10, 20, 50] {
            let closed = survival_closed_coherent(&p, &s, n).unwrap();
            let exact = d.survival_exact(n).unwrap();
            assert!((exact - closed).abs() / closed <= 1e-5, "{p:?} {s:?} P({n}) {exact} vs {closed}");
            let pc = purity_closed_coherent(&p, &s, n).unwrap();
            assert_abs_diff_eq!(d.purity_exact(n).unwrap(), pc, epsilon = 1e-5);
        }
    }
}

#[test]
fn xi_and_position_do_not_matter() {
    for params in [fig1(), fig2()] {
        let s = fig_state();
        let rho = initial_density(&s).unwrap();
        let k = spectral_kernel(&params, &s).unwrap();
        let mut coeffs = coefficients(&params);
        coeffs.xi_tau += 1.7;
        let shifted_xi = spectral_kernel_with_coefficients(&params, &coeffs, &s).unwrap();

        let moved = GaussianParticleState { x0: 2.3, dx0: 9.0, ..s };
        let rho_moved = initial_density(&moved).unwrap();

        let base = Distiller::new(&k, &rho);
        let xi = Distiller::new(&shifted_xi, &rho);
        let pos = Distiller::new(&k, &rho_moved);
        for n in [1, 10, 40] {
            let (p, pi) = (base.survival_exact(n).unwrap(), base.purity_exact(n).unwrap());
            assert_abs_diff_eq!(xi.survival_exact(n).unwrap(), p, epsilon = 1e-10);
            assert_abs_diff_eq!(xi.purity_exact(n).unwrap(), pi, epsilon = 1e-10);
            assert_abs_diff_eq!(pos.survival_exact(n).unwrap(), p, epsilon = 1e-8);
            assert_abs_diff_eq!(pos.purity_exact(n).unwrap(), pi, epsilon = 1e-8);
        }
    }
}

#[test]
fn pure_state_stays_pure() {
    let s = GaussianParticleState::new(0.1, 0.4, 0.2, 2.5, 1.0).unwrap();
    let rho = initial_density(&s).unwrap();
    let k = kernel_coherent(&fig1(), &s).unwrap();
    let d = Distiller::new(&k, &rho);
    for n in [0, 1, 5, 30] {
        assert_abs_diff_eq!(d.purity_exact(n).unwrap(), 1.0, epsilon = 1e-6);
        assert_abs_diff_eq!(d.purity_asymptotic(n.max(1)).unwrap().value, 1.0, epsilon = 1e-6);
    }
}

#[test]
fn number_state_formula_converges() {
    let (p, s) = (fig2(), fig_state());
    let k = kernel_number1(&p, &s).unwrap();
    let rho = initial_density(&s).unwrap();
    let d = Distiller::new(&k, &rho);
    let gap = |n: u32| {
        let exact = d.survival_exact(n).unwrap();
        (exact / survival_asym_number1(&p, &s, n).unwrap() - 1.0).abs()
    };
    assert!(gap(10) < 0.05);
    assert!(gap(50) < 0.01);
    assert!(gap(50) < gap(10));
    assert!((d.purity_exact(50).unwrap() - purity_asym_closed(&p, &s, 50).unwrap()).abs() < 1e-3);
    // generic engine reproduces the model formula at leading order
    let a = d.survival_asymptotic(10).unwrap();
    assert_abs_diff_eq!(a.leading, 0.14886, epsilon = 1e-4);
    assert_abs_diff_eq!(d.purity_asymptotic(10).unwrap().value, 0.98577, epsilon = 1e-4);
}

#[test]
fn asymptotic_errors_shrink_along_a_ladder() {
    for params in [fig1(), fig2()] {
        let s = fig_state();
        let k = spectral_kernel(&params, &s).unwrap();
        let rho = initial_density(&s).unwrap();
        let d = Distiller::new(&k, &rho);
        let errors: Vec<(f64, f64)> = [5, 10, 20, 40, 80, 160]
            .iter()
            .map(|&n| {
                let p = d.survival_exact(n).unwrap();
                let pi = d.purity_exact(n).unwrap();
                (
                    (d.survival_asymptotic(n).unwrap().value / p - 1.0).abs(),
                    (d.purity_asymptotic(n).unwrap().value - pi).abs(),
                )
            })
            .collect();
        for w in errors.windows(2) {
            assert!(w[1].0 < w[0].0, "{:?}: survival {errors:?}", params.cavity);
            assert!(w[1].1 < w[0].1, "{:?}: purity {errors:?}", params.cavity);
        }
    }
}

#[test]
fn purity_follows_one_over_n() {
    for params in [fig1(), fig2()] {
        let s = fig_state();
        let k = spectral_kernel(&params, &s).unwrap();
        let rho = initial_density(&s).unwrap();
        let d = Distiller::new(&k, &rho);
        let n = 200;
        let law = 1.0 - purity_asym_closed(&params, &s, n).unwrap();
        let measured = 1.0 - d.purity_exact(n).unwrap();
        assert!((measured / law - 1.0).abs() < 0.02, "{:?}: {measured} vs {law}", params.cavity);
    }
}

#[test]
fn optimization_criterion() {
    let s = fig_state();
    // |λ_{p*}| = 1: P(N)·√N settles to a positive constant
    for gamma in [0.0, PI] {
        let p = ModelParams::coherent(FIG_OMEGA_TAU, FIG_G_TILDE, 1.0, gamma).unwrap();
        let k = kernel_coherent(&p, &s).unwrap();
        let rho = initial_density(&s).unwrap();
        let d = Distiller::new(&k, &rho);
        let scaled: Vec<f64> = [50, 100, 200, 400]
            .iter()
            .map(|&n| d.survival_exact(n).unwrap() * (n as f64).sqrt())
            .collect();
        assert!(scaled.iter().all(|&v| v > 0.1));
        let steps: Vec<f64> = scaled.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
        assert!(steps.windows(2).all(|w| w[1] < w[0]), "{scaled:?}");
    }
    // |λ_{p*}| < 1: ln P(N)/N tends to −4|α|² sin²γ sin²(ωτ/2)
    for gamma in [PI / 2.0, 1.0] {
        let p = ModelParams::coherent(FIG_OMEGA_TAU, FIG_G_TILDE, 1.0, gamma).unwrap();
        let k = kernel_coherent(&p, &s).unwrap();
        let rho = initial_density(&s).unwrap();
        let d = Distiller::new(&k, &rho);
        let rate = peak_decay_rate(&p);
        let gaps: Vec<f64> = [25, 100, 400]
            .iter()
            .map(|&n| (d.survival(n).unwrap().ln_probability() / n as f64 + rate).abs())
            .collect();
        assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
        assert!(gaps[2] < 0.01);
    }
}

#[test]
fn decay_factor_for_quarter_phase() {
    let s = fig_state();
    let p = ModelParams::coherent(FIG_OMEGA_TAU, FIG_G_TILDE, 1.0, PI / 2.0).unwrap();
    assert_abs_diff_eq!(peak_decay_rate(&p), 0.585_786, epsilon = 1e-6);
    let k = kernel_coherent(&p, &s).unwrap();
    let rho = initial_density(&s).unwrap();
    let d = Distiller::new(&k, &rho);
    for n in [100, 300] {
        // remove the algebraic prefactor, leaving e^{-Λ*}
        let a = 2.0 * coefficients(&p).g_tau_mod_sq * 0.04;
        let ratio = d.survival_exact(n + 1).unwrap() / d.survival_exact(n).unwrap();
        let algebraic = ((1.0 + a * n as f64) / (1.0 + a * (n + 1) as f64)).sqrt();
        assert!((ratio / algebraic - (-0.585_786_437_6f64).exp()).abs() < 1e-4);
    }
}

#[test]
fn survival_contracts_monotonically() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut cases = vec![(fig1(), fig_state()), (fig2(), fig_state())];
    cases.extend((0..3).map(|_| random_coherent(&mut rng)));
    for (p, s) in cases {
        let k = spectral_kernel(&p, &s).unwrap();
        let rho = initial_density(&s).unwrap();
        let ns: Vec<u32> = (0..=25).collect();
        let series = run_series(&k, &rho, &ns).unwrap();
        let ps: Vec<f64> = series.ok_rows().map(|r| r.p_exact).collect();
        assert_eq!(ps.len(), ns.len());
        assert!(ps.windows(2).all(|w| w[1] <= w[0] + 1e-9), "{p:?}: {ps:?}");
    }
}

#[test]
fn fig2_series_purity_agreement() {
    let (p, s) = (fig2(), fig_state());
    let k = kernel_number1(&p, &s).unwrap();
    let rho = initial_density(&s).unwrap();
    let series = run_series(&k, &rho, &[10, 40]).unwrap();
    let rows: Vec<_> = series.ok_rows().collect();
    let rel = |r: &SeriesRow| (r.pi_exact - r.pi_asym.unwrap()).abs() / r.pi_exact;
    assert!(rel(rows[0]) < 0.05);
    assert!(rel(rows[1]) < 0.01);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn density_hermitian_with_real_positive_diagonal(
        p0 in -1.0f64..1.0, x0 in -3.0f64..3.0, dp0 in 0.05f64..1.0,
        pi0 in 0.2f64..1.0, stretch in 1.0f64..4.0,
        a in -2.0f64..2.0, b in -2.0f64..2.0,
    ) {
        let dx0 = GaussianParticleState::min_dx0(dp0, pi0) * stretch;
        let s = GaussianParticleState::new(p0, x0, dp0, dx0, pi0).unwrap();
        let rho = initial_density(&s).unwrap();
        let d = rho.eval(a, b) - rho.eval(b, a).conj();
        prop_assert!(d.norm() <= 1e-12);
        prop_assert!(rho.eval(a, a).re >= -1e-12);
        prop_assert!(rho.eval(a, a).im.abs() <= 1e-12);
    }

    #[test]
    fn coefficient_modulus_consistent(omega_tau in 0.01f64..6.2, g_tilde in -8.0f64..8.0) {
        let p = ModelParams::number_one(omega_tau, g_tilde).unwrap();
        let c = coefficients(&p);
        prop_assert!((c.g_tau.norm_sqr() - c.g_tau_mod_sq).abs() <= 1e-12 * (1.0 + c.g_tau_mod_sq));
    }
}
