use std::f64::consts::PI;

use approx::assert_abs_diff_eq;
use num_complex::Complex64;
use qdistill_core::quadrature::Tolerance;
use qdistill_core::spectral::*;
use qdistill_core::Error;

fn gaussian_kernel(center: f64, a: f64) -> SpectralKernel {
    // |λ|² = e^{-a(E-c)²}, Λ = a(E-c)², Λ'' = 2a
    SpectralKernel::new(
        move |e| Complex64::new((-a * (e - center).powi(2) / 2.0).exp(), 0.0),
        (-20.0, 20.0),
        1.0 / (2.0 * a).sqrt(),
    )
    .unwrap()
}

fn flat_density(c: f64, width: f64) -> DensityKernel {
    DensityKernel::new(move |_, _| Complex64::new(c, 0.0), 0.0, width).unwrap()
}

/// Mixed Gaussian state written directly in its (p, p') form, with a real
/// off-diagonal envelope of purity `pi0`.
fn mixed_gaussian(center: f64, sigma: f64, pi0: f64) -> DensityKernel {
    let norm = 1.0 / (2.0 * PI * sigma * sigma).sqrt();
    DensityKernel::new(
        move |a, b| {
            let s = a + b - 2.0 * center;
            let d = a - b;
            Complex64::new(
                norm * (-s * s / (8.0 * sigma * sigma) - d * d / (8.0 * sigma * sigma * pi0 * pi0)).exp(),
                0.0,
            )
        },
        center,
        sigma / pi0,
    )
    .unwrap()
}

#[test]
fn survival_at_zero_measurements_is_trace() {
    let k = gaussian_kernel(0.3, 4.0);
    let rho = mixed_gaussian(0.1, 0.5, 0.6);
    assert_abs_diff_eq!(survival_exact(&k, &rho, 0).unwrap(), 1.0, epsilon = 1e-9);
    assert_abs_diff_eq!(purity_exact(&k, &rho, 0).unwrap(), 0.6, epsilon = 1e-8);
}

#[test]
fn unimodular_kernel_filters_nothing() {
    // pure phase: no peak, integration falls back to the density support
    let k = SpectralKernel::new(|e| Complex64::from_polar(1.0, 3.0 * e * e), (-10.0, 10.0), 1.0).unwrap();
    let rho = mixed_gaussian(0.2, 0.3, 0.8);
    let d = Distiller::new(&k, &rho);
    assert!(d.laplace().is_err());
    for n in [0, 1, 5, 50] {
        assert_abs_diff_eq!(d.survival_exact(n).unwrap(), 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(d.purity_exact(n).unwrap(), 0.8, epsilon = 1e-8);
    }
}

#[test]
fn laplace_self_test_on_exact_gaussian() {
    // With a flat diagonal, g'' = 0 and the expansion is exact.
    let k = gaussian_kernel(0.7, 3.0);
    let rho = flat_density(0.05, 50.0);
    let d = Distiller::new(&k, &rho);
    let data = *d.laplace().unwrap();
    assert_abs_diff_eq!(data.e_star, 0.7, epsilon = 1e-9);
    assert_abs_diff_eq!(data.curvature, 6.0, epsilon = 1e-7);
    for n in [5, 20] {
        let exact = d.survival_exact(n).unwrap();
        let asym = d.survival_asymptotic(n).unwrap();
        assert_abs_diff_eq!(asym.value, asym.leading, epsilon = 1e-12);
        assert_abs_diff_eq!(asym.value, data.filter_mass(n).unwrap() * 0.05, epsilon = 1e-12);
        assert_abs_diff_eq!(asym.value, exact, epsilon = 1e-6);
    }
}

#[test]
fn asymptotics_need_a_valid_peak() {
    let data = LaplaceData::new(0.0, 0.0, -1.0);
    assert!(!data.valid);
    let rho = mixed_gaussian(0.0, 1.0, 1.0);
    assert!(matches!(survival_asymptotic(&data, &rho, 3), Err(Error::InvalidLaplace)));
    assert!(matches!(purity_asymptotic(&data, &rho, 3), Err(Error::InvalidLaplace)));
}

#[test]
fn purity_asymptotic_gaussian_coefficient() {
    // For a Gaussian density of spread σ and purity Π₀ the bracket
    // (g g'' - h_yy)/g² equals (1/Π₀² - 1)/(2σ²) wherever the peak sits.
    let k = gaussian_kernel(0.35, 10.0);
    let (sigma, pi0) = (0.4, 0.55);
    let rho = mixed_gaussian(-0.1, sigma, pi0);
    let data = analyze(&k).unwrap();
    for n in [1, 10, 100] {
        let dn2 = 1.0 / (n as f64 * data.curvature);
        let expected = 1.0 - dn2 * (1.0 / (pi0 * pi0) - 1.0) / (2.0 * sigma * sigma);
        let got = purity_asymptotic(&data, &rho, n).unwrap().value;
        assert_abs_diff_eq!(got, expected, epsilon = 1e-8);
    }
    let pure = mixed_gaussian(-0.1, sigma, 1.0);
    assert_abs_diff_eq!(purity_asymptotic(&data, &pure, 7).unwrap().value, 1.0, epsilon = 1e-9);
}

#[test]
fn phase_invariance() {
    let k = gaussian_kernel(0.2, 5.0);
    let twisted = k.with_phase(|e| 3.0 * e * e + (5.0 * e).sin());
    let rho = mixed_gaussian(0.0, 0.3, 0.7);
    for n in [1, 4, 30] {
        let a = Distiller::new(&k, &rho);
        let b = Distiller::new(&twisted, &rho);
        assert_abs_diff_eq!(a.survival_exact(n).unwrap(), b.survival_exact(n).unwrap(), epsilon = 1e-10);
        assert_abs_diff_eq!(a.purity_exact(n).unwrap(), b.purity_exact(n).unwrap(), epsilon = 1e-10);
    }
}

#[test]
fn evolve_density_identity_and_consistency() {
    let k = gaussian_kernel(0.2, 5.0).with_phase(|e| 2.0 * e);
    let rho = mixed_gaussian(0.0, 0.3, 0.7);
    let d = Distiller::new(&k, &rho);

    let same = d.evolve_density(0).unwrap();
    for (a, b) in [(0.1, 0.2), (-0.3, 0.05)] {
        assert_eq!(same.eval(a, b), rho.eval(a, b));
    }

    let tol = Tolerance::default();
    for n in [1, 3, 25] {
        let evolved = d.evolve_density(n).unwrap();
        assert_abs_diff_eq!(evolved.trace(tol).unwrap(), 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(evolved.purity(tol).unwrap(), d.purity_exact(n).unwrap(), epsilon = 1e-8);
        let (a, b) = (0.13, 0.27);
        assert!((evolved.eval(a, b) - evolved.eval(b, a).conj()).norm() < 1e-14);
    }
}

#[test]
fn evolved_diagonal_narrows_like_gaussian_product() {
    // Gaussian filter × Gaussian diagonal: variance 1/(1/σ² + N a), mean
    // pulled toward the peak. Oracle from the product of two normals.
    let (c, a) = (0.2, 5.0);
    let k = gaussian_kernel(c, a);
    let (mu, sigma) = (0.0, 0.3);
    let rho = mixed_gaussian(mu, sigma, 0.7);
    let d = Distiller::new(&k, &rho);
    let mut previous = f64::INFINITY;
    for n in [1, 4, 16, 64, 256] {
        let evolved = d.evolve_density(n).unwrap();
        let precision = 1.0 / (sigma * sigma) + 2.0 * n as f64 * a;
        let mean = (mu / (sigma * sigma) + 2.0 * n as f64 * a * c) / precision;
        assert_abs_diff_eq!(evolved.support_width(), precision.powf(-0.5), epsilon = 1e-7);
        assert_abs_diff_eq!(evolved.support_center(), mean, epsilon = 1e-8);
        assert!(evolved.support_width() < previous);
        previous = evolved.support_width();
        let dn = delta_n(d.laplace().unwrap(), n).unwrap();
        assert!(evolved.support_width() <= 1.0001 * dn);
    }
}

#[test]
fn tiny_survival_is_rejected_for_normalization() {
    // |λ| ≤ e^{-1} everywhere: P(N) ≲ e^{-2N}
    let k = SpectralKernel::new(
        |e| Complex64::new((-1.0 - e * e).exp(), 0.0),
        (-5.0, 5.0),
        0.5,
    )
    .unwrap();
    let rho = mixed_gaussian(0.0, 0.5, 0.9);
    let d = Distiller::new(&k, &rho);
    // still computable in log form
    let s = d.survival(400).unwrap();
    assert!(s.ln_probability() < -790.0);
    assert!(matches!(d.purity_exact(400), Err(Error::DegenerateProbability { .. })));
    assert!(matches!(d.evolve_density(400), Err(Error::DegenerateProbability { .. })));
    // P(N) = e^{-2N} / √(1 + 4Nσ²) exactly for this pair
    let closed = |n: u32| (-2.0 * n as f64).exp() / (1.0 + n as f64).sqrt();
    for n in [1, 30, 200] {
        let p = d.survival_exact(n).unwrap();
        assert!((p / closed(n) - 1.0).abs() < 1e-9, "N = {n}: {p} vs {}", closed(n));
    }
}

#[test]
fn series_rows() {
    let k = gaussian_kernel(0.2, 5.0);
    let rho = mixed_gaussian(0.0, 0.3, 0.7);
    let only_zero = run_series(&k, &rho, &[0]).unwrap();
    assert_eq!(only_zero.rows.len(), 1);
    let row = only_zero.rows[0].as_ref().unwrap();
    assert_abs_diff_eq!(row.p_exact, 1.0, epsilon = 1e-9);
    assert_abs_diff_eq!(row.pi_exact, 0.7, epsilon = 1e-8);
    assert!(row.p_asym.is_none() && row.delta_n.is_none());

    let ns: Vec<u32> = (1..=30).collect();
    let series = run_series(&k, &rho, &ns).unwrap();
    let rows: Vec<_> = series.ok_rows().collect();
    assert_eq!(rows.len(), 30);
    for pair in rows.windows(2) {
        assert!(pair[1].p_exact <= pair[0].p_exact + 1e-9);
        assert!(pair[1].delta_n.unwrap() < pair[0].delta_n.unwrap());
    }
    for r in &rows {
        assert!(r.p_exact > 0.0 && r.p_exact <= 1.0 + 1e-9);
        assert!(r.pi_exact > 0.0 && r.pi_exact <= 1.0 + 1e-9);
    }

    assert!(run_series(&k, &rho, &[]).is_err());
    assert!(run_series(&k, &rho, &[3, 2]).is_err());
    assert!(run_series(&k, &rho, &[2, 2]).is_err());
}

#[test]
fn series_records_row_errors() {
    let flat = SpectralKernel::new(|_| Complex64::new(0.9, 0.0), (-3.0, 3.0), 0.5).unwrap();
    let rho = mixed_gaussian(0.0, 0.3, 0.7);
    let series = run_series(&flat, &rho, &[0, 1, 2]).unwrap();
    assert!(series.rows[0].is_ok());
    let err = series.first_error().unwrap();
    assert_eq!(err.n, 1);
    assert!(matches!(err.error, Error::DegenerateMaximum { .. }));
}
