//! Survival probability and purity after `N` repeated measurements, both by
//! direct quadrature over the spectrum and through the Laplace expansion
//! around the filtered peak.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quadrature::{self, second_derivative, stencil_step, Box2, Tolerance};

use super::kernel::{DensityKernel, SpectralKernel};
use super::laplace::{analyze, delta_n, LaplaceData};

/// Truncation half-width of the integration window, in filter or support widths.
pub const WINDOW_WIDTHS: f64 = 8.0;

/// Below this survival probability the conditioned state cannot be normalized.
pub const MIN_PROBABILITY: f64 = 1e-300;

/// An asymptotic estimate. `leading` is the zeroth-order term (`f(N)·g(0)`
/// for the survival probability, 1 for the purity) and `value` includes the
/// `Δ_N²` correction. `low_n` marks estimates whose filter width `Δ_N` is
/// still wider than the initial density, where the expansion is unreliable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Asymptotic {
    pub value: f64,
    pub leading: f64,
    pub low_n: bool,
}

/// Survival probability stored as `scaled · e^{−NΛ(E*)}` so that integrals
/// stay O(1) when `|λ_{E*}| < 1` and `P(N)` itself is astronomically small.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Survival {
    pub n: u32,
    pub scaled: f64,
    pub log_scale: f64,
}

impl Survival {
    pub fn probability(&self) -> f64 {
        self.scaled * (-self.log_scale).exp()
    }

    pub fn ln_probability(&self) -> f64 {
        self.scaled.ln() - self.log_scale
    }
}

/// A spectral kernel paired with an initial density, plus the peak analysis
/// of the kernel, which fixes the integration window and the breakpoints.
pub struct Distiller<'a> {
    kernel: &'a SpectralKernel,
    rho0: &'a DensityKernel,
    tol: Tolerance,
    laplace: Result<LaplaceData>,
}

impl<'a> Distiller<'a> {
    pub fn new(kernel: &'a SpectralKernel, rho0: &'a DensityKernel) -> Self {
        Self::with_tolerance(kernel, rho0, Tolerance::default())
    }

    pub fn with_tolerance(kernel: &'a SpectralKernel, rho0: &'a DensityKernel, tol: Tolerance) -> Self {
        Self {
            kernel,
            rho0,
            tol,
            laplace: analyze(kernel),
        }
    }

    pub fn kernel(&self) -> &SpectralKernel {
        self.kernel
    }

    pub fn initial_density(&self) -> &DensityKernel {
        self.rho0
    }

    pub fn tolerance(&self) -> Tolerance {
        self.tol
    }

    /// Peak analysis of the kernel, or the reason it failed.
    pub fn laplace(&self) -> Result<&LaplaceData> {
        self.laplace.as_ref().map_err(Clone::clone)
    }

    /// `NΛ(E*)` when a peak exists; exact integrals are carried relative to it.
    fn log_scale(&self, n: u32) -> f64 {
        match &self.laplace {
            Ok(d) if n > 0 => n as f64 * d.big_lambda_star,
            _ => 0.0,
        }
    }

    /// Hull of the filter window around `E*` and the density support,
    /// clipped to the kernel bracket, with breakpoints at the scales where
    /// the integrand varies.
    fn window(&self, n: u32) -> Result<((f64, f64), Vec<f64>)> {
        let (mut lo, mut hi) = self.rho0.window();
        let mut breaks = self.rho0.breakpoints();
        if let Ok(d) = &self.laplace {
            let w = (1.0 / d.curvature.sqrt()).max(self.kernel.width_hint());
            lo = lo.min(d.e_star - WINDOW_WIDTHS * w);
            hi = hi.max(d.e_star + WINDOW_WIDTHS * w);
            let dn = 1.0 / (n.max(1) as f64 * d.curvature).sqrt();
            breaks.extend(
                [-16.0, -8.0, -4.0, -2.0, -1.0, 0.0, 1.0, 2.0, 4.0, 8.0, 16.0]
                    .iter()
                    .map(|k| d.e_star + k * dn),
            );
        }
        let (blo, bhi) = self.kernel.bracket();
        lo = lo.max(blo);
        hi = hi.min(bhi);
        if !(lo < hi) {
            return Err(Error::InvalidArgument(
                "density support does not overlap the kernel bracket".into(),
            ));
        }
        Ok(((lo, hi), breaks))
    }

    /// `|λ_E|^{2N} e^{NΛ(E*)}`.
    fn scaled_weight(&self, e: f64, n: u32, log_scale: f64) -> f64 {
        if log_scale == 0.0 {
            return self.kernel.filter_weight(e, n);
        }
        let m = self.kernel.modulus_sq(e);
        if m > 0.0 {
            (n as f64 * m.ln() + log_scale).exp()
        } else {
            0.0
        }
    }

    pub fn survival(&self, n: u32) -> Result<Survival> {
        let log_scale = self.log_scale(n);
        let ((lo, hi), breaks) = self.window(n)?;
        let r = quadrature::integrate_1d_with_breakpoints(
            |e| self.scaled_weight(e, n, log_scale) * self.rho0.diagonal(e),
            lo,
            hi,
            &breaks,
            self.tol,
        )?;
        Ok(Survival {
            n,
            scaled: r.value,
            log_scale,
        })
    }

    /// `P(N) = ∫ dE |λ_E|^{2N} ρ(E, E)`.
    pub fn survival_exact(&self, n: u32) -> Result<f64> {
        self.survival(n).map(|s| s.probability())
    }

    /// `Π(N) = ∬ |λ_E|^{2N} |λ_E′|^{2N} |ρ(E, E′)|² / P(N)²`.
    pub fn purity_exact(&self, n: u32) -> Result<f64> {
        let s = self.survival(n)?;
        self.purity_given(&s)
    }

    /// Purity normalized by an already computed survival probability.
    pub fn purity_given(&self, survival: &Survival) -> Result<f64> {
        check_probability(survival)?;
        let n = survival.n;
        let ((lo, hi), breaks) = self.window(n)?;
        let weight = |e: f64| self.scaled_weight(e, n, survival.log_scale);
        let r = quadrature::integrate_2d_with_breakpoints(
            |e, ep| weight(e) * weight(ep) * self.rho0.eval(e, ep).norm_sqr(),
            Box2::square(lo, hi),
            &breaks,
            &breaks,
            self.tol,
        )?;
        Ok(r.value / (survival.scaled * survival.scaled))
    }

    pub fn survival_asymptotic(&self, n: u32) -> Result<Asymptotic> {
        survival_asymptotic(self.laplace()?, self.rho0, n)
    }

    pub fn purity_asymptotic(&self, n: u32) -> Result<Asymptotic> {
        purity_asymptotic(self.laplace()?, self.rho0, n)
    }

    /// Conditioned state after `N` successful measurements,
    /// `ρ_N(E, E′) = λ_E^N ρ(E, E′) conj(λ_E′)^N / P(N)`, evaluated lazily.
    /// The support descriptors are the mean and standard deviation of the
    /// evolved diagonal.
    pub fn evolve_density(&self, n: u32) -> Result<DensityKernel> {
        if n == 0 {
            return Ok(self.rho0.clone());
        }
        let s = self.survival(n)?;
        check_probability(&s)?;
        let ((lo, hi), breaks) = self.window(n)?;
        let moment = |k: i32| {
            quadrature::integrate_1d_with_breakpoints(
                |e| e.powi(k) * self.scaled_weight(e, n, s.log_scale) * self.rho0.diagonal(e),
                lo,
                hi,
                &breaks,
                self.tol,
            )
            .map(|r| r.value / s.scaled)
        };
        let mean = moment(1)?;
        let variance = (moment(2)? - mean * mean).max(0.0);
        let width = variance.sqrt().max(f64::MIN_POSITIVE.sqrt());

        let kernel = self.kernel.clone();
        let rho0 = self.rho0.clone();
        let half_log_scale = 0.5 * s.log_scale;
        let norm = 1.0 / s.scaled;
        let amplitude = move |e: f64| -> Complex64 {
            let l = kernel.eigenvalue(e);
            let m = l.norm_sqr();
            let modulus = if m > 0.0 {
                (0.5 * n as f64 * m.ln() + half_log_scale).exp()
            } else {
                0.0
            };
            Complex64::from_polar(modulus, n as f64 * l.arg())
        };
        let amplitude = Arc::new(amplitude);
        DensityKernel::new(
            move |e, ep| amplitude(e) * rho0.eval(e, ep) * amplitude(ep).conj() * norm,
            mean,
            width,
        )
    }
}

fn check_probability(s: &Survival) -> Result<()> {
    if !(s.scaled > 0.0) || s.ln_probability() < MIN_PROBABILITY.ln() {
        return Err(Error::DegenerateProbability {
            probability: s.probability(),
        });
    }
    Ok(())
}

/// `g(0)` and `g″(0)` of `g(y) = ρ(E* + y, E* + y)`.
fn diagonal_jet(rho0: &DensityKernel, e_star: f64) -> Result<(f64, f64)> {
    let g0 = rho0.diagonal(e_star);
    if !(g0 > 0.0) {
        return Err(Error::DegenerateProbability { probability: g0 });
    }
    let h = stencil_step(rho0.support_width());
    let g2 = second_derivative(|y| rho0.diagonal(e_star + y), 0.0, h)?;
    Ok((g0, g2))
}

/// `P(N) ≈ f(N) (g(0) + ½ g″(0) Δ_N²)`.
pub fn survival_asymptotic(data: &LaplaceData, rho0: &DensityKernel, n: u32) -> Result<Asymptotic> {
    let dn = delta_n(data, n)?;
    let f = (2.0 * PI).sqrt() * dn * (-(n as f64) * data.big_lambda_star).exp();
    let (g0, g2) = diagonal_jet(rho0, data.e_star)?;
    Ok(Asymptotic {
        value: f * (g0 + 0.5 * g2 * dn * dn),
        leading: f * g0,
        low_n: dn >= rho0.support_width(),
    })
}

/// `Π(N) ≈ 1 − Δ_N² (g(0) g″(0) − h_yy(0, 0)) / g(0)²` with
/// `h(y, y′) = |ρ(E* + y, E* + y′)|²`.
pub fn purity_asymptotic(data: &LaplaceData, rho0: &DensityKernel, n: u32) -> Result<Asymptotic> {
    let dn = delta_n(data, n)?;
    let (g0, g2) = diagonal_jet(rho0, data.e_star)?;
    let e_star = data.e_star;
    let h = stencil_step(rho0.support_width());
    let h_yy = second_derivative(|y| rho0.eval(e_star + y, e_star).norm_sqr(), 0.0, h)?;
    Ok(Asymptotic {
        value: 1.0 - dn * dn * (g0 * g2 - h_yy) / (g0 * g0),
        leading: 1.0,
        low_n: dn >= rho0.support_width(),
    })
}

pub fn survival_exact(kernel: &SpectralKernel, rho0: &DensityKernel, n: u32) -> Result<f64> {
    Distiller::new(kernel, rho0).survival_exact(n)
}

pub fn purity_exact(kernel: &SpectralKernel, rho0: &DensityKernel, n: u32) -> Result<f64> {
    Distiller::new(kernel, rho0).purity_exact(n)
}

pub fn evolve_density(kernel: &SpectralKernel, rho0: &DensityKernel, n: u32) -> Result<DensityKernel> {
    Distiller::new(kernel, rho0).evolve_density(n)
}
