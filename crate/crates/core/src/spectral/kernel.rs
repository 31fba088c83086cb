use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quadrature::{self, Box2, Tolerance};

/// Slack allowed on `|λ| ≤ 1` when a kernel is checked at construction.
pub const CONTRACTION_SLACK: f64 = 1e-12;

/// Number of equispaced points sampled by the construction-time checks.
const CHECK_SAMPLES: usize = 257;

/// Truncation of a density's support, in units of its `support_width`.
pub const SUPPORT_WIDTHS: f64 = 8.0;

type EigenvalueFn = dyn Fn(f64) -> Complex64 + Send + Sync;
type MatrixElementFn = dyn Fn(f64, f64) -> Complex64 + Send + Sync;

/// Eigenvalue function `E ↦ λ_E` of a projected evolution operator that is
/// diagonal in an orthonormal basis `|E⟩`, together with the interval in which
/// its peak is searched and its integrals are truncated.
#[derive(Clone)]
pub struct SpectralKernel {
    lambda: Arc<EigenvalueFn>,
    bracket: (f64, f64),
    width_hint: f64,
}

impl fmt::Debug for SpectralKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralKernel")
            .field("bracket", &self.bracket)
            .field("width_hint", &self.width_hint)
            .finish_non_exhaustive()
    }
}

impl SpectralKernel {
    /// Builds a kernel and checks, on a uniform sample of the bracket, that
    /// `λ` is finite and a contraction.
    pub fn new<F>(lambda: F, bracket: (f64, f64), width_hint: f64) -> Result<Self>
    where
        F: Fn(f64) -> Complex64 + Send + Sync + 'static,
    {
        let (lo, hi) = bracket;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidKernel(format!("bracket [{lo}, {hi}] is not a finite interval")));
        }
        if !(width_hint > 0.0 && width_hint.is_finite()) {
            return Err(Error::InvalidKernel(format!("width hint must be positive, got {width_hint}")));
        }
        let kernel = Self {
            lambda: Arc::new(lambda),
            bracket,
            width_hint,
        };
        for i in 0..CHECK_SAMPLES {
            let e = lo + (hi - lo) * i as f64 / (CHECK_SAMPLES - 1) as f64;
            let l = kernel.eigenvalue(e);
            if !(l.re.is_finite() && l.im.is_finite()) {
                return Err(Error::InvalidKernel(format!("eigenvalue not finite at E = {e}")));
            }
            if l.norm() > 1.0 + CONTRACTION_SLACK {
                return Err(Error::InvalidKernel(format!(
                    "|lambda| = {} exceeds 1 at E = {e}; not a contraction",
                    l.norm()
                )));
            }
        }
        Ok(kernel)
    }

    pub fn eigenvalue(&self, e: f64) -> Complex64 {
        (self.lambda)(e)
    }

    pub fn modulus_sq(&self, e: f64) -> f64 {
        self.eigenvalue(e).norm_sqr()
    }

    /// `Λ(E) = −ln|λ_E|²`, `+∞` at zeros of the kernel.
    pub fn decay_rate(&self, e: f64) -> f64 {
        let m = self.modulus_sq(e);
        if m > 0.0 {
            -m.ln()
        } else {
            f64::INFINITY
        }
    }

    /// `|λ_E|^{2n}`, evaluated directly so that kernel zeros give 0.
    pub fn filter_weight(&self, e: f64, n: u32) -> f64 {
        powu(self.modulus_sq(e), n)
    }

    /// `λ_E^n` as `|λ|^n e^{i n arg λ}`.
    pub fn power(&self, e: f64, n: u32) -> Complex64 {
        let l = self.eigenvalue(e);
        Complex64::from_polar(powu(l.norm(), n), n as f64 * l.arg())
    }

    pub fn bracket(&self) -> (f64, f64) {
        self.bracket
    }

    pub fn width_hint(&self) -> f64 {
        self.width_hint
    }

    /// Same kernel multiplied by the pure phase `e^{iθ(E)}`.
    pub fn with_phase<P>(&self, theta: P) -> Self
    where
        P: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let inner = Arc::clone(&self.lambda);
        Self {
            lambda: Arc::new(move |e| inner(e) * Complex64::from_polar(1.0, theta(e))),
            bracket: self.bracket,
            width_hint: self.width_hint,
        }
    }
}

pub(crate) fn powu(x: f64, n: u32) -> f64 {
    match i32::try_from(n) {
        Ok(k) => x.powi(k),
        Err(_) => x.powf(n as f64),
    }
}

/// Density-matrix kernel `ρ(E, E′) = ⟨E|ρ̂|E′⟩` in the eigenbasis of the
/// spectral kernel. `support_center` and `support_width` describe where the
/// diagonal lives; integrals over the density are truncated to
/// `support_center ± SUPPORT_WIDTHS · support_width`.
#[derive(Clone)]
pub struct DensityKernel {
    rho: Arc<MatrixElementFn>,
    support_center: f64,
    support_width: f64,
}

impl fmt::Debug for DensityKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DensityKernel")
            .field("support_center", &self.support_center)
            .field("support_width", &self.support_width)
            .finish_non_exhaustive()
    }
}

impl DensityKernel {
    pub fn new<F>(rho: F, support_center: f64, support_width: f64) -> Result<Self>
    where
        F: Fn(f64, f64) -> Complex64 + Send + Sync + 'static,
    {
        if !support_center.is_finite() || !(support_width > 0.0 && support_width.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "density support ({support_center}, {support_width}) must be finite with positive width"
            )));
        }
        Ok(Self {
            rho: Arc::new(rho),
            support_center,
            support_width,
        })
    }

    pub fn eval(&self, e: f64, e_prime: f64) -> Complex64 {
        (self.rho)(e, e_prime)
    }

    /// Real part of `ρ(E, E)`.
    pub fn diagonal(&self, e: f64) -> f64 {
        self.eval(e, e).re
    }

    pub fn support_center(&self) -> f64 {
        self.support_center
    }

    pub fn support_width(&self) -> f64 {
        self.support_width
    }

    pub fn window(&self) -> (f64, f64) {
        let half = SUPPORT_WIDTHS * self.support_width;
        (self.support_center - half, self.support_center + half)
    }

    pub(crate) fn breakpoints(&self) -> Vec<f64> {
        [-4.0, -2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0, 4.0]
            .iter()
            .map(|k| self.support_center + k * self.support_width)
            .collect()
    }

    pub fn trace(&self, tol: Tolerance) -> Result<f64> {
        let (lo, hi) = self.window();
        quadrature::integrate_1d_with_breakpoints(|e| self.diagonal(e), lo, hi, &self.breakpoints(), tol)
            .map(|r| r.value)
    }

    /// `Tr ρ̂² = ∬ |ρ(E, E′)|² dE dE′`.
    pub fn purity(&self, tol: Tolerance) -> Result<f64> {
        let (lo, hi) = self.window();
        let breaks = self.breakpoints();
        quadrature::integrate_2d_with_breakpoints(
            |e, ep| self.eval(e, ep).norm_sqr(),
            Box2::square(lo, hi),
            &breaks,
            &breaks,
            tol,
        )
        .map(|r| r.value)
    }
}
