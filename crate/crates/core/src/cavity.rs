//! Free particle of mass `m` coupled through its momentum to one cavity mode,
//! `H = p²/2m + ħω(a†a + ½) + g p (a† + a)`, with the cavity projected back
//! onto a fixed state every `τ`.
//!
//! Everything here is dimensionless with `ħ = m = ω = 1`: momenta in units of
//! `√(mħω)`, positions in `√(ħ/mω)`, the coupling as `g̃ = √(m/ħω)·g` and the
//! measurement interval as `ωτ`. In these units `g_τ = g̃(1 − e^{iωτ})` and
//! `G² = |g_τ|² = 4g̃² sin²(ωτ/2)`.
//!
//! The projected evolution operator is diagonal in momentum for every cavity
//! state, so each measurement choice reduces to a [`SpectralKernel`] over `p`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::{DensityKernel, SpectralKernel};

/// Half-width of a kernel bracket in filter (or momentum-spread) widths.
pub const BRACKET_WIDTHS: f64 = 12.0;

/// State onto which the cavity is projected after every interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CavityState {
    /// Coherent state `|α⟩` with `α = alpha_mod · e^{iγ}`.
    Coherent { alpha_mod: f64, gamma: f64 },
    /// Fock state `|1⟩`.
    NumberOne,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub omega_tau: f64,
    pub g_tilde: f64,
    pub cavity: CavityState,
}

impl ModelParams {
    pub fn coherent(omega_tau: f64, g_tilde: f64, alpha_mod: f64, gamma: f64) -> Result<Self> {
        Self::new(omega_tau, g_tilde, CavityState::Coherent { alpha_mod, gamma })
    }

    pub fn number_one(omega_tau: f64, g_tilde: f64) -> Result<Self> {
        Self::new(omega_tau, g_tilde, CavityState::NumberOne)
    }

    pub fn new(omega_tau: f64, g_tilde: f64, cavity: CavityState) -> Result<Self> {
        let params = Self {
            omega_tau,
            g_tilde,
            cavity,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega_tau > 0.0 && self.omega_tau.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "omega_tau must be positive and finite, got {}",
                self.omega_tau
            )));
        }
        if (0.5 * self.omega_tau).sin().abs() < 1e-12 {
            return Err(Error::StroboscopicDecoupling {
                omega_tau: self.omega_tau,
            });
        }
        if !self.g_tilde.is_finite() {
            return Err(Error::InvalidParams(format!("g_tilde must be finite, got {}", self.g_tilde)));
        }
        if let CavityState::Coherent { alpha_mod, gamma } = self.cavity {
            if !(alpha_mod >= 0.0 && alpha_mod.is_finite()) {
                return Err(Error::InvalidParams(format!("alpha_mod must be finite and >= 0, got {alpha_mod}")));
            }
            if !gamma.is_finite() {
                return Err(Error::InvalidParams(format!("gamma must be finite, got {gamma}")));
            }
        }
        Ok(())
    }

    pub fn is_coherent(&self) -> bool {
        matches!(self.cavity, CavityState::Coherent { .. })
    }
}

/// Coefficients of the exact one-interval evolution operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelCoefficients {
    /// `ξ_τ = 1 − 2g̃²(1 − sin ωτ / ωτ)`, the dressed inverse mass.
    pub xi_tau: f64,
    /// `g_τ = g̃(1 − e^{iωτ})`.
    pub g_tau: Complex64,
    /// `G² = |g_τ|²`.
    pub g_tau_mod_sq: f64,
}

pub fn coefficients(params: &ModelParams) -> ModelCoefficients {
    let theta = params.omega_tau;
    let g = params.g_tilde;
    let sinc = if theta.abs() < 1e-4 {
        1.0 - theta * theta / 6.0 + theta.powi(4) / 120.0
    } else {
        theta.sin() / theta
    };
    let half_sin = (0.5 * theta).sin();
    ModelCoefficients {
        xi_tau: 1.0 - 2.0 * g * g * (1.0 - sinc),
        g_tau: g * (Complex64::new(1.0, 0.0) - Complex64::from_polar(1.0, theta)),
        g_tau_mod_sq: 4.0 * g * g * half_sin * half_sin,
    }
}

/// Gaussian particle state with mean momentum `p0`, mean position `x0`,
/// spreads `dp0`, `dx0` and purity `pi0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianParticleState {
    pub p0: f64,
    pub x0: f64,
    pub dp0: f64,
    pub dx0: f64,
    pub pi0: f64,
}

impl GaussianParticleState {
    pub fn new(p0: f64, x0: f64, dp0: f64, dx0: f64, pi0: f64) -> Result<Self> {
        let state = Self { p0, x0, dp0, dx0, pi0 };
        state.validate()?;
        Ok(state)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p0.is_finite() && self.x0.is_finite()) {
            return Err(Error::InvalidState("p0 and x0 must be finite".into()));
        }
        if !(self.dp0 > 0.0 && self.dp0.is_finite() && self.dx0 > 0.0 && self.dx0.is_finite()) {
            return Err(Error::InvalidState(format!(
                "spreads must be positive and finite (dp0 = {}, dx0 = {})",
                self.dp0, self.dx0
            )));
        }
        if !(self.pi0 > 0.0 && self.pi0 <= 1.0) {
            return Err(Error::InvalidState(format!("purity pi0 must lie in (0, 1], got {}", self.pi0)));
        }
        let product = self.uncertainty_product();
        if product < 1.0 - 1e-12 {
            return Err(Error::InvalidState(format!(
                "4 dx0² dp0² pi0² = {product} < 1; no Gaussian state has these moments"
            )));
        }
        Ok(())
    }

    fn uncertainty_product(&self) -> f64 {
        4.0 * (self.dx0 * self.dp0 * self.pi0).powi(2)
    }

    /// `B = √(4 dx0² dp0² pi0² − 1)`, the position–momentum correlation.
    pub fn b_coeff(&self) -> f64 {
        (self.uncertainty_product() - 1.0).max(0.0).sqrt()
    }

    /// Smallest `dx0` compatible with `dp0` and `pi0`.
    pub fn min_dx0(dp0: f64, pi0: f64) -> f64 {
        1.0 / (2.0 * dp0 * pi0)
    }
}

/// Momentum-space density kernel of a Gaussian particle state:
///
/// ```text
/// ρ(p, p′) = (2π dp0²)^{-1/2} exp[−(p + p′ − 2p0)²/(8dp0²) − (p − p′)²/(8dp0²pi0²) − i(p − p′)x0]
///            × exp[−iB(p − p′)(p + p′ − 2p0)/(4dp0²pi0)]
/// ```
pub fn initial_density(state: &GaussianParticleState) -> Result<DensityKernel> {
    state.validate()?;
    let GaussianParticleState { p0, x0, dp0, pi0, .. } = *state;
    let b = state.b_coeff();
    let var = dp0 * dp0;
    let norm = 1.0 / (2.0 * PI * var).sqrt();
    DensityKernel::new(
        move |p, q| {
            let sum = p + q - 2.0 * p0;
            let diff = p - q;
            let modulus = norm * (-sum * sum / (8.0 * var) - diff * diff / (8.0 * var * pi0 * pi0)).exp();
            let phase = -diff * x0 - b * diff * sum / (4.0 * var * pi0);
            Complex64::from_polar(modulus, phase)
        },
        p0,
        dp0 * (1.0f64 / pi0).max(1.0),
    )
}

/// `p* = Re b / G²`, which reduces to `−(|α|/g̃) cos γ` for a coherent state;
/// 0 for `|1⟩`. Not finite for a coherent state when `g̃ = 0`.
pub fn selected_momentum(params: &ModelParams) -> f64 {
    match params.cavity {
        CavityState::Coherent { alpha_mod, gamma } => -alpha_mod * gamma.cos() / params.g_tilde,
        CavityState::NumberOne => 0.0,
    }
}

/// `Λ(p*)`: `4|α|² sin²γ sin²(ωτ/2)` for a coherent state, 0 for `|1⟩`.
pub fn peak_decay_rate(params: &ModelParams) -> f64 {
    match params.cavity {
        CavityState::Coherent { alpha_mod, gamma } => {
            let s = (0.5 * params.omega_tau).sin();
            4.0 * (alpha_mod * gamma.sin() * s).powi(2)
        }
        CavityState::NumberOne => 0.0,
    }
}

/// `Λ″(p*)`: `2G²` for a coherent state, `6G²` for `|1⟩`.
pub fn filter_curvature(params: &ModelParams) -> f64 {
    let g2 = coefficients(params).g_tau_mod_sq;
    match params.cavity {
        CavityState::Coherent { .. } => 2.0 * g2,
        CavityState::NumberOne => 6.0 * g2,
    }
}

/// Kernel width at `N = 1`, or the momentum spread when nothing is filtered.
fn filter_width(curvature: f64, dp0: f64) -> f64 {
    if curvature > 0.0 {
        1.0 / curvature.sqrt()
    } else {
        dp0
    }
}

/// `b = −α g_τ* + e^{−iωτ} g_τ α*`.
fn coherent_b(params: &ModelParams, coeffs: &ModelCoefficients, alpha_mod: f64, gamma: f64) -> Complex64 {
    let alpha = Complex64::from_polar(alpha_mod, gamma);
    -alpha * coeffs.g_tau.conj() + Complex64::from_polar(1.0, -params.omega_tau) * coeffs.g_tau * alpha.conj()
}

/// Eigenvalue of the projected evolution for a coherent cavity state:
///
/// ```text
/// λ_p = exp[−iωτ/2 − 2i|α|² sin(ωτ/2) e^{−iωτ/2}] · exp[−iξ_τ p² ωτ/2 − p²G²/2 + p b]
/// ```
pub fn kernel_coherent(params: &ModelParams, state: &GaussianParticleState) -> Result<SpectralKernel> {
    kernel_with_coefficients(params, &coefficients(params), state, CavityKind::Coherent)
}

/// Eigenvalue of the projected evolution for the cavity state `|1⟩`:
///
/// ```text
/// λ_p = (1 − p²G²) e^{−3iωτ/2} exp[−iξ_τ p² ωτ/2 − p²G²/2]
/// ```
pub fn kernel_number1(params: &ModelParams, state: &GaussianParticleState) -> Result<SpectralKernel> {
    kernel_with_coefficients(params, &coefficients(params), state, CavityKind::NumberOne)
}

/// Kernel for whichever cavity state `params` names.
pub fn spectral_kernel(params: &ModelParams, state: &GaussianParticleState) -> Result<SpectralKernel> {
    spectral_kernel_with_coefficients(params, &coefficients(params), state)
}

/// As [`spectral_kernel`] but with caller-supplied coefficients, e.g. a
/// modified `ξ_τ`.
pub fn spectral_kernel_with_coefficients(
    params: &ModelParams,
    coeffs: &ModelCoefficients,
    state: &GaussianParticleState,
) -> Result<SpectralKernel> {
    let kind = match params.cavity {
        CavityState::Coherent { .. } => CavityKind::Coherent,
        CavityState::NumberOne => CavityKind::NumberOne,
    };
    kernel_with_coefficients(params, coeffs, state, kind)
}

#[derive(Clone, Copy)]
enum CavityKind {
    Coherent,
    NumberOne,
}

fn kernel_with_coefficients(
    params: &ModelParams,
    coeffs: &ModelCoefficients,
    state: &GaussianParticleState,
    kind: CavityKind,
) -> Result<SpectralKernel> {
    params.validate()?;
    state.validate()?;
    let theta = params.omega_tau;
    let g2 = coeffs.g_tau_mod_sq;
    // p² coefficient shared by both cavity states
    let quad = Complex64::new(-0.5 * g2, -0.5 * coeffs.xi_tau * theta);

    match (kind, params.cavity) {
        (CavityKind::Coherent, CavityState::Coherent { alpha_mod, gamma }) => {
            let b = coherent_b(params, coeffs, alpha_mod, gamma);
            let half = 0.5 * theta;
            let prefactor = Complex64::new(0.0, -half)
                - Complex64::new(0.0, 2.0 * alpha_mod * alpha_mod * half.sin()) * Complex64::from_polar(1.0, -half);
            let width = filter_width(2.0 * g2, state.dp0);
            let center = if g2 > 0.0 { b.re / g2 } else { state.p0 };
            let half_width = BRACKET_WIDTHS * width.max(state.dp0);
            SpectralKernel::new(
                move |p| (prefactor + quad * (p * p) + b * p).exp(),
                (center - half_width, center + half_width),
                width,
            )
        }
        (CavityKind::NumberOne, CavityState::NumberOne) => {
            let phase = Complex64::new(0.0, -1.5 * theta);
            let width = filter_width(6.0 * g2, state.dp0);
            let half_width = BRACKET_WIDTHS * width.max(state.dp0);
            SpectralKernel::new(
                move |p| (1.0 - p * p * g2) * (phase + quad * (p * p)).exp(),
                (-half_width, half_width),
                width,
            )
        }
        (CavityKind::Coherent, _) => Err(Error::WrongCavity { expected: "coherent" }),
        (CavityKind::NumberOne, _) => Err(Error::WrongCavity { expected: "number |1>" }),
    }
}

/// Closed-form survival probability for a coherent cavity state:
///
/// ```text
/// P(N) = e^{−NΛ*} / √(1 + 2G²dp0²N) · exp[−(p0 − p*)² / (2dp0² (1 + 1/(2G²dp0²N)))]
/// ```
///
/// written so that `N = 0` gives exactly 1.
pub fn survival_closed_coherent(params: &ModelParams, state: &GaussianParticleState, n: u32) -> Result<f64> {
    if !params.is_coherent() {
        return Err(Error::WrongCavity { expected: "coherent" });
    }
    if n == 0 {
        return Ok(1.0);
    }
    let g2 = coefficients(params).g_tau_mod_sq;
    let var = state.dp0 * state.dp0;
    let a_n = 2.0 * g2 * var * n as f64;
    let offset = state.p0 - selected_momentum(params);
    let exponent = -(n as f64) * peak_decay_rate(params) - offset * offset * a_n / (2.0 * var * (1.0 + a_n));
    Ok(exponent.exp() / (1.0 + a_n).sqrt())
}

/// Closed-form purity for a coherent cavity state,
/// `Π(N) = √((1 + 2G²dp0²N) / (1/pi0² + 2G²dp0²N))`.
pub fn purity_closed_coherent(params: &ModelParams, state: &GaussianParticleState, n: u32) -> Result<f64> {
    if !params.is_coherent() {
        return Err(Error::WrongCavity { expected: "coherent" });
    }
    let g2 = coefficients(params).g_tau_mod_sq;
    let a_n = 2.0 * g2 * state.dp0 * state.dp0 * n as f64;
    Ok(((1.0 + a_n) / (1.0 / (state.pi0 * state.pi0) + a_n)).sqrt())
}

/// Large-`N` survival probability for the `|1⟩` cavity state,
/// `P(N) ≈ e^{−p0²/2dp0²} / √(6G²dp0²N)`.
pub fn survival_asym_number1(params: &ModelParams, state: &GaussianParticleState, n: u32) -> Result<f64> {
    if params.is_coherent() {
        return Err(Error::WrongCavity { expected: "number |1>" });
    }
    if n == 0 {
        return Err(Error::InvalidArgument("asymptotic survival needs N >= 1".into()));
    }
    let g2 = coefficients(params).g_tau_mod_sq;
    let var = state.dp0 * state.dp0;
    Ok((-state.p0 * state.p0 / (2.0 * var)).exp() / (6.0 * g2 * var * n as f64).sqrt())
}

/// Large-`N` purity, `Π(N) ≈ 1 − (1/pi0² − 1) Δ_N² / (2dp0²)`, with the
/// filter width of either cavity state.
pub fn purity_asym_closed(params: &ModelParams, state: &GaussianParticleState, n: u32) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument("asymptotic purity needs N >= 1".into()));
    }
    let curvature = filter_curvature(params);
    if !(curvature > 0.0) {
        return Err(Error::InvalidLaplace);
    }
    let delta_sq = 1.0 / (n as f64 * curvature);
    let coefficient = (1.0 / (state.pi0 * state.pi0) - 1.0) / (2.0 * state.dp0 * state.dp0);
    Ok(1.0 - coefficient * delta_sq)
}
