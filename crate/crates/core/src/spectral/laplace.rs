//! Peak location and local Gaussian (Laplace) data of `|λ_E|`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quadrature::{second_derivative, stencil_step};

use super::kernel::SpectralKernel;

/// Grid resolution of the coarse scan in [`locate_peak`].
pub const PEAK_GRID_POINTS: usize = 1025;

/// Two grid values of `Λ` closer than this are treated as equally good peaks.
const DEGENERACY_GAP: f64 = 1e-9;

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Everything the Gaussian approximation of `|λ_E|^{2N}` needs: the peak
/// `E*`, the decay rate `Λ(E*) = −ln|λ_{E*}|²` and the curvature `Λ″(E*)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaplaceData {
    pub e_star: f64,
    pub big_lambda_star: f64,
    pub curvature: f64,
    pub valid: bool,
}

impl LaplaceData {
    /// `valid` is set when the curvature is positive and finite.
    pub fn new(e_star: f64, big_lambda_star: f64, curvature: f64) -> Self {
        Self {
            e_star,
            big_lambda_star,
            curvature,
            valid: curvature > 0.0 && curvature.is_finite() && big_lambda_star.is_finite(),
        }
    }

    /// Filter width `Δ_N = 1/√(N Λ″(E*))`.
    pub fn delta_n(&self, n: u32) -> Result<f64> {
        delta_n(self, n)
    }

    /// `f(N) = √(2πΔ_N²) e^{−NΛ(E*)}`.
    pub fn filter_mass(&self, n: u32) -> Result<f64> {
        let dn = self.delta_n(n)?;
        Ok((2.0 * PI).sqrt() * dn * (-(n as f64) * self.big_lambda_star).exp())
    }
}

pub fn delta_n(data: &LaplaceData, n: u32) -> Result<f64> {
    if !data.valid {
        return Err(Error::InvalidLaplace);
    }
    if n == 0 {
        return Err(Error::InvalidArgument("delta_n needs N >= 1".into()));
    }
    Ok(1.0 / (n as f64 * data.curvature).sqrt())
}

/// Golden-section minimization of `f` on `[a, b]`.
fn golden_section<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> f64 {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..200 {
        if (b - a).abs() <= 4.0 * f64::EPSILON * (a.abs() + b.abs()).max(f64::MIN_POSITIVE) {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    if fc <= fd {
        c
    } else {
        d
    }
}

/// Finds the unique interior maximum `E*` of `|λ_E|` in the kernel bracket:
/// a uniform scan of `Λ(E)`, golden-section refinement around the best grid
/// point, then a few parabolic steps through symmetric triples to get below
/// the `√ε` resolution that comparisons of `Λ` alone can reach.
pub fn locate_peak(kernel: &SpectralKernel) -> Result<f64> {
    let (lo, hi) = kernel.bracket();
    let spacing = (hi - lo) / (PEAK_GRID_POINTS - 1) as f64;
    let grid: Vec<(f64, f64)> = (0..PEAK_GRID_POINTS)
        .map(|i| {
            let e = lo + i as f64 * spacing;
            (e, kernel.decay_rate(e))
        })
        .collect();
    if let Some(&(e, _)) = grid.iter().find(|(_, l)| l.is_nan()) {
        return Err(Error::InvalidKernel(format!("|lambda| is not a number at E = {e}")));
    }

    let (best, &(e_best, l_best)) = grid
        .iter()
        .enumerate()
        .min_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
        .expect("grid is non-empty");
    if l_best == f64::INFINITY {
        return Err(Error::DegenerateMaximum { at: e_best });
    }
    let rival = grid
        .iter()
        .enumerate()
        .any(|(i, &(_, l))| i.abs_diff(best) > 2 && l <= l_best + DEGENERACY_GAP);
    if rival {
        return Err(Error::DegenerateMaximum { at: e_best });
    }
    if best == 0 || best == PEAK_GRID_POINTS - 1 {
        return Err(Error::BoundaryMaximum { at: e_best });
    }

    let decay = |e: f64| kernel.decay_rate(e);
    let mut e_star = golden_section(decay, grid[best - 1].0, grid[best + 1].0);

    let h = 1e-5 * kernel.width_hint();
    for _ in 0..3 {
        let (l_minus, l0, l_plus) = (decay(e_star - h), decay(e_star), decay(e_star + h));
        let denom = l_plus - 2.0 * l0 + l_minus;
        if !(denom > 0.0 && denom.is_finite()) {
            break;
        }
        let step = 0.5 * h * (l_minus - l_plus) / denom;
        if !(step.abs() <= h) {
            break;
        }
        let candidate = e_star + step;
        // Accept only moves that do not make Λ measurably worse.
        if decay(candidate) > l0 + 4.0 * f64::EPSILON * l0.abs().max(1.0) {
            break;
        }
        e_star = candidate;
        if step == 0.0 {
            break;
        }
    }

    let edge = 1e-6 * (hi - lo);
    if e_star - lo < edge || hi - e_star < edge {
        return Err(Error::BoundaryMaximum { at: e_star });
    }
    Ok(e_star)
}

/// Evaluates `Λ(E*)` and `Λ″(E*)`; the curvature comes from the Richardson
/// refined five-point stencil with a step scaled by the kernel width hint.
pub fn laplace_data(kernel: &SpectralKernel, e_star: f64) -> Result<LaplaceData> {
    let big_lambda_star = kernel.decay_rate(e_star);
    if !big_lambda_star.is_finite() {
        return Err(Error::DegenerateMaximum { at: e_star });
    }
    let width = kernel.width_hint();
    let curvature = second_derivative(|e| kernel.decay_rate(e), e_star, stencil_step(width))?;
    let data = LaplaceData::new(e_star, big_lambda_star, curvature);
    if !data.valid || curvature <= 1e-12 / (width * width) {
        return Err(Error::DegenerateMaximum { at: e_star });
    }
    Ok(data)
}

/// `locate_peak` followed by `laplace_data`.
pub fn analyze(kernel: &SpectralKernel) -> Result<LaplaceData> {
    let e_star = locate_peak(kernel)?;
    laplace_data(kernel, e_star)
}
