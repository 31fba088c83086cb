//! Continuous-spectrum distillation for an arbitrary diagonal projected
//! evolution operator `V = ∫ dE λ_E |E⟩⟨E|` acting on an initial density
//! kernel.

mod distill;
mod kernel;
mod laplace;
mod series;

pub use distill::{
    evolve_density, purity_asymptotic, purity_exact, survival_asymptotic, survival_exact, Asymptotic,
    Distiller, Survival, MIN_PROBABILITY, WINDOW_WIDTHS,
};
pub use kernel::{DensityKernel, SpectralKernel, CONTRACTION_SLACK, SUPPORT_WIDTHS};
pub use laplace::{analyze, delta_n, laplace_data, locate_peak, LaplaceData, PEAK_GRID_POINTS};
pub use series::{run_series, run_series_with_tolerance, DistillationSeries, RowError, SeriesRow};
