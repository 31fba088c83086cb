use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::quadrature::Tolerance;

use super::distill::Distiller;
use super::kernel::{DensityKernel, SpectralKernel};

/// One measurement count of a sweep. Asymptotic columns are `None` at
/// `N = 0`, where the Laplace expansion has no meaning.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesRow {
    pub n: u32,
    pub p_exact: f64,
    pub pi_exact: f64,
    /// Laplace estimate of `P(N)` including the `Δ_N²` term.
    pub p_asym: Option<f64>,
    /// Zeroth-order Laplace estimate `f(N)·g(0)`.
    pub p_asym_leading: Option<f64>,
    pub pi_asym: Option<f64>,
    pub delta_n: Option<f64>,
    /// Set when `Δ_N` still exceeds the width of the initial density.
    pub low_n: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RowError {
    pub n: u32,
    pub error: Error,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistillationSeries {
    pub rows: Vec<Result<SeriesRow, RowError>>,
}

impl DistillationSeries {
    /// Rows that were computed successfully, in order.
    pub fn ok_rows(&self) -> impl Iterator<Item = &SeriesRow> {
        self.rows.iter().filter_map(|r| r.as_ref().ok())
    }

    pub fn first_error(&self) -> Option<&RowError> {
        self.rows.iter().find_map(|r| r.as_ref().err())
    }
}

fn row(distiller: &Distiller<'_>, n: u32) -> Result<SeriesRow> {
    let survival = distiller.survival(n)?;
    let pi_exact = distiller.purity_given(&survival)?;
    let mut row = SeriesRow {
        n,
        p_exact: survival.probability(),
        pi_exact,
        p_asym: None,
        p_asym_leading: None,
        pi_asym: None,
        delta_n: None,
        low_n: false,
    };
    if n > 0 {
        let data = distiller.laplace()?;
        let p = distiller.survival_asymptotic(n)?;
        let pi = distiller.purity_asymptotic(n)?;
        row.p_asym = Some(p.value);
        row.p_asym_leading = Some(p.leading);
        row.pi_asym = Some(pi.value);
        row.delta_n = Some(data.delta_n(n)?);
        row.low_n = p.low_n;
    }
    Ok(row)
}

/// Exact and asymptotic survival probability and purity for every `N` in
/// `n_values` (non-empty, strictly increasing). Rows are computed in
/// parallel; failures are recorded per row instead of aborting the sweep.
pub fn run_series_with_tolerance(
    kernel: &SpectralKernel,
    rho0: &DensityKernel,
    n_values: &[u32],
    tol: Tolerance,
) -> Result<DistillationSeries> {
    if n_values.is_empty() {
        return Err(Error::InvalidArgument("n_values is empty".into()));
    }
    if n_values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("n_values must be strictly increasing".into()));
    }
    let distiller = Distiller::with_tolerance(kernel, rho0, tol);
    let rows = n_values
        .par_iter()
        .map(|&n| row(&distiller, n).map_err(|error| RowError { n, error }))
        .collect();
    Ok(DistillationSeries { rows })
}

pub fn run_series(kernel: &SpectralKernel, rho0: &DensityKernel, n_values: &[u32]) -> Result<DistillationSeries> {
    run_series_with_tolerance(kernel, rho0, n_values, Tolerance::default())
}
