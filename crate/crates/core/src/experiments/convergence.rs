//! Error norms and observed convergence orders for the manufactured
//! solution.
//!
//! Errors compare numeric cell means of the zeroth moment against exact
//! cell means at the final time,
//!
//! E_1 = dz sum_j |<u_a,0>_j - u_j,0|,   E_inf = max_j |<u_a,0>_j - u_j,0|,
//!
//! and the observed order between two refinements is
//! nu = ln(E_coarse / E_fine) / ln(dz_coarse / dz_fine).

use crate::angular::MomentVector;
use crate::error::{Error, Result};
use crate::solver::{run, Grid};
use crate::ClosureConfig;

use super::manufactured::{manufactured_config, ManufacturedFields};

/// L1 and Linf errors of the zeroth moment, with observed orders relative
/// to the previous refinement when available.
#[derive(Clone, Copy, Debug)]
pub struct ErrorReport {
    pub e1: f64,
    pub einf: f64,
    pub nu1: Option<f64>,
    pub nuinf: Option<f64>,
}

/// Computes the error norms of a numeric solution against exact cell means
/// of the zeroth moment.
pub fn error_norms(
    numeric_means: &[MomentVector],
    exact_zeroth_means: &[f64],
    grid: &Grid,
) -> Result<ErrorReport> {
    if numeric_means.len() != exact_zeroth_means.len() || numeric_means.len() != grid.nx {
        return Err(Error::Contract(format!(
            "error norms need matching lengths: numeric {}, exact {}, grid {}",
            numeric_means.len(),
            exact_zeroth_means.len(),
            grid.nx
        )));
    }
    let mut e1 = 0.0;
    let mut einf = 0.0f64;
    for (mean, exact) in numeric_means.iter().zip(exact_zeroth_means) {
        let difference = (mean.u0() - exact).abs();
        e1 += difference;
        einf = einf.max(difference);
    }
    Ok(ErrorReport {
        e1: grid.dz * e1,
        einf,
        nu1: None,
        nuinf: None,
    })
}

/// Observed convergence order between two refinements; `None` when an
/// error vanishes (the order is undefined).
pub fn observed_order(e_coarse: f64, e_fine: f64, dz_coarse: f64, dz_fine: f64) -> Option<f64> {
    if !(e_coarse > 0.0 && e_fine > 0.0 && dz_coarse > dz_fine && dz_fine > 0.0) {
        return None;
    }
    Some((e_coarse / e_fine).ln() / (dz_coarse / dz_fine).ln())
}

/// One row of the convergence table.
#[derive(Clone, Copy, Debug)]
pub struct ConvergenceRow {
    pub nx: usize,
    pub report: ErrorReport,
}

/// Runs the manufactured-solution test for each resolution and assembles
/// the error table with observed orders between consecutive rows.
pub fn convergence_study(
    k: f64,
    nx_list: &[usize],
    order: usize,
    closure: ClosureConfig,
    points_per_half: usize,
) -> Result<Vec<ConvergenceRow>> {
    if nx_list.windows(2).any(|pair| pair[1] <= pair[0]) {
        return Err(Error::Config(
            "resolutions must be strictly increasing".into(),
        ));
    }
    if let Some(nx) = nx_list.iter().find(|&&nx| nx % 2 != 0) {
        return Err(Error::Config(format!("resolutions must be even, got {nx}")));
    }
    let fields = ManufacturedFields::new(k)?;
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(nx_list.len());
    for &nx in nx_list {
        let config = manufactured_config(k, nx, order, closure.clone(), points_per_half)?;
        let t_final = config.t_final;
        let output = run(config)?;
        let exact = fields.exact_zeroth_cell_means(&output.grid, t_final);
        let mut report = error_norms(&output.state.means, &exact, &output.grid)?;
        if let Some(previous) = rows.last() {
            let dz_coarse = output.grid.dz * nx as f64 / previous.nx as f64;
            report.nu1 = observed_order(previous.report.e1, report.e1, dz_coarse, output.grid.dz);
            report.nuinf =
                observed_order(previous.report.einf, report.einf, dz_coarse, output.grid.dz);
        }
        rows.push(ConvergenceRow { nx, report });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn uniform_means(values: &[f64]) -> Vec<MomentVector> {
        values
            .iter()
            .map(|&v| MomentVector::new(vec![v, 0.0]))
            .collect()
    }

    #[test]
    fn error_norms_definitions() {
        let grid = Grid::new(4, 0.0, 2.0).unwrap();
        let exact = vec![1.0, 2.0, 3.0, 4.0];
        let identical = uniform_means(&exact);
        let report = error_norms(&identical, &exact, &grid).unwrap();
        assert_eq!(report.e1, 0.0);
        assert_eq!(report.einf, 0.0);

        // Uniform offset eps: E1 = L * eps, Einf = eps.
        let eps = 0.25;
        let offset = uniform_means(&exact.iter().map(|v| v + eps).collect::<Vec<_>>());
        let report = error_norms(&offset, &exact, &grid).unwrap();
        assert_abs_diff_eq!(report.e1, 2.0 * eps, epsilon = 1e-14);
        assert_abs_diff_eq!(report.einf, eps, epsilon = 1e-15);

        // Single-cell error eps: E1 = dz * eps.
        let mut single = exact.clone();
        single[2] += eps;
        let report = error_norms(&uniform_means(&single), &exact, &grid).unwrap();
        assert_abs_diff_eq!(report.e1, grid.dz * eps, epsilon = 1e-15);
        assert_abs_diff_eq!(report.einf, eps, epsilon = 1e-15);

        assert!(error_norms(&identical, &exact[..3], &grid).is_err());
    }

    #[test]
    fn observed_order_examples() {
        assert_abs_diff_eq!(
            observed_order(0.2, 0.1, 0.5, 0.25).unwrap(),
            1.0,
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(
            observed_order(0.4, 0.1, 0.5, 0.25).unwrap(),
            2.0,
            epsilon = 1e-14
        );
        // The published K = 2 pair of L1 errors between 40 and 80 cells.
        let nu = observed_order(5.332e-2, 2.713e-2, 2.0, 1.0).unwrap();
        assert_abs_diff_eq!(nu, 0.97, epsilon = 5e-3);
        assert!(observed_order(0.0, 0.1, 0.5, 0.25).is_none());
        assert!(observed_order(0.1, 0.0, 0.5, 0.25).is_none());
    }

    #[test]
    fn study_validates_resolutions() {
        let cfg = ClosureConfig::default();
        assert!(convergence_study(2.0, &[40, 40], 3, cfg.clone(), 20).is_err());
        assert!(convergence_study(2.0, &[41, 80], 3, cfg, 20).is_err());
    }

    #[test]
    fn coarse_study_errors_shrink_with_resolution() {
        let rows = convergence_study(2.0, &[10, 20], 3, ClosureConfig::default(), 20).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows[1].report.e1 < rows[0].report.e1);
        assert!(rows[1].report.einf < rows[0].report.einf);
        assert!(rows[0].report.nu1.is_none());
        assert!(rows[1].report.nu1.is_some());
    }
}
