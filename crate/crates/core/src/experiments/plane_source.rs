//! Plane-source benchmark: an isotropic pulse in near-vacuum.
//!
//! The initial kinetic density is read literally as
//!
//! psi_0(x, mu) = psi_vac + delta(x),
//!
//! i.e. a constant-in-angle Dirac of unit spatial mass on top of the
//! vacuum approximation psi_vac = 0.5e-8. With an even cell count the
//! Dirac sits on the central interface and is split into the two adjacent
//! cells, each receiving the cell-mean moment contribution
//! (1/dz) (1, 0, 1/3, 0, ...). Scattering is sigma_s = 1 with no
//! absorption or source, vacuum Dirichlet data closes the domain
//! [-1.2, 1.2], and the run ends at t = 1 before the wave reaches the
//! boundary (propagation speeds are bounded by one).

use crate::angular::MomentVector;
use crate::collision::CollisionModel;
use crate::error::{Error, Result};
use crate::solver::{BoundaryCondition, DiagnosticsConfig, RunConfig};

/// Vacuum density floor psi_vac of the plane-source test.
pub const PLANE_SOURCE_VACUUM_DENSITY: f64 = 0.5e-8;

/// Spatial domain of the benchmark.
pub const PLANE_SOURCE_DOMAIN: (f64, f64) = (-1.2, 1.2);

/// Final time of the benchmark.
pub const PLANE_SOURCE_T_FINAL: f64 = 1.0;

/// Builds the plane-source run configuration for M_N with the given
/// collision operator. The cell count must be even so the Dirac lies on a
/// cell interface.
pub fn plane_source_config(
    order: usize,
    nx: usize,
    collision: CollisionModel,
) -> Result<RunConfig> {
    if !nx.is_multiple_of(2) {
        return Err(Error::Config(format!(
            "the plane source needs an even cell count, got {nx}"
        )));
    }
    let mut config = RunConfig::new(order, nx, PLANE_SOURCE_DOMAIN, PLANE_SOURCE_T_FINAL);
    config.collision = collision;
    config.sigma_s = Box::new(|_, _| 1.0);
    config.sigma_a = Box::new(|_, _| 0.0);
    config.bc = BoundaryCondition::isotropic_dirichlet(order, PLANE_SOURCE_VACUUM_DENSITY);
    config.initial_means = Box::new(move |grid| {
        let vacuum = MomentVector::isotropic(order, 2.0 * PLANE_SOURCE_VACUUM_DENSITY);
        let pulse = MomentVector::isotropic(order, 2.0 / grid.dz);
        let left_center = grid.nx / 2 - 1;
        (0..grid.nx)
            .map(|j| {
                if j == left_center || j == left_center + 1 {
                    &vacuum + &pulse.scale(0.5)
                } else {
                    vacuum.clone()
                }
            })
            .collect()
    });
    config.diagnostics = DiagnosticsConfig {
        track_boundary_distance: true,
        distance_density_floor: 100.0 * PLANE_SOURCE_VACUUM_DENSITY,
    };
    Ok(config)
}
