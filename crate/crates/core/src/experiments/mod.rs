//! Benchmark experiments: the manufactured-solution convergence study and
//! the plane-source test, plus their error metrics.

mod agreement;
mod convergence;
mod manufactured;
mod plane_source;

pub use agreement::{oracle_agreement, AgreementReport};
pub use convergence::{
    convergence_study, error_norms, observed_order, ConvergenceRow, ErrorReport,
};
pub use manufactured::{exp_monomial_moments, manufactured_config, ManufacturedFields};
pub use plane_source::{
    plane_source_config, PLANE_SOURCE_DOMAIN, PLANE_SOURCE_T_FINAL, PLANE_SOURCE_VACUUM_DENSITY,
};
