//! Minimum-entropy (M_N) moment models for time-dependent linear kinetic
//! transport in slab geometry,
//!
//! d/dt psi + mu d/dz psi + sigma_a psi = sigma_s C(psi) + Q,
//!
//! together with a realizability-preserving first-order finite-volume
//! scheme that treats the hyperbolic transport explicitly with a kinetic
//! upwind flux and the (possibly stiff) collision/absorption source
//! implicitly, under the parameter-free CFL condition dt <= dz.
//!
//! The crate is organized along the pipeline:
//!
//! - [`angular`]: monomial angular basis, half-range Gauss-Legendre
//!   quadrature, moment vectors.
//! - [`closure`]: the Maxwell-Boltzmann minimum-entropy closure (dual
//!   Newton solve) and the kinetic numerical flux.
//! - [`realizability`]: predicates, an LP feasibility oracle, atomic
//!   reconstructions and boundary-distance diagnostics for the realizable
//!   set of full moments (N <= 3) and mixed moments (orders 1 and 2).
//! - [`collision`]: moment-space Laplace-Beltrami and isotropic-BGK
//!   collision operators plus the implicit relaxation step.
//! - [`solver`]: equidistant finite-volume grid, boundary handling and the
//!   full IMEX update.
//! - [`experiments`]: the manufactured-solution convergence study and the
//!   plane-source benchmark used by the command-line interface.

// Validation guards are written as negated comparisons (`!(x > 0.0)`) so
// that NaN inputs fail them; the positive forms would let NaN through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod angular;
pub mod closure;
pub mod collision;
pub mod error;
pub mod experiments;
pub mod realizability;
pub mod solver;

pub use angular::{
    eval_basis, normalize, Basis, HalfRange, MomentVector, NormalizedMoments, Quadrature,
};
pub use closure::{
    ansatz_samples, dual_objective, flux_moments, kinetic_flux, solve_dual, solve_dual_warm,
    ClosureConfig, DualReport, Multipliers,
};
pub use collision::{CollisionKind, CollisionModel, MaterialSample};
pub use error::{Error, Result};
pub use realizability::{MixedMoment2Vector, RealizabilityVerdict};
pub use solver::{run, Grid, RunConfig, RunOutput, Simulation};
