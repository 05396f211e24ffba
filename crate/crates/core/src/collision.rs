//! Moment-space collision operators and the implicit relaxation step.
//!
//! Both supported operators act linearly on full moments, C(u) = A u:
//!
//! - Laplace-Beltrami, C(psi) = scale * d/dmu((1 - mu^2) dpsi/dmu).
//!   Integrating <mu^k C(psi)> by parts (boundary terms vanish) gives
//!   row k of A the entries scale * k(k-1) at column k-2 and
//!   -scale * k(k+1) at column k, independent of the ansatz.
//! - Isotropic BGK, C(psi) = u_0 / 2 - psi, whose moments are
//!   (u_0 / 2) <b> - u.
//!
//! The first row of A is zero for both (mass conservation). An explicit
//! Euler step of the reduced system du/dt = A u can leave the realizable
//! set for the Laplace-Beltrami operator no matter how small the step, so
//! the scheme treats the whole source implicitly:
//!
//! ((1 + dt sigma_a) I - dt sigma_s A) u' = u* + dt q,
//!
//! which preserves realizability for every dt >= 0.

use crate::angular::{basis_integrals, MomentVector};
use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};

/// The supported collision operators.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CollisionKind {
    LaplaceBeltrami,
    IsotropicBgk,
}

/// A collision operator together with its Laplace-Beltrami prefactor.
///
/// The prefactor is exposed because both the convention C = (1/2) Delta
/// (used by the transport equation) and C = Delta (used by the reduced
/// vector-field examples) are in circulation; the isotropic BGK operator
/// ignores it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CollisionModel {
    pub kind: CollisionKind,
    pub scale: f64,
}

impl CollisionModel {
    /// Laplace-Beltrami operator with the given prefactor.
    pub fn laplace_beltrami(scale: f64) -> Self {
        Self {
            kind: CollisionKind::LaplaceBeltrami,
            scale,
        }
    }

    /// The transport-equation convention C = (1/2) Delta.
    pub fn laplace_beltrami_half() -> Self {
        Self::laplace_beltrami(0.5)
    }

    /// BGK-type isotropic scattering, kernel K = 1/2.
    pub fn isotropic_bgk() -> Self {
        Self {
            kind: CollisionKind::IsotropicBgk,
            scale: 1.0,
        }
    }

    /// The moment-space matrix A with C(u) = A u.
    pub fn moment_matrix(&self, order: usize) -> DMatrix<f64> {
        match self.kind {
            CollisionKind::LaplaceBeltrami => laplace_beltrami_matrix(order, self.scale),
            CollisionKind::IsotropicBgk => isotropic_bgk_matrix(order),
        }
    }

    /// Applies C to a moment vector.
    pub fn apply(&self, u: &MomentVector) -> MomentVector {
        match self.kind {
            CollisionKind::IsotropicBgk => isotropic_bgk_moments(u),
            CollisionKind::LaplaceBeltrami => {
                let a = self.moment_matrix(u.order());
                let v = a * DVector::from_column_slice(u.as_slice());
                MomentVector::new(v.data.into())
            }
        }
    }
}

/// Moment matrix of the Laplace-Beltrami operator: row k has
/// scale * k(k-1) at column k-2 and -scale * k(k+1) at column k.
pub fn laplace_beltrami_matrix(order: usize, scale: f64) -> DMatrix<f64> {
    let n = order + 1;
    let mut a = DMatrix::zeros(n, n);
    for k in 1..n {
        let kf = k as f64;
        if k >= 2 {
            a[(k, k - 2)] = scale * kf * (kf - 1.0);
        }
        a[(k, k)] = -scale * kf * (kf + 1.0);
    }
    a
}

/// Moment matrix of the isotropic BGK operator, (1/2) <b> e_0^T - I.
pub fn isotropic_bgk_matrix(order: usize) -> DMatrix<f64> {
    let n = order + 1;
    let integrals = basis_integrals(order);
    let mut a = DMatrix::from_diagonal_element(n, n, -1.0);
    for k in 0..n {
        a[(k, 0)] += 0.5 * integrals[k];
    }
    a
}

/// Moments (u_0 / 2) <b> - u of the isotropic BGK operator applied to the
/// density behind u; the first component is exactly zero.
pub fn isotropic_bgk_moments(u: &MomentVector) -> MomentVector {
    let integrals = basis_integrals(u.order());
    let components = integrals
        .iter()
        .zip(u.iter())
        .map(|(b, c)| 0.5 * u.u0() * b - c)
        .collect();
    MomentVector::new(components)
}

/// Pointwise material data at one cell centre: absorption, scattering and
/// the moments <b Q> of the non-negative emitting source.
#[derive(Clone, Debug)]
pub struct MaterialSample {
    pub sigma_a: f64,
    pub sigma_s: f64,
    pub q_moments: MomentVector,
}

impl MaterialSample {
    pub fn vacuum(order: usize) -> Self {
        Self {
            sigma_a: 0.0,
            sigma_s: 0.0,
            q_moments: MomentVector::zeros(order),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_a >= 0.0 && self.sigma_a.is_finite()) {
            return Err(Error::Config(format!(
                "sigma_a must be finite and >= 0, got {}",
                self.sigma_a
            )));
        }
        if !(self.sigma_s >= 0.0 && self.sigma_s.is_finite()) {
            return Err(Error::Config(format!(
                "sigma_s must be finite and >= 0, got {}",
                self.sigma_s
            )));
        }
        if !self.q_moments.is_finite() {
            return Err(Error::Config("source moments must be finite".into()));
        }
        Ok(())
    }
}

/// One explicit Euler step u + dt A u of the reduced (space-homogeneous)
/// moment system. Provided for the counterexamples: with the
/// Laplace-Beltrami operator this leaves the realizable set from boundary
/// moments for every dt > 0.
pub fn explicit_reduced_step(u: &MomentVector, dt: f64, model: &CollisionModel) -> MomentVector {
    u.axpy(dt, &model.apply(u))
}

/// Implicit relaxation step: solves
///
/// ((1 + dt sigma_a) I - dt sigma_s A) u' = u* + dt <b Q>.
///
/// For realizable u*, non-negative coefficients and realizable (or zero)
/// source moments the result is realizable for every dt >= 0. The system
/// is regular because the spectrum of A is non-positive; it is solved by
/// dense LU with partial pivoting (n <= 4).
pub fn implicit_relax_step(
    u_star: &MomentVector,
    dt: f64,
    material: &MaterialSample,
    model: &CollisionModel,
) -> Result<MomentVector> {
    if !(dt >= 0.0) {
        return Err(Error::Config(format!("time step must be >= 0, got {dt}")));
    }
    material.validate()?;
    let n = u_star.len();
    assert_eq!(material.q_moments.len(), n, "source moment length mismatch");

    let mut system = model.moment_matrix(u_star.order());
    system *= -dt * material.sigma_s;
    for k in 0..n {
        system[(k, k)] += 1.0 + dt * material.sigma_a;
    }
    let rhs = DVector::from_iterator(
        n,
        u_star
            .iter()
            .zip(material.q_moments.iter())
            .map(|(u, q)| u + dt * q),
    );
    let solution = system
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::SingularSystem("implicit relaxation matrix".into()))?;
    Ok(MomentVector::new(solution.data.into()))
}
