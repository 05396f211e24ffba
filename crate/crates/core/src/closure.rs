//! Minimum-entropy (Maxwell-Boltzmann) closure.
//!
//! Given realizable moments u, the closure reconstructs the ansatz density
//!
//! psi_u(mu) = exp(b(mu)^T alpha),
//!
//! where the multipliers alpha solve the strictly convex dual problem
//!
//! min_alpha  <exp(b^T alpha)> - u^T alpha.
//!
//! The minimizer is found by damped Newton iteration with Armijo
//! backtracking and a Cholesky factorization of the dual Hessian
//! <b b^T exp(b^T alpha)>. When the factorization fails or the line search
//! stalls (moments too close to the realizability boundary), the target is
//! blended toward the isotropic moments along a fixed regularization
//! schedule and the solve is retried.
//!
//! The solve is performed on the normalized slice u_0 = 1 and the zeroth
//! multiplier is shifted by ln(u_0) afterwards; the ansatz is homogeneous
//! of degree one in exp(alpha_0), so this avoids overflow of the
//! exponential for large or tiny particle densities.

use crate::angular::{basis_integrals, HalfRange, MomentVector, Quadrature};
use crate::error::{Error, Result};
use nalgebra::{Cholesky, DMatrix, DVector};

/// Exponents above this overflow the ansatz; the solver treats such
/// iterates as infeasible and backtracks.
pub const EXP_OVERFLOW_LIMIT: f64 = 700.0;

/// Dual variables alpha = (alpha_0, ..., alpha_N) of the entropy
/// minimization; the natural parameters of the ansatz exp(b^T alpha).
#[derive(Clone, Debug, PartialEq)]
pub struct Multipliers(Vec<f64>);

impl Multipliers {
    pub fn new(components: Vec<f64>) -> Self {
        assert!(
            components.len() >= 2,
            "multipliers need at least two components (M1)"
        );
        Self(components)
    }

    pub fn zeros(order: usize) -> Self {
        Self::new(vec![0.0; order + 1])
    }

    /// Multipliers of the isotropic ansatz with particle density u_0:
    /// alpha = (ln(u_0 / 2), 0, ..., 0).
    pub fn isotropic(order: usize, u0: f64) -> Self {
        let mut components = vec![0.0; order + 1];
        components[0] = (0.5 * u0).ln();
        Self::new(components)
    }

    pub fn order(&self) -> usize {
        self.0.len() - 1
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }

    /// Returns a copy with alpha_0 shifted by `delta`; scales the ansatz by
    /// exp(delta).
    pub fn shift_zeroth(&self, delta: f64) -> Self {
        let mut components = self.0.clone();
        components[0] += delta;
        Self(components)
    }

    /// Evaluates the exponent b(mu)^T alpha by Horner's rule.
    pub fn exponent(&self, mu: f64) -> f64 {
        let mut acc = 0.0;
        for &c in self.0.iter().rev() {
            acc = acc * mu + c;
        }
        acc
    }
}

impl std::ops::Index<usize> for Multipliers {
    type Output = f64;

    fn index(&self, index: usize) -> &f64 {
        &self.0[index]
    }
}

/// Stopping rule and regularization schedule for the dual solve.
#[derive(Clone, Debug)]
pub struct ClosureConfig {
    /// Gradient tolerance tau; the solve stops when
    /// ||<b psi> - u_r||_2 <= tau * max(1, u_0).
    pub gradient_tol: f64,
    /// Newton iteration budget per regularization stage.
    pub max_iterations: usize,
    /// Blend weights r toward the isotropic moments, tried in order:
    /// u_r = (1 - r) u + r u_0 u_iso.
    pub regularization_schedule: Vec<f64>,
}

impl Default for ClosureConfig {
    fn default() -> Self {
        Self {
            gradient_tol: 1e-6,
            max_iterations: 200,
            regularization_schedule: vec![0.0, 1e-8, 1e-6, 1e-4, 1e-2],
        }
    }
}

impl ClosureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.gradient_tol > 0.0) {
            return Err(Error::Config(format!(
                "gradient tolerance must be positive, got {}",
                self.gradient_tol
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::Config("need at least one Newton iteration".into()));
        }
        let s = &self.regularization_schedule;
        if s.is_empty() || s[0] != 0.0 {
            return Err(Error::Config(
                "regularization schedule must start at exactly 0".into(),
            ));
        }
        for pair in s.windows(2) {
            if !(pair[1] > pair[0]) {
                return Err(Error::Config(
                    "regularization schedule must be strictly increasing".into(),
                ));
            }
        }
        if s.iter().any(|&r| !(0.0..1.0).contains(&r)) {
            return Err(Error::Config(
                "regularization weights must lie in [0, 1)".into(),
            ));
        }
        Ok(())
    }
}

/// Outcome of a successful dual solve.
#[derive(Clone, Debug)]
pub struct DualReport {
    pub alpha: Multipliers,
    /// Total Newton iterations over all regularization stages.
    pub iterations: usize,
    /// Blend weight of the stage that converged (0 when none was needed).
    pub regularization: f64,
    /// Final unnormalized gradient norm ||<b psi> - u_r||_2.
    pub gradient_norm: f64,
}

/// Value, gradient and Hessian of the dual objective at alpha:
///
/// value = <exp(b^T alpha)> - u^T alpha,
/// gradient = <b exp(b^T alpha)> - u,
/// hessian = <b b^T exp(b^T alpha)>.
#[derive(Clone, Debug)]
pub struct DualEvaluation {
    pub value: f64,
    pub gradient: DVector<f64>,
    pub hessian: DMatrix<f64>,
}

/// Ansatz samples exp(b(mu_i)^T alpha) at the quadrature nodes.
pub fn ansatz_samples(alpha: &Multipliers, q: &Quadrature) -> Result<Vec<f64>> {
    let mut samples = vec![0.0; q.len()];
    ansatz_samples_into(alpha, q, &mut samples)?;
    Ok(samples)
}

fn ansatz_samples_into(alpha: &Multipliers, q: &Quadrature, out: &mut [f64]) -> Result<()> {
    debug_assert_eq!(out.len(), q.len());
    let mut max_exponent = f64::NEG_INFINITY;
    for (slot, &mu) in out.iter_mut().zip(q.nodes()) {
        let e = alpha.exponent(mu);
        max_exponent = max_exponent.max(e);
        *slot = e;
    }
    if !(max_exponent <= EXP_OVERFLOW_LIMIT) {
        return Err(Error::AnsatzOverflow {
            max_exponent,
            limit: EXP_OVERFLOW_LIMIT,
        });
    }
    for slot in out.iter_mut() {
        *slot = slot.exp();
    }
    Ok(())
}

/// Moments <mu^k psi> of given samples for k = 0..=degree.
fn sample_moments(q: &Quadrature, samples: &[f64], degree: usize) -> Vec<f64> {
    let mut moments = vec![0.0; degree + 1];
    let mut powers = samples.to_vec();
    for m in moments.iter_mut() {
        *m = q.integrate(&powers);
        for (p, mu) in powers.iter_mut().zip(q.nodes()) {
            *p *= mu;
        }
    }
    moments
}

/// Evaluates the dual objective, its gradient and its Hessian at alpha.
///
/// The Hessian is the Hankel matrix of the ansatz moments up to degree 2N
/// and is symmetric positive definite at every finite alpha.
pub fn dual_objective(
    alpha: &Multipliers,
    u: &MomentVector,
    q: &Quadrature,
) -> Result<DualEvaluation> {
    assert_eq!(alpha.len(), u.len(), "multiplier/moment length mismatch");
    let samples = ansatz_samples(alpha, q)?;
    Ok(evaluation_from_samples(
        &samples,
        u.as_slice(),
        alpha.as_slice(),
        q,
    ))
}

fn evaluation_from_samples(
    samples: &[f64],
    target: &[f64],
    alpha: &[f64],
    q: &Quadrature,
) -> DualEvaluation {
    let n = target.len();
    let moments = sample_moments(q, samples, 2 * (n - 1));
    let mut value = moments[0];
    for (a, t) in alpha.iter().zip(target) {
        value -= a * t;
    }
    let gradient = DVector::from_iterator(n, (0..n).map(|k| moments[k] - target[k]));
    let hessian = DMatrix::from_fn(n, n, |k, l| moments[k + l]);
    DualEvaluation {
        value,
        gradient,
        hessian,
    }
}

/// Moment flux F(u) = <mu b psi_u>; component k is <mu^(k+1) psi>.
pub fn flux_moments(alpha: &Multipliers, q: &Quadrature, order: usize) -> Result<MomentVector> {
    let samples = ansatz_samples(alpha, q)?;
    let mut powers: Vec<f64> = samples
        .iter()
        .zip(q.nodes())
        .map(|(s, mu)| s * mu)
        .collect();
    let mut components = vec![0.0; order + 1];
    for component in components.iter_mut() {
        *component = q.integrate(&powers);
        for (p, mu) in powers.iter_mut().zip(q.nodes()) {
            *p *= mu;
        }
    }
    Ok(MomentVector::new(components))
}

/// Kinetic upwind flux between a left and a right ansatz:
///
/// F_hat(u_L, u_R)_k = ∫_0^1 mu^(k+1) psi_L dmu + ∫_{-1}^0 mu^(k+1) psi_R dmu.
///
/// Consistent with [`flux_moments`]: F_hat(u, u) = F(u) exactly, because the
/// full-range integral is defined as the sum of the two half-range sums.
pub fn kinetic_flux(
    alpha_left: &Multipliers,
    alpha_right: &Multipliers,
    q: &Quadrature,
    order: usize,
) -> Result<MomentVector> {
    let left = ansatz_samples(alpha_left, q)?;
    let right = ansatz_samples(alpha_right, q)?;
    let mut powers_left: Vec<f64> = left.iter().zip(q.nodes()).map(|(s, mu)| s * mu).collect();
    let mut powers_right: Vec<f64> = right.iter().zip(q.nodes()).map(|(s, mu)| s * mu).collect();
    let mut components = vec![0.0; order + 1];
    for component in components.iter_mut() {
        *component = q.integrate_half(&powers_left, HalfRange::Positive)
            + q.integrate_half(&powers_right, HalfRange::Negative);
        for ((pl, pr), mu) in powers_left
            .iter_mut()
            .zip(powers_right.iter_mut())
            .zip(q.nodes())
        {
            *pl *= mu;
            *pr *= mu;
        }
    }
    Ok(MomentVector::new(components))
}

enum NewtonOutcome {
    Converged {
        alpha: Vec<f64>,
        iterations: usize,
        gradient_norm: f64,
    },
    Failed {
        iterations: usize,
        best_gradient_norm: f64,
    },
}

/// Damped Newton iteration on the dual for a fixed (already regularized and
/// normalized) target. `tol` applies to the Euclidean gradient norm.
fn newton_loop(
    start: &[f64],
    target: &[f64],
    q: &Quadrature,
    tol: f64,
    max_iterations: usize,
) -> NewtonOutcome {
    const ARMIJO_SLOPE: f64 = 1e-4;
    const MIN_STEP: f64 = 1e-13;

    let n = target.len();
    let mut alpha = start.to_vec();
    let mut samples = vec![0.0; q.len()];
    let wrapped = Multipliers::new(alpha.clone());
    if ansatz_samples_into(&wrapped, q, &mut samples).is_err() {
        return NewtonOutcome::Failed {
            iterations: 0,
            best_gradient_norm: f64::INFINITY,
        };
    }
    let mut eval = evaluation_from_samples(&samples, target, &alpha, q);
    let mut best_gradient_norm = eval.gradient.norm();
    let mut iterations = 0;

    loop {
        let gradient_norm = eval.gradient.norm();
        best_gradient_norm = best_gradient_norm.min(gradient_norm);
        if gradient_norm <= tol {
            // One extra full Newton step while the quadratic phase lasts;
            // drives the residual far below tau at negligible cost.
            if let Some(chol) = Cholesky::new(eval.hessian.clone()) {
                let step = chol.solve(&(-&eval.gradient));
                let polished: Vec<f64> =
                    alpha.iter().zip(step.iter()).map(|(a, d)| a + d).collect();
                let wrapped = Multipliers::new(polished.clone());
                if ansatz_samples_into(&wrapped, q, &mut samples).is_ok() {
                    let polished_eval = evaluation_from_samples(&samples, target, &polished, q);
                    if polished_eval.gradient.norm() < gradient_norm {
                        return NewtonOutcome::Converged {
                            alpha: polished,
                            iterations: iterations + 1,
                            gradient_norm: polished_eval.gradient.norm(),
                        };
                    }
                }
            }
            return NewtonOutcome::Converged {
                alpha,
                iterations,
                gradient_norm,
            };
        }
        if iterations >= max_iterations {
            return NewtonOutcome::Failed {
                iterations,
                best_gradient_norm,
            };
        }

        let Some(chol) = Cholesky::new(eval.hessian.clone()) else {
            return NewtonOutcome::Failed {
                iterations,
                best_gradient_norm,
            };
        };
        let direction = chol.solve(&(-&eval.gradient));
        let slope = eval.gradient.dot(&direction);
        debug_assert!(slope <= 0.0);

        let mut step = 1.0;
        let accepted = loop {
            let mut candidate = vec![0.0; n];
            for ((c, a), d) in candidate.iter_mut().zip(&alpha).zip(direction.iter()) {
                *c = a + step * d;
            }
            let wrapped = Multipliers::new(candidate.clone());
            let candidate_eval = match ansatz_samples_into(&wrapped, q, &mut samples) {
                Ok(()) => Some(evaluation_from_samples(&samples, target, &candidate, q)),
                Err(_) => None,
            };
            if let Some(candidate_eval) = candidate_eval {
                if candidate_eval.value.is_finite()
                    && candidate_eval.value <= eval.value + ARMIJO_SLOPE * step * slope
                {
                    break Some((candidate, candidate_eval));
                }
            }
            step *= 0.5;
            if step < MIN_STEP {
                break None;
            }
        };
        let Some((next_alpha, next_eval)) = accepted else {
            return NewtonOutcome::Failed {
                iterations,
                best_gradient_norm,
            };
        };
        alpha = next_alpha;
        eval = next_eval;
        iterations += 1;
    }
}

/// Solves the dual problem for the multipliers of `u`.
///
/// The target is regularized with the smallest schedule entry r that
/// converges, u_r = (1 - r) u + r u_0 u_iso, and the stopping rule is
/// ||<b psi> - u_r||_2 <= tau * max(1, u_0). The optional warm start is
/// used as the initial iterate; otherwise the isotropic multipliers of u_0
/// are used.
pub fn solve_dual_warm(
    u: &MomentVector,
    q: &Quadrature,
    cfg: &ClosureConfig,
    warm: Option<&Multipliers>,
) -> Result<DualReport> {
    cfg.validate()?;
    let u0 = u.u0();
    if !u.is_finite() || !(u0 > 0.0) {
        return Err(Error::NonRealizable(format!(
            "dual solve needs finite moments with u_0 > 0, got u_0 = {u0}"
        )));
    }
    let n = u.len();
    let order = n - 1;
    let log_u0 = u0.ln();

    // Normalized target (first component 1) and its isotropic counterpart.
    // Solving to relative accuracy tau on the u_0 = 1 slice gives an
    // unnormalized residual of at most tau * u_0 <= tau * max(1, u_0), so
    // the contract holds for dense and vacuum-level cells alike.
    let eta: Vec<f64> = u.as_slice().iter().map(|c| c / u0).collect();
    let iso: Vec<f64> = basis_integrals(order).iter().map(|c| 0.5 * c).collect();
    let tol = cfg.gradient_tol;

    // Warm start shifted onto the normalized slice.
    let iso_start = {
        let mut a = vec![0.0; n];
        a[0] = 0.5f64.ln();
        a
    };
    let start: Vec<f64> = match warm {
        Some(w) if w.len() == n && w.is_finite() => {
            let mut a = w.as_slice().to_vec();
            a[0] -= log_u0;
            a
        }
        _ => iso_start.clone(),
    };

    let mut attempts: Vec<&[f64]> = vec![&start];
    if start != iso_start {
        // Fall back to the isotropic guess when the warm start stalls.
        attempts.push(&iso_start);
    }

    let mut total_iterations = 0;
    let mut best_gradient_norm = f64::INFINITY;
    let mut last_regularization = 0.0;
    for &r in &cfg.regularization_schedule {
        last_regularization = r;
        let target: Vec<f64> = eta
            .iter()
            .zip(&iso)
            .map(|(e, i)| (1.0 - r) * e + r * i)
            .collect();
        for attempt in &attempts {
            match newton_loop(attempt, &target, q, tol, cfg.max_iterations) {
                NewtonOutcome::Converged {
                    alpha,
                    iterations,
                    gradient_norm,
                } => {
                    let mut components = alpha;
                    components[0] += log_u0;
                    return Ok(DualReport {
                        alpha: Multipliers::new(components),
                        iterations: total_iterations + iterations,
                        regularization: r,
                        gradient_norm: gradient_norm * u0,
                    });
                }
                NewtonOutcome::Failed {
                    iterations,
                    best_gradient_norm: g,
                } => {
                    total_iterations += iterations;
                    best_gradient_norm = best_gradient_norm.min(g * u0);
                }
            }
        }
    }
    Err(Error::ClosureFailure {
        gradient_norm: best_gradient_norm,
        iterations: total_iterations,
        regularization: last_regularization,
    })
}

/// [`solve_dual_warm`] with the default isotropic initial guess.
pub fn solve_dual(u: &MomentVector, q: &Quadrature, cfg: &ClosureConfig) -> Result<DualReport> {
    solve_dual_warm(u, q, cfg, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angular::normalize;
    use approx::assert_abs_diff_eq;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn quad() -> Quadrature {
        Quadrature::gauss_legendre_split(20).unwrap()
    }

    #[test]
    fn dual_objective_at_zero_matches_monomial_integrals() {
        let q = quad();
        let u = MomentVector::new(vec![2.0, 0.0, 2.0 / 3.0]);
        let eval = dual_objective(&Multipliers::zeros(2), &u, &q).unwrap();
        assert_abs_diff_eq!(eval.value, 2.0, epsilon = 1e-13);
        for g in eval.gradient.iter() {
            assert_abs_diff_eq!(*g, 0.0, epsilon = 1e-13);
        }
        let expected = [
            [2.0, 0.0, 2.0 / 3.0],
            [0.0, 2.0 / 3.0, 0.0],
            [2.0 / 3.0, 0.0, 2.0 / 5.0],
        ];
        for k in 0..3 {
            for l in 0..3 {
                assert_abs_diff_eq!(eval.hessian[(k, l)], expected[k][l], epsilon = 1e-13);
            }
        }

        let u = MomentVector::new(vec![1.0, 0.0, 1.0 / 3.0]);
        let eval = dual_objective(&Multipliers::zeros(2), &u, &q).unwrap();
        assert_abs_diff_eq!(eval.gradient[0], 1.0, epsilon = 1e-13);
        assert_abs_diff_eq!(eval.gradient[1], 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(eval.gradient[2], 1.0 / 3.0, epsilon = 1e-13);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let q = quad();
        let u = MomentVector::new(vec![1.8, 0.1, 0.7, 0.05]);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let alpha = Multipliers::new((0..4).map(|_| rng.random_range(-1.5..1.5)).collect());
            let eval = dual_objective(&alpha, &u, &q).unwrap();
            let h = 1e-6;
            for k in 0..4 {
                let mut plus = alpha.as_slice().to_vec();
                plus[k] += h;
                let mut minus = alpha.as_slice().to_vec();
                minus[k] -= h;
                let fp = dual_objective(&Multipliers::new(plus), &u, &q)
                    .unwrap()
                    .value;
                let fm = dual_objective(&Multipliers::new(minus), &u, &q)
                    .unwrap()
                    .value;
                let fd = (fp - fm) / (2.0 * h);
                let scale = eval.gradient[k].abs().max(1.0);
                assert!(
                    (eval.gradient[k] - fd).abs() / scale < 1e-5,
                    "gradient component {k} off: {} vs fd {}",
                    eval.gradient[k],
                    fd
                );
            }
        }
    }

    #[test]
    fn hessian_matches_finite_differences_of_gradient() {
        let q = quad();
        let u = MomentVector::new(vec![1.0, 0.0, 0.4]);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let alpha = Multipliers::new((0..3).map(|_| rng.random_range(-1.0..1.0)).collect());
            let eval = dual_objective(&alpha, &u, &q).unwrap();
            let h = 1e-6;
            for k in 0..3 {
                let mut plus = alpha.as_slice().to_vec();
                plus[k] += h;
                let mut minus = alpha.as_slice().to_vec();
                minus[k] -= h;
                let gp = dual_objective(&Multipliers::new(plus), &u, &q)
                    .unwrap()
                    .gradient;
                let gm = dual_objective(&Multipliers::new(minus), &u, &q)
                    .unwrap()
                    .gradient;
                for l in 0..3 {
                    let fd = (gp[l] - gm[l]) / (2.0 * h);
                    let scale = eval.hessian[(l, k)].abs().max(1.0);
                    assert!(
                        (eval.hessian[(l, k)] - fd).abs() / scale < 1e-5,
                        "hessian ({l},{k}) off"
                    );
                }
            }
        }
    }

    #[test]
    fn hessian_is_symmetric_positive_definite() {
        let q = quad();
        let u = MomentVector::new(vec![1.0, 0.0, 1.0 / 3.0, 0.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let alpha = Multipliers::new((0..4).map(|_| rng.random_range(-2.0..2.0)).collect());
            let eval = dual_objective(&alpha, &u, &q).unwrap();
            for k in 0..4 {
                for l in 0..4 {
                    assert_abs_diff_eq!(
                        eval.hessian[(k, l)],
                        eval.hessian[(l, k)],
                        epsilon = 1e-12 * eval.hessian[(k, k)].abs().max(1.0)
                    );
                }
            }
            let eigen = eval.hessian.clone().symmetric_eigen();
            assert!(
                eigen.eigenvalues.iter().all(|&e| e > 0.0),
                "hessian not SPD"
            );
        }
    }

    #[test]
    fn overflow_is_reported() {
        let q = quad();
        let u = MomentVector::new(vec![1.0, 0.0]);
        let alpha = Multipliers::new(vec![800.0, 0.0]);
        match dual_objective(&alpha, &u, &q) {
            Err(Error::AnsatzOverflow { .. }) => {}
            other => panic!("expected overflow, got {other:?}"),
        }
    }

    #[test]
    fn ansatz_samples_basic_values() {
        let q = quad();
        let samples = ansatz_samples(&Multipliers::zeros(2), &q).unwrap();
        assert!(samples.iter().all(|&s| s == 1.0));

        let samples = ansatz_samples(&Multipliers::new(vec![2.0f64.ln(), 0.0, 0.0]), &q).unwrap();
        for s in samples {
            assert_abs_diff_eq!(s, 2.0, epsilon = 1e-15);
        }

        let alpha = Multipliers::new(vec![0.0, 1.0, 0.0]);
        assert_abs_diff_eq!(alpha.exponent(0.5), 0.5);
        let samples = ansatz_samples(&alpha, &q).unwrap();
        for (s, mu) in samples.iter().zip(q.nodes()) {
            assert_abs_diff_eq!(*s, mu.exp(), epsilon = 1e-15);
        }
    }

    #[test]
    fn solve_dual_recovers_trivial_ansatz() {
        let q = quad();
        let cfg = ClosureConfig::default();

        let report =
            solve_dual(&MomentVector::new(vec![2.0, 0.0, 2.0 / 3.0, 0.0]), &q, &cfg).unwrap();
        assert_eq!(report.regularization, 0.0);
        for a in report.alpha.as_slice() {
            assert_abs_diff_eq!(*a, 0.0, epsilon = 1e-10);
        }

        let report =
            solve_dual(&MomentVector::new(vec![1.0, 0.0, 1.0 / 3.0, 0.0]), &q, &cfg).unwrap();
        assert_abs_diff_eq!(report.alpha[0], -(2.0f64.ln()), epsilon = 1e-10);
        for a in &report.alpha.as_slice()[1..] {
            assert_abs_diff_eq!(*a, 0.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn solve_dual_round_trips_exponential_moments() {
        let q = quad();
        let cfg = ClosureConfig::default();
        let samples: Vec<f64> = q.nodes().iter().map(|mu| (0.5 * mu).exp()).collect();
        let u = q.moments_of_samples(3, &samples);
        let report = solve_dual(&u, &q, &cfg).unwrap();
        let expected = [0.0, 0.5, 0.0, 0.0];
        for (a, e) in report.alpha.as_slice().iter().zip(expected) {
            assert_abs_diff_eq!(*a, e, epsilon = 1e-6);
        }
        assert_eq!(report.regularization, 0.0);
    }

    #[test]
    fn solve_dual_round_trips_random_multipliers() {
        let q = quad();
        let cfg = ClosureConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..40 {
            let order = rng.random_range(1..=3usize);
            let alpha =
                Multipliers::new((0..=order).map(|_| rng.random_range(-3.0..3.0)).collect());
            let samples = ansatz_samples(&alpha, &q).unwrap();
            let u = q.moments_of_samples(order, &samples);
            let report = solve_dual(&u, &q, &cfg).unwrap();
            // Recovered multipliers reproduce the moments within 10 tau.
            let recovered = ansatz_samples(&report.alpha, &q).unwrap();
            let v = q.moments_of_samples(order, &recovered);
            let mut err = 0.0f64;
            for (a, b) in u.iter().zip(v.iter()) {
                err += (a - b) * (a - b);
            }
            assert!(
                err.sqrt() <= 10.0 * cfg.gradient_tol * u.u0().max(1.0),
                "round trip residual too large: {}",
                err.sqrt()
            );
        }
    }

    #[test]
    fn warm_start_reduces_iterations() {
        let q = quad();
        let cfg = ClosureConfig::default();
        let alpha = Multipliers::new(vec![-0.3, 1.1, 0.2, -0.4]);
        let samples = ansatz_samples(&alpha, &q).unwrap();
        let u = q.moments_of_samples(3, &samples);
        let cold = solve_dual(&u, &q, &cfg).unwrap();
        let warm = solve_dual_warm(&u, &q, &cfg, Some(&cold.alpha)).unwrap();
        assert!(warm.iterations <= cold.iterations);
        assert!(warm.iterations <= 2);
    }

    #[test]
    fn solve_dual_scales_with_density() {
        // Homogeneity: moments scaled by c shift alpha_0 by ln(c).
        let q = quad();
        let cfg = ClosureConfig::default();
        let samples: Vec<f64> = q.nodes().iter().map(|mu| (0.8 * mu - 0.2).exp()).collect();
        let u = q.moments_of_samples(2, &samples);
        let base = solve_dual(&u, &q, &cfg).unwrap();
        for c in [1e-8, 1e-3, 1e4] {
            let scaled = solve_dual(&u.scale(c), &q, &cfg).unwrap();
            assert_abs_diff_eq!(scaled.alpha[0] - base.alpha[0], c.ln(), epsilon = 1e-5);
            assert_abs_diff_eq!(scaled.alpha[1], base.alpha[1], epsilon = 1e-4);
        }
    }

    #[test]
    fn solve_dual_rejects_nonpositive_density() {
        let q = quad();
        let cfg = ClosureConfig::default();
        assert!(solve_dual(&MomentVector::new(vec![0.0, 0.0]), &q, &cfg).is_err());
        assert!(solve_dual(&MomentVector::new(vec![-1.0, 0.0]), &q, &cfg).is_err());
    }

    #[test]
    fn nonrealizable_moments_fail_with_diagnostics() {
        let q = quad();
        let cfg = ClosureConfig::default();
        // |u_1| > u_0 cannot come from a non-negative density.
        match solve_dual(&MomentVector::new(vec![1.0, 1.5]), &q, &cfg) {
            Err(Error::ClosureFailure { regularization, .. }) => {
                assert_eq!(regularization, 1e-2);
            }
            other => panic!("expected closure failure, got {other:?}"),
        }
    }

    #[test]
    fn flux_moments_of_isotropic_ansatz() {
        let q = quad();
        let f = flux_moments(&Multipliers::zeros(3), &q, 3).unwrap();
        assert_abs_diff_eq!(f[0], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(f[1], 2.0 / 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(f[2], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(f[3], 2.0 / 5.0, epsilon = 1e-14);

        // Linearity in the density: alpha_0 = ln c scales the flux by c.
        let c: f64 = 3.7;
        let scaled = flux_moments(&Multipliers::new(vec![c.ln(), 0.0, 0.0, 0.0]), &q, 3).unwrap();
        for (s, f) in scaled.iter().zip(f.iter()) {
            assert_abs_diff_eq!(*s, c * f, epsilon = 1e-13);
        }
    }

    #[test]
    fn kinetic_flux_is_consistent() {
        let q = quad();
        let alpha = Multipliers::new(vec![0.3, -0.9, 0.4]);
        let upwind = kinetic_flux(&alpha, &alpha, &q, 2).unwrap();
        let physical = flux_moments(&alpha, &q, 2).unwrap();
        // Same sums in the same order: bitwise identical.
        assert_eq!(upwind.as_slice(), physical.as_slice());

        let zero = Multipliers::zeros(2);
        let f = kinetic_flux(&zero, &zero, &q, 2).unwrap();
        assert_abs_diff_eq!(f[0], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(f[1], 2.0 / 3.0, epsilon = 1e-14);
    }

    #[test]
    fn kinetic_flux_upwinds_constant_states() {
        let q = quad();
        let c: f64 = 0.25;
        let left = Multipliers::zeros(2); // psi_L = 1
        let right = Multipliers::new(vec![c.ln(), 0.0, 0.0]); // psi_R = c
        let f = kinetic_flux(&left, &right, &q, 2).unwrap();
        assert_abs_diff_eq!(f[0], (1.0 - c) / 2.0, epsilon = 1e-14);
        // Even first moment picks up both halves: 1/3 + c/3.
        assert_abs_diff_eq!(f[1], (1.0 + c) / 3.0, epsilon = 1e-14);

        let same = kinetic_flux(&left, &left, &q, 2).unwrap();
        assert_abs_diff_eq!(same[1], 2.0 / 3.0, epsilon = 1e-14);
    }

    #[test]
    fn positive_half_contribution_is_monotone_in_left_state() {
        let q = quad();
        let lo = Multipliers::new(vec![-0.4, 0.7, 0.1]);
        let hi = lo.shift_zeroth(0.3); // pointwise larger ansatz
        let vac = Multipliers::new(vec![-40.0, 0.0, 0.0]); // negligible right state
        let f_lo = kinetic_flux(&lo, &vac, &q, 2).unwrap();
        let f_hi = kinetic_flux(&hi, &vac, &q, 2).unwrap();
        for k in [0usize, 2] {
            assert!(
                f_hi[k] >= f_lo[k],
                "component {k} decreased under larger psi_L"
            );
        }
    }

    #[test]
    fn round_trip_through_samples_and_normalization() {
        let q = quad();
        let cfg = ClosureConfig::default();
        let alpha = Multipliers::new(vec![0.2, -1.0, 0.5, 0.3]);
        let samples = ansatz_samples(&alpha, &q).unwrap();
        let u = q.moments_of_samples(3, &samples);
        let normalized = normalize(&u).unwrap();
        let back = normalized.moments();
        let report = solve_dual(&back, &q, &cfg).unwrap();
        let gradient = dual_objective(&report.alpha, &back, &q)
            .unwrap()
            .gradient
            .norm();
        assert!(gradient <= 10.0 * cfg.gradient_tol * back.u0().max(1.0));
    }
}
