//! Realizability of truncated moment problems on [-1, 1].
//!
//! A moment vector is realizable when some non-negative density on [-1, 1]
//! reproduces it. The realizable set is a convex cone; this module provides
//!
//! - closed-form predicates for full moments of order N <= 3 and for the
//!   mixed-moment problems of order 1 and 2,
//! - an independent feasibility oracle (non-negative least squares on a
//!   fine quadrature grid) used to cross-validate the predicates,
//! - constructive atomic representing densities for the order-2 mixed
//!   problem,
//! - Euclidean distances to the boundary of the normalized realizable set,
//! - a seeded generator of realizable vectors for property tests.
//!
//! Margins are reported as the smallest inequality slack, with each slack
//! divided by max(1, u_0)^p where p is the homogeneity degree of its
//! inequality, so one tolerance works across scales.

mod distance;
mod nnls;

pub use distance::{distance_to_boundary, MAX_BOUNDARY_DISTANCE};
pub use nnls::{
    lp_realizability_oracle, lp_realizability_oracle_mixed2, nonnegative_least_squares,
    OracleOutcome,
};

use crate::angular::{HalfRange, MomentVector, Quadrature};
use crate::error::{Error, Result};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Default predicate tolerance; exact-arithmetic realizability only
/// degrades by rounding, so the band is kept near machine precision.
pub const DEFAULT_TOLERANCE: f64 = 1e-12;

/// Outcome of a realizability predicate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RealizabilityVerdict {
    pub realizable: bool,
    /// Smallest scaled inequality slack; negative outside the cone.
    pub margin: f64,
    /// Tolerance the verdict was formed with: realizable iff
    /// margin >= -tolerance.
    pub tolerance: f64,
}

impl RealizabilityVerdict {
    fn from_scaled_slacks(slacks: impl IntoIterator<Item = f64>, tolerance: f64) -> Self {
        let margin = slacks.into_iter().fold(f64::INFINITY, f64::min);
        Self {
            realizable: margin >= -tolerance,
            margin,
            tolerance,
        }
    }
}

/// Full-moment realizability for N <= 3.
///
/// - N = 1: u_0 >= |u_1|.
/// - N = 2: u_0 >= |u_1|, u_0 u_2 >= u_1^2 and u_2 <= u_0. The last
///   inequality is required for densities supported on [-1, 1]; without it
///   (1, 0, 2) would pass.
/// - N = 3: positive semidefiniteness of the two localizing Hankel forms
///   of (1 +/- mu) d nu: u_0 +/- u_1 >= 0, u_2 +/- u_3 >= 0 and
///   (u_0 +/- u_1)(u_2 +/- u_3) >= (u_1 +/- u_2)^2.
///
/// The N = 1 and N = 3 conditions are cross-validated against
/// [`lp_realizability_oracle`] in the test suite.
pub fn is_realizable_full(u: &MomentVector, tol: f64) -> Result<RealizabilityVerdict> {
    let order = u.order();
    let c = u.as_slice();
    let scale1 = u.u0().abs().max(1.0);
    let scale2 = scale1 * scale1;
    let slacks: Vec<f64> = match order {
        1 => vec![c[0] / scale1, (c[0] - c[1].abs()) / scale1],
        2 => vec![
            c[0] / scale1,
            (c[0] - c[1].abs()) / scale1,
            (c[0] * c[2] - c[1] * c[1]) / scale2,
            (c[0] - c[2]) / scale1,
        ],
        3 => {
            let mut s = Vec::with_capacity(6);
            for sign in [1.0, -1.0] {
                let d0 = c[0] + sign * c[1];
                let d2 = c[2] + sign * c[3];
                let off = c[1] + sign * c[2];
                s.push(d0 / scale1);
                s.push(d2 / scale1);
                s.push((d0 * d2 - off * off) / scale2);
            }
            s
        }
        n => {
            return Err(Error::Config(format!(
                "full-moment realizability predicates support N <= 3, got N = {n}"
            )))
        }
    };
    Ok(RealizabilityVerdict::from_scaled_slacks(slacks, tol))
}

/// Classical first-order mixed-moment realizability:
/// u_1+ - u_1- <= u_0 and +/- u_1+/- >= 0.
pub fn is_realizable_mixed1(u0: f64, u1_plus: f64, u1_minus: f64) -> RealizabilityVerdict {
    let scale = u0.abs().max(1.0);
    let slacks = [
        (u0 - (u1_plus - u1_minus)) / scale,
        u1_plus / scale,
        -u1_minus / scale,
    ];
    RealizabilityVerdict::from_scaled_slacks(slacks, DEFAULT_TOLERANCE)
}

/// Moments (u_0, u_1, u_2+, u_2-) of the differentiable mixed-moment basis
/// of order two: full zeroth and first moments plus the second moments over
/// each half-range.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MixedMoment2Vector {
    pub u0: f64,
    pub u1: f64,
    pub u2_plus: f64,
    pub u2_minus: f64,
}

/// Order-2 mixed-moment realizability:
///
/// u_2+ - sqrt(u_2- (u_0 - u_2+)) <= u_1 <= sqrt(u_2+ (u_0 - u_2-)) - u_2-
///
/// together with u_0, u_2+/- >= 0 (and u_2+/- <= u_0, without which the
/// square-root arguments go negative).
pub fn is_realizable_mixed2(v: &MixedMoment2Vector, tol: f64) -> RealizabilityVerdict {
    let scale = v.u0.abs().max(1.0);
    let lower = v.u2_plus - (v.u2_minus * (v.u0 - v.u2_plus)).max(0.0).sqrt();
    let upper = (v.u2_plus * (v.u0 - v.u2_minus)).max(0.0).sqrt() - v.u2_minus;
    let slacks = [
        v.u0 / scale,
        v.u2_plus / scale,
        v.u2_minus / scale,
        (v.u0 - v.u2_plus) / scale,
        (v.u0 - v.u2_minus) / scale,
        (v.u1 - lower) / scale,
        (upper - v.u1) / scale,
    ];
    RealizabilityVerdict::from_scaled_slacks(slacks, tol)
}

/// A non-negative combination of Dirac deltas in angle.
#[derive(Clone, Debug, PartialEq)]
pub struct AtomicDensity {
    /// Pairs (location in [-1, 1], weight >= 0).
    pub atoms: Vec<(f64, f64)>,
}

impl AtomicDensity {
    /// Mixed moments of order two generated by the atoms.
    pub fn mixed2_moments(&self) -> MixedMoment2Vector {
        let mut v = MixedMoment2Vector {
            u0: 0.0,
            u1: 0.0,
            u2_plus: 0.0,
            u2_minus: 0.0,
        };
        for &(location, weight) in &self.atoms {
            v.u0 += weight;
            v.u1 += weight * location;
            let second = weight * location * location;
            if location >= 0.0 {
                v.u2_plus += second;
            } else {
                v.u2_minus += second;
            }
        }
        v
    }
}

/// Threshold below which a normalized half-range second moment is treated
/// as exactly zero when reconstructing atoms.
const DEGENERATE_SECOND_MOMENT: f64 = 1e-13;

/// Constructive representing density for realizable order-2 mixed moments:
/// one atom per half-range at eta_2+/- / eta_1+/- with weight
/// u_0 eta_1+/-^2 / eta_2+/-, where
///
/// eta_1+/- = eta_2+/- (eta_1 +/- eta_2-/+ s) / (eta_2- + eta_2+),
/// s = sqrt((eta_2- + eta_2+ - eta_1^2) / (eta_2- eta_2+)).
///
/// Vanishing half-range second moments degenerate to an atom at mu = 0; in
/// particular u = u_0 (1, 0, 0, 0) is represented by u_0 delta(mu).
pub fn atomic_density_mixed2(v: &MixedMoment2Vector) -> Result<AtomicDensity> {
    let verdict = is_realizable_mixed2(v, DEFAULT_TOLERANCE);
    if !verdict.realizable {
        return Err(Error::NonRealizable(format!(
            "mixed moments {v:?} are not realizable (margin {:.3e})",
            verdict.margin
        )));
    }
    if !(v.u0 > 0.0) {
        return Err(Error::NonRealizable(format!(
            "atomic reconstruction needs u_0 > 0, got {}",
            v.u0
        )));
    }
    let eta1 = v.u1 / v.u0;
    let eta2p = (v.u2_plus / v.u0).max(0.0);
    let eta2m = (v.u2_minus / v.u0).max(0.0);

    let plus_degenerate = eta2p <= DEGENERATE_SECOND_MOMENT;
    let minus_degenerate = eta2m <= DEGENERATE_SECOND_MOMENT;

    let atoms = if plus_degenerate && minus_degenerate {
        vec![(0.0, v.u0)]
    } else if minus_degenerate {
        // All second moment on the positive half; realizability pins
        // eta_2+ <= eta_1, so the division is safe.
        let location = (eta2p / eta1).clamp(0.0, 1.0);
        let weight = v.u0 * eta1 * eta1 / eta2p;
        vec![(location, weight), (0.0, (v.u0 - weight).max(0.0))]
    } else if plus_degenerate {
        let location = (eta2m / eta1).clamp(-1.0, 0.0);
        let weight = v.u0 * eta1 * eta1 / eta2m;
        vec![(location, weight), (0.0, (v.u0 - weight).max(0.0))]
    } else {
        let s = ((eta2p + eta2m - eta1 * eta1).max(0.0) / (eta2m * eta2p)).sqrt();
        let denominator = eta2m + eta2p;
        let eta1p = eta2p * (eta1 + eta2m * s) / denominator;
        let eta1m = eta2m * (eta1 - eta2p * s) / denominator;
        let location_plus = (eta2p / eta1p).clamp(0.0, 1.0);
        let location_minus = (eta2m / eta1m).clamp(-1.0, 0.0);
        vec![
            (location_plus, v.u0 * eta1p * eta1p / eta2p),
            (location_minus, v.u0 * eta1m * eta1m / eta2m),
        ]
    };
    Ok(AtomicDensity { atoms })
}

/// Seeded generator of realizable moment vectors: moments of the strictly
/// positive density exp(g) with g drawn uniformly from [-2, 2] per node.
/// Always realizable by construction.
pub fn random_realizable(order: usize, seed: u64, q: &Quadrature) -> MomentVector {
    let samples = random_positive_samples(seed, q);
    q.moments_of_samples(order, &samples)
}

/// Seeded realizable order-2 mixed moments generated the same way.
pub fn random_realizable_mixed2(seed: u64, q: &Quadrature) -> MixedMoment2Vector {
    let samples = random_positive_samples(seed, q);
    let mu2: Vec<f64> = samples
        .iter()
        .zip(q.nodes())
        .map(|(s, mu)| s * mu * mu)
        .collect();
    let mu1: Vec<f64> = samples
        .iter()
        .zip(q.nodes())
        .map(|(s, mu)| s * mu)
        .collect();
    MixedMoment2Vector {
        u0: q.integrate(&samples),
        u1: q.integrate(&mu1),
        u2_plus: q.integrate_half(&mu2, HalfRange::Positive),
        u2_minus: q.integrate_half(&mu2, HalfRange::Negative),
    }
}

fn random_positive_samples(seed: u64, q: &Quadrature) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..q.len())
        .map(|_| rng.random_range(-2.0f64..2.0).exp())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn quad() -> Quadrature {
        Quadrature::gauss_legendre_split(20).unwrap()
    }

    #[test]
    fn full_moment_examples_order_two() {
        let boundary = MomentVector::new(vec![1.0, 1.0, 1.0]);
        let verdict = is_realizable_full(&boundary, DEFAULT_TOLERANCE).unwrap();
        assert!(verdict.realizable);
        assert_abs_diff_eq!(verdict.margin, 0.0, epsilon = 1e-15);

        let outside = MomentVector::new(vec![1.0, 0.9, 0.8]);
        let verdict = is_realizable_full(&outside, DEFAULT_TOLERANCE).unwrap();
        assert!(!verdict.realizable);
        assert_abs_diff_eq!(verdict.margin, 0.8 - 0.81, epsilon = 1e-15);

        // (1, 0, 2) satisfies the two-inequality form but has no density on
        // [-1, 1]; the support cap u_2 <= u_0 rejects it.
        let unsupported = MomentVector::new(vec![1.0, 0.0, 2.0]);
        assert!(
            !is_realizable_full(&unsupported, DEFAULT_TOLERANCE)
                .unwrap()
                .realizable
        );
    }

    #[test]
    fn full_moment_examples_order_three() {
        let iso = MomentVector::new(vec![1.0, 0.0, 1.0 / 3.0, 0.0]);
        assert!(
            is_realizable_full(&iso, DEFAULT_TOLERANCE)
                .unwrap()
                .realizable
        );

        let atom_at_one = MomentVector::new(vec![1.0, 1.0, 1.0, 1.0]);
        let verdict = is_realizable_full(&atom_at_one, DEFAULT_TOLERANCE).unwrap();
        assert!(verdict.realizable);
        assert_abs_diff_eq!(verdict.margin, 0.0, epsilon = 1e-15);

        let outside = MomentVector::new(vec![1.0, 0.0, 1.0 / 3.0, 0.9]);
        assert!(
            !is_realizable_full(&outside, DEFAULT_TOLERANCE)
                .unwrap()
                .realizable
        );
    }

    #[test]
    fn order_one_is_the_interval_condition() {
        assert!(
            is_realizable_full(&MomentVector::new(vec![1.0, -1.0]), 0.0)
                .unwrap()
                .realizable
        );
        assert!(
            !is_realizable_full(&MomentVector::new(vec![1.0, 1.5]), 1e-12)
                .unwrap()
                .realizable
        );
    }

    #[test]
    fn unsupported_order_is_rejected() {
        let u = MomentVector::new(vec![1.0, 0.0, 0.3, 0.0, 0.2]);
        assert!(is_realizable_full(&u, DEFAULT_TOLERANCE).is_err());
    }

    #[test]
    fn mixed1_examples() {
        let verdict = is_realizable_mixed1(1.0, 0.5, -0.5);
        assert!(verdict.realizable);
        assert_abs_diff_eq!(verdict.margin, 0.0, epsilon = 1e-15);

        assert!(!is_realizable_mixed1(1.0, 0.2, 0.1).realizable);
        assert!(is_realizable_mixed1(1.0, 0.0, 0.0).realizable);
    }

    #[test]
    fn mixed2_examples() {
        let collapsed = MixedMoment2Vector {
            u0: 1.0,
            u1: 0.0,
            u2_plus: 0.5,
            u2_minus: 0.5,
        };
        let verdict = is_realizable_mixed2(&collapsed, DEFAULT_TOLERANCE);
        assert!(verdict.realizable);
        assert_abs_diff_eq!(verdict.margin, 0.0, epsilon = 1e-15);

        let shifted = MixedMoment2Vector {
            u0: 1.0,
            u1: 0.1,
            ..collapsed
        };
        assert!(!is_realizable_mixed2(&shifted, DEFAULT_TOLERANCE).realizable);

        let dirac = MixedMoment2Vector {
            u0: 1.0,
            u1: 0.0,
            u2_plus: 0.0,
            u2_minus: 0.0,
        };
        assert!(is_realizable_mixed2(&dirac, DEFAULT_TOLERANCE).realizable);
    }

    #[test]
    fn atomic_reconstruction_examples() {
        let v = MixedMoment2Vector {
            u0: 1.0,
            u1: 0.0,
            u2_plus: 0.5,
            u2_minus: 0.5,
        };
        let density = atomic_density_mixed2(&v).unwrap();
        let mut atoms = density.atoms.clone();
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        assert_abs_diff_eq!(atoms[0].0, -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(atoms[0].1, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(atoms[1].0, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(atoms[1].1, 0.5, epsilon = 1e-12);

        let dirac = MixedMoment2Vector {
            u0: 1.0,
            u1: 0.0,
            u2_plus: 0.0,
            u2_minus: 0.0,
        };
        let density = atomic_density_mixed2(&dirac).unwrap();
        assert_eq!(density.atoms, vec![(0.0, 1.0)]);

        let outside = MixedMoment2Vector {
            u0: 1.0,
            u1: 0.9,
            u2_plus: 0.1,
            u2_minus: 0.0,
        };
        assert!(atomic_density_mixed2(&outside).is_err());
    }

    #[test]
    fn atomic_reconstruction_reproduces_random_moments() {
        let q = quad();
        for seed in 0..200 {
            let v = random_realizable_mixed2(seed, &q);
            let density = atomic_density_mixed2(&v).unwrap();
            for &(location, weight) in &density.atoms {
                assert!((-1.0..=1.0).contains(&location));
                assert!(weight >= 0.0);
            }
            let back = density.mixed2_moments();
            let scale = v.u0.max(1.0);
            assert_abs_diff_eq!(back.u0, v.u0, epsilon = 1e-12 * scale);
            assert_abs_diff_eq!(back.u1, v.u1, epsilon = 1e-12 * scale);
            assert_abs_diff_eq!(back.u2_plus, v.u2_plus, epsilon = 1e-12 * scale);
            assert_abs_diff_eq!(back.u2_minus, v.u2_minus, epsilon = 1e-12 * scale);
        }
    }

    #[test]
    fn atomic_reconstruction_handles_one_sided_moments() {
        // Density supported on the positive half only.
        let v = MixedMoment2Vector {
            u0: 1.0,
            u1: 0.4,
            u2_plus: 0.2,
            u2_minus: 0.0,
        };
        let density = atomic_density_mixed2(&v).unwrap();
        let back = density.mixed2_moments();
        assert_abs_diff_eq!(back.u0, v.u0, epsilon = 1e-12);
        assert_abs_diff_eq!(back.u1, v.u1, epsilon = 1e-12);
        assert_abs_diff_eq!(back.u2_plus, v.u2_plus, epsilon = 1e-12);
        assert_abs_diff_eq!(back.u2_minus, 0.0, epsilon = 1e-12);

        let mirrored = MixedMoment2Vector {
            u0: 1.0,
            u1: -0.4,
            u2_plus: 0.0,
            u2_minus: 0.2,
        };
        let density = atomic_density_mixed2(&mirrored).unwrap();
        let back = density.mixed2_moments();
        assert_abs_diff_eq!(back.u1, mirrored.u1, epsilon = 1e-12);
        assert_abs_diff_eq!(back.u2_minus, mirrored.u2_minus, epsilon = 1e-12);
    }

    #[test]
    fn random_realizable_is_deterministic_and_realizable() {
        let q = quad();
        for order in 1..=3 {
            let a = random_realizable(order, 123, &q);
            let b = random_realizable(order, 123, &q);
            assert_eq!(a.as_slice(), b.as_slice());
            assert!(
                is_realizable_full(&a, DEFAULT_TOLERANCE)
                    .unwrap()
                    .realizable
            );
            let c = random_realizable(order, 124, &q);
            assert_ne!(a.as_slice(), c.as_slice());
        }
    }

    #[test]
    fn cone_and_convexity_properties() {
        let q = quad();
        for seed in 0..50 {
            let u = random_realizable(3, seed, &q);
            for c in [1e-6, 0.5, 1.0, 42.0, 1e8] {
                let scaled = u.scale(c);
                assert!(
                    is_realizable_full(&scaled, DEFAULT_TOLERANCE)
                        .unwrap()
                        .realizable,
                    "cone property failed for c = {c}"
                );
            }
            let v = random_realizable(3, seed + 1000, &q);
            for lambda in [0.0, 0.25, 0.5, 0.75, 1.0] {
                let blend = u.scale(1.0 - lambda).axpy(lambda, &v);
                assert!(
                    is_realizable_full(&blend, DEFAULT_TOLERANCE)
                        .unwrap()
                        .realizable,
                    "convexity failed for lambda = {lambda}"
                );
            }
        }
    }

    #[test]
    fn moments_of_nonnegative_samples_are_realizable() {
        use proptest::prelude::*;
        let mut runner = proptest::test_runner::TestRunner::default();
        let q = quad();
        let strategy = proptest::collection::vec(0.0f64..10.0, q.len());
        runner
            .run(&strategy, |mut samples| {
                // Sprinkle hard zeros to hit near-boundary moments.
                for s in samples.iter_mut().step_by(3) {
                    *s = 0.0;
                }
                let total: f64 = samples.iter().sum();
                prop_assume!(total > 0.0);
                for order in 1..=3usize {
                    let u = q.moments_of_samples(order, &samples);
                    let verdict = is_realizable_full(&u, DEFAULT_TOLERANCE).unwrap();
                    prop_assert!(verdict.realizable, "margin {:.3e}", verdict.margin);
                }
                Ok(())
            })
            .unwrap();
    }

    #[test]
    fn margins_flip_sign_across_the_boundary() {
        // Walk through the N = 2 boundary along u_2.
        for u2 in [0.5, 0.25 + 1e-9, 0.25, 0.25 - 1e-9, 0.1] {
            let u = MomentVector::new(vec![1.0, 0.5, u2]);
            let verdict = is_realizable_full(&u, 0.0).unwrap();
            assert_eq!(verdict.realizable, u2 >= 0.25, "u2 = {u2}");
        }
    }
}
