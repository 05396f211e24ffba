//! Euclidean distance of normalized moments to the realizability boundary.
//!
//! Distances are measured on the u_0 = 1 slice of the cone in the
//! coordinates (eta_1, ..., eta_N):
//!
//! - N = 1: the set is [-1, 1], so d = 1 - |eta_1| analytically.
//! - N = 2: the set is {eta_1^2 <= eta_2 <= 1}. The distance to the
//!   parabola minimizes the quartic (eta_1 - t)^2 + (eta_2 - t^2)^2, whose
//!   stationary points solve the cubic 2t^3 + (1 - 2 eta_2) t - eta_1 = 0;
//!   the top face contributes 1 - eta_2.
//! - N = 3: the boundary consists of moments of two-atom densities with
//!   one atom pinned at an interval end. These form two smooth
//!   2-parameter surfaces, sampled on a (t, b)-grid and refined by a
//!   damped Gauss-Newton projection; reported accuracy is about 1e-6.
//!
//! The relative distance divides by the maximal distance attained inside
//! the normalized set: 1 for M_1, 1/2 for M_2 and 1/5 for M_3.

use crate::angular::{MomentVector, NormalizedMoments};
use crate::error::{Error, Result};
use crate::realizability::{is_realizable_full, DEFAULT_TOLERANCE};

/// Maximal distance to the boundary within the normalized realizable set,
/// indexed by N - 1.
pub const MAX_BOUNDARY_DISTANCE: [f64; 3] = [1.0, 0.5, 0.2];

/// Distance d of realizable normalized moments to the realizability
/// boundary, and the relative distance d divided by the maximal distance.
pub fn distance_to_boundary(eta: &NormalizedMoments) -> Result<(f64, f64)> {
    let order = eta.order();
    if !(1..=3).contains(&order) {
        return Err(Error::Config(format!(
            "boundary distances support 1 <= N <= 3, got N = {order}"
        )));
    }
    let mut components = Vec::with_capacity(order + 1);
    components.push(1.0);
    components.extend_from_slice(&eta.eta);
    let unit = MomentVector::new(components);
    let verdict = is_realizable_full(&unit, DEFAULT_TOLERANCE)?;
    if !verdict.realizable {
        return Err(Error::NonRealizable(format!(
            "distance queried outside the realizable set (margin {:.3e})",
            verdict.margin
        )));
    }
    let d = match order {
        1 => 1.0 - eta.eta[0].abs(),
        2 => distance_m2(eta.eta[0], eta.eta[1]),
        _ => distance_m3(&[eta.eta[0], eta.eta[1], eta.eta[2]]),
    }
    .max(0.0);
    Ok((d, d / MAX_BOUNDARY_DISTANCE[order - 1]))
}

fn distance_m2(eta1: f64, eta2: f64) -> f64 {
    let mut best = 1.0 - eta2; // top face {eta_2 = 1, |eta_1| <= 1}
    let squared = |t: f64| {
        let dx = eta1 - t;
        let dy = eta2 - t * t;
        dx * dx + dy * dy
    };
    let p = 0.5 * (1.0 - 2.0 * eta2);
    let q = -0.5 * eta1;
    let mut candidates = depressed_cubic_roots(p, q);
    candidates.push(-1.0);
    candidates.push(1.0);
    for t in candidates {
        if (-1.0..=1.0).contains(&t) {
            best = best.min(squared(t).sqrt());
        }
    }
    best
}

/// Real roots of t^3 + p t + q = 0, polished by one Newton step.
fn depressed_cubic_roots(p: f64, q: f64) -> Vec<f64> {
    let mut roots = if p == 0.0 && q == 0.0 {
        vec![0.0]
    } else {
        let disc = 0.25 * q * q + p * p * p / 27.0;
        if disc > 0.0 {
            let s = disc.sqrt();
            vec![(-0.5 * q + s).cbrt() + (-0.5 * q - s).cbrt()]
        } else if disc == 0.0 {
            vec![3.0 * q / p, -1.5 * q / p]
        } else {
            // Three real roots; here p < 0 necessarily.
            let r = (-p / 3.0).sqrt();
            let cos_theta = (1.5 * q / (p * r)).clamp(-1.0, 1.0);
            let theta = cos_theta.acos();
            (0..3)
                .map(|k| 2.0 * r * ((theta - 2.0 * std::f64::consts::PI * k as f64) / 3.0).cos())
                .collect()
        }
    };
    for t in roots.iter_mut() {
        let f = *t * *t * *t + p * *t + q;
        let df = 3.0 * *t * *t + p;
        if df.abs() > 1e-12 {
            *t -= f / df;
        }
    }
    roots
}

/// The two smooth boundary surfaces of the normalized order-3 set:
/// moments of (1 - b) delta(mu -/+ 1) + b delta(mu - t).
#[derive(Clone, Copy, Debug)]
enum BoundaryFamily {
    AtomAtPlusOne,
    AtomAtMinusOne,
}

impl BoundaryFamily {
    fn point(self, t: f64, b: f64) -> [f64; 3] {
        let a = 1.0 - b;
        match self {
            Self::AtomAtPlusOne => [a + b * t, a + b * t * t, a + b * t * t * t],
            Self::AtomAtMinusOne => [-a + b * t, a + b * t * t, -a + b * t * t * t],
        }
    }

    /// Partial derivatives with respect to t and b.
    fn jacobian(self, t: f64, b: f64) -> ([f64; 3], [f64; 3]) {
        let dt = [b, 2.0 * b * t, 3.0 * b * t * t];
        let db = match self {
            Self::AtomAtPlusOne => [t - 1.0, t * t - 1.0, t * t * t - 1.0],
            Self::AtomAtMinusOne => [t + 1.0, t * t - 1.0, t * t * t + 1.0],
        };
        (dt, db)
    }

    fn squared_distance(self, eta: &[f64; 3], t: f64, b: f64) -> f64 {
        let x = self.point(t, b);
        (0..3).map(|i| (x[i] - eta[i]) * (x[i] - eta[i])).sum()
    }
}

const GRID_T: usize = 25;
const GRID_B: usize = 20;
const REFINE_STARTS: usize = 5;

fn distance_m3(eta: &[f64; 3]) -> f64 {
    let mut best = f64::INFINITY;
    for family in [
        BoundaryFamily::AtomAtPlusOne,
        BoundaryFamily::AtomAtMinusOne,
    ] {
        // Coarse sweep over the parameter rectangle, then local refinement
        // from the closest grid samples.
        let mut samples: Vec<(f64, f64, f64)> = Vec::with_capacity(GRID_T * GRID_B);
        for i in 0..GRID_T {
            let t = -1.0 + 2.0 * i as f64 / (GRID_T - 1) as f64;
            for j in 0..GRID_B {
                let b = j as f64 / (GRID_B - 1) as f64;
                samples.push((family.squared_distance(eta, t, b), t, b));
            }
        }
        samples.sort_by(|a, b| a.0.total_cmp(&b.0));
        for &(f0, t0, b0) in samples.iter().take(REFINE_STARTS) {
            best = best.min(refine_projection(family, eta, t0, b0, f0));
        }
    }
    best.sqrt()
}

/// Damped Gauss-Newton minimization of the squared distance over the
/// parameter rectangle [-1, 1] x [0, 1]. Returns the refined squared
/// distance.
fn refine_projection(
    family: BoundaryFamily,
    eta: &[f64; 3],
    mut t: f64,
    mut b: f64,
    mut f: f64,
) -> f64 {
    let mut damping = 1e-10;
    for _ in 0..80 {
        let x = family.point(t, b);
        let residual = [x[0] - eta[0], x[1] - eta[1], x[2] - eta[2]];
        let (jt, jb) = family.jacobian(t, b);
        let g = [
            jt.iter().zip(&residual).map(|(a, r)| a * r).sum::<f64>(),
            jb.iter().zip(&residual).map(|(a, r)| a * r).sum::<f64>(),
        ];
        let h00: f64 = jt.iter().map(|a| a * a).sum::<f64>() + damping;
        let h11: f64 = jb.iter().map(|a| a * a).sum::<f64>() + damping;
        let h01: f64 = jt.iter().zip(&jb).map(|(a, c)| a * c).sum();
        let det = h00 * h11 - h01 * h01;
        if det.abs() < 1e-300 {
            break;
        }
        let step_t = (-g[0] * h11 + g[1] * h01) / det;
        let step_b = (g[0] * h01 - g[1] * h00) / det;
        let t_next = (t + step_t).clamp(-1.0, 1.0);
        let b_next = (b + step_b).clamp(0.0, 1.0);
        let f_next = family.squared_distance(eta, t_next, b_next);
        if f_next < f {
            let moved = (t_next - t).abs() + (b_next - b).abs();
            t = t_next;
            b = b_next;
            f = f_next;
            damping = (damping * 0.25).max(1e-12);
            if moved < 1e-13 {
                break;
            }
        } else {
            damping *= 10.0;
            if damping > 1e8 {
                break;
            }
        }
    }
    f
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn normalized(eta: &[f64]) -> NormalizedMoments {
        NormalizedMoments {
            u0: 1.0,
            eta: eta.to_vec(),
        }
    }

    #[test]
    fn order_one_is_analytic() {
        let (d, d_rel) = distance_to_boundary(&normalized(&[0.0])).unwrap();
        assert_eq!(d, 1.0);
        assert_eq!(d_rel, 1.0);
        let (d, d_rel) = distance_to_boundary(&normalized(&[-0.75])).unwrap();
        assert_abs_diff_eq!(d, 0.25);
        assert_abs_diff_eq!(d_rel, 0.25);
    }

    #[test]
    fn order_two_known_points() {
        // Deepest point of the M2 set.
        let (d, d_rel) = distance_to_boundary(&normalized(&[0.0, 0.5])).unwrap();
        assert_abs_diff_eq!(d, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(d_rel, 1.0, epsilon = 1e-12);

        // Isotropic point: the parabola is closer than the top face.
        let (d, d_rel) = distance_to_boundary(&normalized(&[0.0, 1.0 / 3.0])).unwrap();
        assert_abs_diff_eq!(d, 1.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(d_rel, 2.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn order_two_matches_dense_sampling() {
        let points = [
            [0.3, 0.4],
            [-0.5, 0.6],
            [0.1, 0.9],
            [0.7, 0.55],
            [0.0, 0.02],
        ];
        for eta in points {
            let (d, _) = distance_to_boundary(&normalized(&eta)).unwrap();
            let mut brute = 1.0 - eta[1];
            for i in 0..=200_000 {
                let t = -1.0 + 2.0 * i as f64 / 200_000.0;
                let dx = eta[0] - t;
                let dy = eta[1] - t * t;
                brute = brute.min((dx * dx + dy * dy).sqrt());
            }
            assert_abs_diff_eq!(d, brute, epsilon = 1e-8);
        }
    }

    #[test]
    fn boundary_points_have_zero_distance() {
        for t in [-0.9, -0.3, 0.2, 0.8] {
            // Single atom at t: on the parabola for N = 2.
            let (d, _) = distance_to_boundary(&normalized(&[t, t * t])).unwrap();
            assert_abs_diff_eq!(d, 0.0, epsilon = 1e-10);
            // Moment curve point for N = 3.
            let (d, _) = distance_to_boundary(&normalized(&[t, t * t, t * t * t])).unwrap();
            assert_abs_diff_eq!(d, 0.0, epsilon = 1e-10);
        }
        // Two-atom boundary density for N = 3.
        let (b, t) = (0.4, -0.35);
        let eta = BoundaryFamily::AtomAtPlusOne.point(t, b);
        let (d, _) = distance_to_boundary(&normalized(&eta)).unwrap();
        assert_abs_diff_eq!(d, 0.0, epsilon = 1e-10);
    }

    #[test]
    fn order_three_matches_brute_force() {
        let points = [
            [0.0, 1.0 / 3.0, 0.0],
            [0.2, 0.4, 0.1],
            [-0.3, 0.5, -0.2],
            [0.05, 0.25, 0.01],
        ];
        for eta in points {
            let (d, _) = distance_to_boundary(&normalized(&eta)).unwrap();
            let mut brute = f64::INFINITY;
            for family in [
                BoundaryFamily::AtomAtPlusOne,
                BoundaryFamily::AtomAtMinusOne,
            ] {
                for i in 0..=1000 {
                    let t = -1.0 + 2.0 * i as f64 / 1000.0;
                    for j in 0..=1000 {
                        let b = j as f64 / 1000.0;
                        brute = brute.min(family.squared_distance(&eta, t, b));
                    }
                }
            }
            let brute = brute.sqrt();
            assert!(
                (d - brute).abs() < 1e-5,
                "refined {d} vs brute {brute} at {eta:?}"
            );
            assert!(d <= brute + 1e-12, "refinement must not exceed sampling");
        }
    }

    #[test]
    fn order_three_maximal_distance_on_symmetry_axis() {
        // The deepest point of the normalized M3 set lies on the symmetry
        // axis eta_1 = eta_3 = 0; the maximal distance is 1/5.
        let mut best = 0.0f64;
        for i in 0..=400 {
            let s = i as f64 / 400.0;
            let m = NormalizedMoments {
                u0: 1.0,
                eta: vec![0.0, s, 0.0],
            };
            if let Ok((d, _)) = distance_to_boundary(&m) {
                best = best.max(d);
            }
        }
        assert_abs_diff_eq!(best, 0.2, epsilon = 2e-4);
    }

    #[test]
    fn rejects_outside_points_and_bad_orders() {
        assert!(distance_to_boundary(&normalized(&[1.5])).is_err());
        assert!(distance_to_boundary(&normalized(&[0.5, 0.1])).is_err());
        assert!(distance_to_boundary(&normalized(&[0.0, 0.3, 0.0, 0.1])).is_err());
    }

    #[test]
    fn cubic_roots_are_correct() {
        // (t - 1)(t + 1) t = t^3 - t
        let roots = depressed_cubic_roots(-1.0, 0.0);
        let mut sorted = roots.clone();
        sorted.sort_by(f64::total_cmp);
        assert_eq!(sorted.len(), 3);
        assert_abs_diff_eq!(sorted[0], -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(sorted[1], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(sorted[2], 1.0, epsilon = 1e-12);

        // Single real root of t^3 + t - 2 = 0 is t = 1.
        let roots = depressed_cubic_roots(1.0, -2.0);
        assert_eq!(roots.len(), 1);
        assert_abs_diff_eq!(roots[0], 1.0, epsilon = 1e-12);
    }
}
