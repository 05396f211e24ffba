//! Manufactured-solution setup for the convergence study.
//!
//! The exact kinetic density has the form of an M_1 entropy ansatz,
//!
//! psi_a(t, x, mu) = exp(alpha_0(t, x) + alpha_1(t, x) mu),
//! alpha_0 = -K - sin(x - t) - b,  alpha_1 = K + sin(x - t),
//!
//! on the periodic domain (-pi, pi). Applying the transport operator with
//! sigma_s = 0 and sigma_a = 4 (1 - cos(x - t)) leaves the residual
//!
//! Q(t, x, mu) = [cos(x - t) (1 - mu)^2 + sigma_a(t, x)] psi_a >= 0,
//!
//! which is used as the emitting source, so psi_a solves the transport
//! equation and its moments solve every M_N system with N >= 1. The offset
//!
//! b = -K + 1 - ln((K - 1) / (2 sinh(K - 1)))
//!
//! normalizes the density so that max over (t, x) of <psi_a> is one;
//! larger K pushes the moments toward the realizability boundary.

use crate::angular::MomentVector;
use crate::error::{Error, Result};
use crate::solver::{Grid, RunConfig};
use crate::{ClosureConfig, Quadrature};

/// Steepness parameter, offset and the derived fields of the manufactured
/// solution.
#[derive(Clone, Copy, Debug)]
pub struct ManufacturedFields {
    k: f64,
    b_offset: f64,
}

impl ManufacturedFields {
    /// Requires K > 1 (the offset involves ln((K-1)/2 sinh(K-1))).
    pub fn new(k: f64) -> Result<Self> {
        if !(k > 1.0) {
            return Err(Error::Config(format!(
                "the manufactured solution needs K > 1, got {k}"
            )));
        }
        let b_offset = -k + 1.0 - ((k - 1.0) / (2.0 * (k - 1.0).sinh())).ln();
        Ok(Self { k, b_offset })
    }

    pub fn steepness(&self) -> f64 {
        self.k
    }

    pub fn b_offset(&self) -> f64 {
        self.b_offset
    }

    pub fn alpha0(&self, t: f64, x: f64) -> f64 {
        -self.k - (x - t).sin() - self.b_offset
    }

    pub fn alpha1(&self, t: f64, x: f64) -> f64 {
        self.k + (x - t).sin()
    }

    pub fn sigma_a(&self, t: f64, x: f64) -> f64 {
        4.0 * (1.0 - (x - t).cos())
    }

    /// The exact kinetic density psi_a.
    pub fn density(&self, t: f64, x: f64, mu: f64) -> f64 {
        (self.alpha0(t, x) + self.alpha1(t, x) * mu).exp()
    }

    /// The manufactured source Q; non-negative for every K and b.
    pub fn source(&self, t: f64, x: f64, mu: f64) -> f64 {
        let shifted = 1.0 - mu;
        ((x - t).cos() * shifted * shifted + self.sigma_a(t, x)) * self.density(t, x, mu)
    }

    /// Exact zeroth moment <psi_a> = exp(alpha_0) 2 sinh(alpha_1) / alpha_1.
    pub fn exact_zeroth_moment(&self, t: f64, x: f64) -> f64 {
        let a1 = self.alpha1(t, x);
        self.alpha0(t, x).exp() * 2.0 * a1.sinh() / a1
    }

    /// Exact moments <b psi_a> up to the given order.
    pub fn exact_moments(&self, t: f64, x: f64, order: usize) -> MomentVector {
        let scale = self.alpha0(t, x).exp();
        let moments = exp_monomial_moments(self.alpha1(t, x), order);
        MomentVector::new(moments.iter().map(|m| scale * m).collect())
    }

    /// Cell means of the exact moments via fixed-order Gauss quadrature
    /// in x over each cell.
    pub fn exact_cell_means(&self, grid: &Grid, t: f64, order: usize) -> Vec<MomentVector> {
        cell_average(grid, |x| self.exact_moments(t, x, order))
    }

    /// Cell means of the exact zeroth moment, for the error norms.
    pub fn exact_zeroth_cell_means(&self, grid: &Grid, t: f64) -> Vec<f64> {
        let means = cell_average(grid, |x| {
            MomentVector::new(vec![self.exact_zeroth_moment(t, x), 0.0])
        });
        means.into_iter().map(|m| m.u0()).collect()
    }
}

/// 5-point Gauss-Legendre rule on [-1/2, 1/2] used for spatial cell means.
const CELL_RULE: [(f64, f64); 5] = [
    (-0.453089922969332, 0.118463442528095),
    (-0.269234655052841, 0.239314335249683),
    (0.0, 0.284444444444444),
    (0.269234655052841, 0.239314335249683),
    (0.453089922969332, 0.118463442528095),
];

fn cell_average(grid: &Grid, f: impl Fn(f64) -> MomentVector) -> Vec<MomentVector> {
    (0..grid.nx)
        .map(|j| {
            let center = grid.center(j);
            let mut mean: Option<MomentVector> = None;
            for (node, weight) in CELL_RULE {
                let value = f(center + node * grid.dz).scale(weight);
                mean = Some(match mean {
                    Some(acc) => &acc + &value,
                    None => value,
                });
            }
            mean.expect("cell rule is non-empty")
        })
        .collect()
}

/// Integrals of mu^k exp(a mu) over [-1, 1] for k = 0..=order.
///
/// Uses the integration-by-parts recurrence for |a| >= 2 and the Taylor
/// series in a below that, where the recurrence loses digits.
pub fn exp_monomial_moments(a: f64, order: usize) -> Vec<f64> {
    let mut moments = vec![0.0; order + 1];
    if a.abs() >= 2.0 {
        let sinh2 = 2.0 * a.sinh();
        let cosh2 = 2.0 * a.cosh();
        moments[0] = sinh2 / a;
        for k in 1..=order {
            let boundary = if k % 2 == 0 { sinh2 } else { cosh2 };
            moments[k] = (boundary - k as f64 * moments[k - 1]) / a;
        }
    } else {
        for (k, slot) in moments.iter_mut().enumerate() {
            let mut term = 1.0; // a^j / j!
            let mut sum = 0.0;
            for j in 0..40 {
                if (k + j) % 2 == 0 {
                    sum += term * 2.0 / (k + j + 1) as f64;
                }
                term *= a / (j + 1) as f64;
            }
            *slot = sum;
        }
    }
    moments
}

/// Run configuration of the manufactured-solution test on (-pi, pi) with
/// periodic boundaries, t_final = pi / 5, sigma_s = 0 and the manufactured
/// absorption and source. The exact density is an M_1 ansatz, so its
/// moments solve every M_N system; the published table uses order 3.
/// Source moments are computed by angular quadrature of the closed-form Q;
/// the initial condition is the cell average of the exact moments at t = 0.
pub fn manufactured_config(
    k: f64,
    nx: usize,
    order: usize,
    closure: ClosureConfig,
    points_per_half: usize,
) -> Result<RunConfig> {
    let fields = ManufacturedFields::new(k)?;
    let mut config = RunConfig::new(
        order,
        nx,
        (-std::f64::consts::PI, std::f64::consts::PI),
        std::f64::consts::PI / 5.0,
    );
    config.points_per_half = points_per_half;
    config.closure = closure;
    config.sigma_a = Box::new(move |t, x| fields.sigma_a(t, x));
    config.sigma_s = Box::new(|_, _| 0.0);
    let source_quadrature = Quadrature::gauss_legendre_split(points_per_half)?;
    config.source_moments = Box::new(move |t, x| {
        let samples: Vec<f64> = source_quadrature
            .nodes()
            .iter()
            .map(|&mu| fields.source(t, x, mu))
            .collect();
        source_quadrature.moments_of_samples(order, &samples)
    });
    config.initial_means = Box::new(move |grid| fields.exact_cell_means(grid, 0.0, order));
    Ok(config)
}
