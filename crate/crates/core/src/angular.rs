//! Angular basis and quadrature over the direction cosine mu in [-1, 1].
//!
//! Moments of a kinetic density psi are angular averages against the
//! full-moment monomial basis b = (1, mu, ..., mu^N),
//!
//! u_k = <mu^k psi> = ∫_{-1}^{1} mu^k psi(mu) dmu.
//!
//! All angular integrals in the crate are evaluated with a half-range
//! Gauss-Legendre rule: one Gauss rule mapped onto [-1, 0] and one onto
//! [0, 1]. The kinetic upwind flux integrates mu*psi separately over the
//! two half-ranges (the integrand has a kink at mu = 0), so the split is
//! what restores spectral accuracy there; full-range integrals are defined
//! as the sum of the two half-range sums so that the identity
//! `integrate = integrate_half(-) + integrate_half(+)` holds exactly.

use crate::error::{Error, Result};

/// Samples below this threshold are considered significantly negative for a
/// quantity that represents a kinetic density.
pub const NEGATIVE_SAMPLE_FLOOR: f64 = -1e-12;

/// Tolerance for the |mu| <= 1 domain check.
const MU_DOMAIN_SLACK: f64 = 1e-12;

/// Selects one of the two half-ranges of mu in [-1, 1].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HalfRange {
    /// mu in [-1, 0]
    Negative,
    /// mu in [0, 1]
    Positive,
}

/// The full-moment monomial angular basis b = (1, mu, ..., mu^N).
///
/// The zeroth component is identically one, so u_0 is the local particle
/// density. The smallest supported model is M_1 (order >= 1).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Basis {
    order: usize,
}

impl Basis {
    pub fn new(order: usize) -> Result<Self> {
        if order < 1 {
            return Err(Error::Config(format!(
                "basis order must be at least 1 (the smallest model is M1), got {order}"
            )));
        }
        Ok(Self { order })
    }

    /// Maximal monomial degree N.
    pub fn order(&self) -> usize {
        self.order
    }

    /// Number of basis functions n = N + 1.
    pub fn len(&self) -> usize {
        self.order + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Evaluates (1, mu, ..., mu^N).
    pub fn eval(&self, mu: f64) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.len()];
        self.eval_into(mu, &mut out)?;
        Ok(out)
    }

    /// Evaluates the basis into a caller-provided buffer of length N + 1.
    pub fn eval_into(&self, mu: f64, out: &mut [f64]) -> Result<()> {
        if !(mu.abs() <= 1.0 + MU_DOMAIN_SLACK) {
            return Err(Error::Domain(format!(
                "basis argument mu = {mu} lies outside [-1, 1]"
            )));
        }
        assert_eq!(out.len(), self.len(), "basis buffer length mismatch");
        let mut power = 1.0;
        for slot in out.iter_mut() {
            *slot = power;
            power *= mu;
        }
        Ok(())
    }
}

/// Evaluates the monomial basis of the given order at mu.
pub fn eval_basis(order: usize, mu: f64) -> Result<Vec<f64>> {
    Basis::new(order)?.eval(mu)
}

/// Exact integrals <b> of the monomial basis: <mu^k> = 2/(k+1) for even k,
/// zero for odd k.
pub fn basis_integrals(order: usize) -> Vec<f64> {
    (0..=order)
        .map(|k| {
            if k % 2 == 0 {
                2.0 / (k as f64 + 1.0)
            } else {
                0.0
            }
        })
        .collect()
}

/// A vector of monomial moments u = (u_0, ..., u_N).
///
/// Plain data: realizability is a property checked by the predicates in
/// [`crate::realizability`], not an invariant of the container.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentVector(Vec<f64>);

impl MomentVector {
    /// Wraps raw components. Panics on fewer than two entries: the smallest
    /// supported model is M_1.
    pub fn new(components: Vec<f64>) -> Self {
        assert!(
            components.len() >= 2,
            "moment vectors need at least two components (M1)"
        );
        Self(components)
    }

    pub fn zeros(order: usize) -> Self {
        Self::new(vec![0.0; order + 1])
    }

    /// Moments u_0 * (1, 0, 1/3, 0, ...) of the isotropic density with
    /// particle density u_0.
    pub fn isotropic(order: usize, u0: f64) -> Self {
        let mut components = basis_integrals(order);
        for c in &mut components {
            *c *= 0.5 * u0;
        }
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

    /// Local particle density u_0.
    pub fn u0(&self) -> f64 {
        self.0[0]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.0.iter()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }

    /// Componentwise a + s * b.
    pub fn axpy(&self, scale: f64, other: &MomentVector) -> MomentVector {
        assert_eq!(self.len(), other.len(), "moment length mismatch");
        MomentVector::new(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a + scale * b)
                .collect(),
        )
    }

    pub fn scale(&self, factor: f64) -> MomentVector {
        MomentVector::new(self.0.iter().map(|c| c * factor).collect())
    }
}

impl std::ops::Index<usize> for MomentVector {
    type Output = f64;

    fn index(&self, index: usize) -> &f64 {
        &self.0[index]
    }
}

impl std::ops::Add for &MomentVector {
    type Output = MomentVector;

    fn add(self, rhs: &MomentVector) -> MomentVector {
        self.axpy(1.0, rhs)
    }
}

impl std::ops::Sub for &MomentVector {
    type Output = MomentVector;

    fn sub(self, rhs: &MomentVector) -> MomentVector {
        self.axpy(-1.0, rhs)
    }
}

impl From<MomentVector> for Vec<f64> {
    fn from(u: MomentVector) -> Vec<f64> {
        u.0
    }
}

/// Moments split into the particle density u_0 > 0 and the normalized
/// moments eta_k = u_k / u_0.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalizedMoments {
    pub u0: f64,
    pub eta: Vec<f64>,
}

impl NormalizedMoments {
    /// Reconstructs u_0 * (1, eta).
    pub fn moments(&self) -> MomentVector {
        let mut components = Vec::with_capacity(self.eta.len() + 1);
        components.push(self.u0);
        components.extend(self.eta.iter().map(|e| e * self.u0));
        MomentVector::new(components)
    }

    pub fn order(&self) -> usize {
        self.eta.len()
    }
}

/// Splits a moment vector into density and normalized moments.
pub fn normalize(u: &MomentVector) -> Result<NormalizedMoments> {
    let u0 = u.u0();
    if !(u0 > 0.0) {
        return Err(Error::NonRealizable(format!(
            "cannot normalize moments with u_0 = {u0} <= 0"
        )));
    }
    Ok(NormalizedMoments {
        u0,
        eta: u.as_slice()[1..].iter().map(|c| c / u0).collect(),
    })
}

/// Half-range Gauss-Legendre quadrature on [-1, 1].
///
/// Nodes are stored in ascending order: the first `split_index` nodes lie in
/// (-1, 0), the rest in (0, 1). No node is exactly zero and none touches the
/// interval ends. The negative-half rule is the exact mirror image of the
/// positive-half rule, so odd integrands cancel bitwise.
#[derive(Clone, Debug, PartialEq)]
pub struct Quadrature {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    split: usize,
}

impl Quadrature {
    /// Builds the rule with `points_per_half` Gauss-Legendre points on each
    /// of [-1, 0] and [0, 1]. Each half integrates polynomials up to degree
    /// 2 * points_per_half - 1 exactly.
    pub fn gauss_legendre_split(points_per_half: usize) -> Result<Self> {
        if points_per_half < 2 {
            return Err(Error::Config(format!(
                "need at least 2 quadrature points per half, got {points_per_half}"
            )));
        }
        let (base_nodes, base_weights) = gauss_legendre_rule(points_per_half);

        let m = points_per_half;
        let mut nodes = vec![0.0; 2 * m];
        let mut weights = vec![0.0; 2 * m];
        for i in 0..m {
            // Map [-1, 1] -> [0, 1]; mirror for the negative half.
            let mu = 0.5 * (base_nodes[i] + 1.0);
            let w = 0.5 * base_weights[i];
            nodes[m + i] = mu;
            weights[m + i] = w;
            nodes[m - 1 - i] = -mu;
            weights[m - 1 - i] = w;
        }
        Ok(Self {
            nodes,
            weights,
            split: m,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Number of nodes in the negative half; `nodes()[..split_index()]` lie
    /// in (-1, 0).
    pub fn split_index(&self) -> usize {
        self.split
    }

    pub fn points_per_half(&self) -> usize {
        self.split
    }

    fn half_sum(&self, samples: &[f64], half: HalfRange) -> f64 {
        assert_eq!(
            samples.len(),
            self.len(),
            "sample count must match node count"
        );
        // Accumulate in |mu|-ascending order on both halves: mirrored
        // sample sets then sum bitwise identically, so mirror-symmetric
        // solver states stay exactly symmetric.
        let mut sum = 0.0;
        match half {
            HalfRange::Negative => {
                let pairs = self.weights[..self.split]
                    .iter()
                    .zip(&samples[..self.split]);
                for (w, s) in pairs.rev() {
                    sum += w * s;
                }
            }
            HalfRange::Positive => {
                let pairs = self.weights[self.split..]
                    .iter()
                    .zip(&samples[self.split..]);
                for (w, s) in pairs {
                    sum += w * s;
                }
            }
        }
        sum
    }

    /// Integral over [-1, 1] of a function given by its samples at the
    /// nodes. Defined as the sum of the two half-range integrals.
    pub fn integrate(&self, samples: &[f64]) -> f64 {
        self.half_sum(samples, HalfRange::Negative) + self.half_sum(samples, HalfRange::Positive)
    }

    /// Integral over one half-range of mu.
    pub fn integrate_half(&self, samples: &[f64], half: HalfRange) -> f64 {
        self.half_sum(samples, half)
    }

    /// Moments u_k = sum_i w_i mu_i^k psi_i of density samples at the nodes.
    ///
    /// The samples are expected to be (essentially) non-negative; see
    /// [`has_significant_negative`] for the check used by diagnostics.
    pub fn moments_of_samples(&self, order: usize, psi: &[f64]) -> MomentVector {
        assert_eq!(psi.len(), self.len(), "sample count must match node count");
        let mut components = vec![0.0; order + 1];
        let mut powers: Vec<f64> = psi.to_vec();
        for component in components.iter_mut() {
            *component = self.integrate(&powers);
            for (p, mu) in powers.iter_mut().zip(&self.nodes) {
                *p *= mu;
            }
        }
        MomentVector::new(components)
    }
}

/// True when any sample lies below [`NEGATIVE_SAMPLE_FLOOR`]; densities
/// should be non-negative, so callers typically surface this as a warning.
pub fn has_significant_negative(samples: &[f64]) -> bool {
    samples.iter().any(|&s| s < NEGATIVE_SAMPLE_FLOOR)
}

/// Gauss-Legendre nodes (ascending) and weights on [-1, 1].
///
/// Newton iteration on the Legendre polynomial P_m with the standard
/// Chebyshev initial guess; accurate to machine precision for the orders
/// used here (m <= a few hundred).
fn gauss_legendre_rule(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    // Exploit symmetry: compute the non-negative roots, mirror the rest.
    let half = m.div_ceil(2);
    for k in 0..half {
        // k-th root counting from the largest.
        let mut x = (std::f64::consts::PI * (k as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(m, x);
            dp = d;
            let step = p / d;
            x -= step;
            if step.abs() <= 1e-15 * x.abs().max(1.0) {
                let (p2, d2) = legendre_with_derivative(m, x);
                dp = d2;
                x -= p2 / d2;
                break;
            }
        }
        nodes[m - 1 - k] = x;
        nodes[k] = -x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[m - 1 - k] = w;
        weights[k] = w;
    }
    if m % 2 == 1 {
        // The middle root is exactly zero.
        nodes[half - 1] = 0.0;
        let (_, d) = legendre_with_derivative(m, 0.0);
        weights[half - 1] = 2.0 / (d * d);
    }
    (nodes, weights)
}

/// Evaluates P_m(x) and P_m'(x) via the three-term recurrence.
fn legendre_with_derivative(m: usize, x: f64) -> (f64, f64) {
    let mut p_prev = 1.0;
    let mut p = x;
    for k in 2..=m {
        let kf = k as f64;
        let p_next = ((2.0 * kf - 1.0) * x * p - (kf - 1.0) * p_prev) / kf;
        p_prev = p;
        p = p_next;
    }
    let derivative = if (x * x - 1.0).abs() < 1e-300 {
        // Only reachable at the interval ends, which are never Gauss nodes.
        0.5 * (m * (m + 1)) as f64 * if x > 0.0 { 1.0 } else { -1.0 }
    } else {
        (m as f64) * (x * p - p_prev) / (x * x - 1.0)
    };
    (p, derivative)
}
