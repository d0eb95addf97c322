//! Gauss-Legendre quadrature.
//!
//! Nodes and weights on `[-1, 1]` are computed once by Newton iteration on the
//! three-term Legendre recurrence and then mapped affinely onto each panel.
//! Integrands that are naturally expressed in the log domain are combined with
//! [`log_sum_exp`], which subtracts the largest term before exponentiating.

use std::f64::consts::PI;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(order: usize) -> Result<Self> {
        if order == 0 {
            return Err(Error::contract("Gauss-Legendre order must be at least 1"));
        }
        let n = order;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut z = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, deriv) = legendre_with_derivative(n, z);
                dp = deriv;
                let dz = p / deriv;
                z -= dz;
                if dz.abs() <= 1e-15 {
                    break;
                }
            }
            let (_, deriv) = legendre_with_derivative(n, z);
            if deriv.is_finite() {
                dp = deriv;
            }
            let w = 2.0 / ((1.0 - z * z) * dp * dp);
            nodes[i] = -z;
            nodes[n - 1 - i] = z;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            // the middle node is exactly zero by symmetry
            nodes[n / 2] = 0.0;
        }
        Ok(Self { nodes, weights })
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// Nodes on the reference interval `[-1, 1]`, ascending.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Nodes and weights mapped onto `[lo, hi]`.
    pub fn mapped(&self, lo: f64, hi: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate(&self, lo: f64, hi: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.mapped(lo, hi).map(|(x, w)| w * f(x)).sum()
    }

    /// Sum of the rule over consecutive panels `[b[k], b[k+1]]`.
    pub fn integrate_panels(&self, breakpoints: &[f64], mut f: impl FnMut(f64) -> f64) -> f64 {
        breakpoints
            .windows(2)
            .map(|w| self.integrate(w[0], w[1], &mut f))
            .sum()
    }
}

/// Legendre polynomial `P_n(z)` and its derivative.
fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for j in 2..=n {
        let jf = j as f64;
        let p2 = ((2.0 * jf - 1.0) * z * p1 - (jf - 1.0) * p0) / jf;
        p0 = p1;
        p1 = p2;
    }
    let deriv = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, deriv)
}

/// `log(sum(exp(terms)))`, stable for large magnitudes. Empty input gives `-inf`.
pub fn log_sum_exp(terms: &[f64]) -> f64 {
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY || !max.is_finite() {
        return max;
    }
    let sum: f64 = terms.iter().map(|&t| (t - max).exp()).sum();
    max + sum.ln()
}

/// Panel breakpoints on `[0, hi]` that double in width starting from `scale`:
/// `0, s, 2s, 4s, ...` followed by `hi`.
///
/// Used for integrands concentrated within a few multiples of `scale` of the
/// origin, such as an exponential density with small mean.
pub fn graded_breakpoints(hi: f64, scale: f64) -> Vec<f64> {
    let mut points = vec![0.0];
    if scale > 0.0 && scale < hi {
        let mut edge = scale;
        while edge < hi {
            points.push(edge);
            edge *= 2.0;
        }
    }
    points.push(hi);
    points
}
