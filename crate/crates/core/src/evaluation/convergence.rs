//! Convergence of the finite-epsilon mixed detector to its limit.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::detectors::DetectionProblem;
use crate::error::{Error, Result};
use crate::pixels::PixelMatrix;
use crate::priors::{MixedPriorSchedule, Prior};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub epsilon: f64,
    pub sup_error: f64,
    /// `sup_error` divided by the previous row's, if any.
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceStudy {
    pub beta: f64,
    pub rows: Vec<ConvergenceRow>,
    /// Least-squares slope of `ln sup_error` against `ln epsilon`.
    pub fitted_order: Option<f64>,
}

impl ConvergenceStudy {
    pub fn is_strictly_decreasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].sup_error < w[0].sup_error)
    }
}

/// Least-squares slope of `ln y` on `ln x`, over points with positive `y`.
/// `None` with fewer than two usable points.
pub fn fitted_log_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(a, b)| **a > 0.0 && **b > 0.0)
        .map(|(a, b)| (a.ln(), b.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Sup over `pixels` of `|finite_eps_mixed(eps) - mixed_star|` for each
/// `eps` in the strictly decreasing list `epsilons`.
pub fn convergence_study(
    problem: &DetectionProblem,
    beta: f64,
    base: &Prior,
    epsilons: &[f64],
    pixels: &PixelMatrix,
) -> Result<ConvergenceStudy> {
    if epsilons.is_empty() {
        return Err(Error::contract("epsilon list is empty"));
    }
    if epsilons.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::contract("epsilon list must be strictly decreasing"));
    }
    if pixels.is_empty() {
        return Err(Error::contract("convergence study needs at least one pixel"));
    }
    let schedules = epsilons
        .iter()
        .map(|&e| MixedPriorSchedule::new(beta, e, base.clone()))
        .collect::<Result<Vec<_>>>()?;

    let limits: Vec<f64> = (0..pixels.len())
        .into_par_iter()
        .map(|i| problem.mixed_star(beta, base, pixels.row(i)))
        .collect::<Result<_>>()?;

    let mut rows = Vec::with_capacity(epsilons.len());
    for s in &schedules {
        let errors: Vec<f64> = (0..pixels.len())
            .into_par_iter()
            .map(|i| Ok((problem.finite_eps_mixed(s, pixels.row(i))? - limits[i]).abs()))
            .collect::<Result<_>>()?;
        let sup = errors.into_iter().fold(0.0, f64::max);
        let ratio = rows.last().map(|r: &ConvergenceRow| sup / r.sup_error);
        rows.push(ConvergenceRow {
            epsilon: s.epsilon(),
            sup_error: sup,
            ratio,
        });
    }
    let errs: Vec<f64> = rows.iter().map(|r| r.sup_error).collect();
    Ok(ConvergenceStudy {
        beta,
        fitted_order: fitted_log_slope(epsilons, &errs),
        rows,
    })
}
