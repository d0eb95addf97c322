//! Mixed-prior density tables for log-log plotting.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::priors::{mixed_prior, MixedPriorSchedule, Prior};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriorCurveRow {
    pub epsilon: f64,
    pub a: f64,
    pub q: f64,
}

/// Density of the mixed prior at each `a` in `a_grid` for each `epsilon`,
/// with `beta` held fixed. Rows are grouped by epsilon in input order.
pub fn emit_prior_curves(beta: f64, epsilons: &[f64], base: &Prior, a_grid: &[f64]) -> Result<Vec<PriorCurveRow>> {
    if a_grid.iter().any(|&a| !(a > 0.0 && a <= 1.0)) {
        return Err(Error::contract("prior-curve abundances must lie in (0, 1]"));
    }
    let mut rows = Vec::with_capacity(epsilons.len() * a_grid.len());
    for &epsilon in epsilons {
        let prior = mixed_prior(&MixedPriorSchedule::new(beta, epsilon, base.clone())?)?;
        rows.extend(a_grid.iter().map(|&a| PriorCurveRow {
            epsilon,
            a,
            q: prior.prior_density(a),
        }));
    }
    Ok(rows)
}
