//! Priors over the abundance axis.
//!
//! A [`Prior`] is a finite mixture of point masses and continuous densities.
//! Continuous densities live on `[0, 1]`; an exponential part is truncated
//! there and, unless renormalization is requested, keeps its untruncated
//! scale so that its mass on `[0, 1]` is `1 - exp(-1/eps)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{graded_breakpoints, GaussLegendre};

/// Upper end of the support of every continuous prior component.
pub const CONTINUOUS_SUPPORT_MAX: f64 = 1.0;

/// Tolerance on the total prior weight.
pub const WEIGHT_TOLERANCE: f64 = 1e-12;

/// Largest moment order accepted by [`exponential_moment`].
pub const MAX_MOMENT_ORDER: u32 = 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ContinuousDensity {
    /// Unit density on `[0, 1]`.
    Uniform01,
    /// `(1/eps) exp(-a/eps)`.
    Exponential { epsilon: f64 },
}

impl ContinuousDensity {
    fn validate(&self) -> Result<()> {
        match *self {
            ContinuousDensity::Uniform01 => Ok(()),
            ContinuousDensity::Exponential { epsilon } => {
                if epsilon > 0.0 && epsilon.is_finite() {
                    Ok(())
                } else {
                    Err(Error::contract(format!(
                        "exponential prior needs epsilon > 0, got {epsilon}"
                    )))
                }
            }
        }
    }

    /// Log density on `[0, 1]`; `-inf` outside.
    pub fn log_density(&self, a: f64, renormalize: bool) -> f64 {
        if !(0.0..=CONTINUOUS_SUPPORT_MAX).contains(&a) {
            return f64::NEG_INFINITY;
        }
        match *self {
            ContinuousDensity::Uniform01 => 0.0,
            ContinuousDensity::Exponential { epsilon } => {
                let base = -epsilon.ln() - a / epsilon;
                if renormalize {
                    base - (-(-CONTINUOUS_SUPPORT_MAX / epsilon).exp_m1()).ln()
                } else {
                    base
                }
            }
        }
    }

    pub fn density(&self, a: f64, renormalize: bool) -> f64 {
        self.log_density(a, renormalize).exp()
    }

    /// Length scale over which the density varies; sets quadrature grading.
    pub(crate) fn scale(&self) -> Option<f64> {
        match *self {
            ContinuousDensity::Uniform01 => None,
            ContinuousDensity::Exponential { epsilon } => Some(epsilon),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointMass {
    pub location: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContinuousPart {
    pub density: ContinuousDensity,
    pub weight: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
struct PriorRepr {
    #[serde(default)]
    point_masses: Vec<PointMass>,
    #[serde(default)]
    continuous: Vec<ContinuousPart>,
    #[serde(default)]
    renormalize_truncated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PriorRepr", into = "PriorRepr")]
pub struct Prior {
    point_masses: Vec<PointMass>,
    continuous: Vec<ContinuousPart>,
    renormalize_truncated: bool,
}

impl TryFrom<PriorRepr> for Prior {
    type Error = Error;

    fn try_from(r: PriorRepr) -> Result<Self> {
        let p = Prior::new(r.point_masses, r.continuous)?;
        Ok(p.with_renormalization(r.renormalize_truncated))
    }
}

impl From<Prior> for PriorRepr {
    fn from(p: Prior) -> Self {
        PriorRepr {
            point_masses: p.point_masses,
            continuous: p.continuous,
            renormalize_truncated: p.renormalize_truncated,
        }
    }
}

impl Prior {
    pub fn new(point_masses: Vec<PointMass>, continuous: Vec<ContinuousPart>) -> Result<Self> {
        let mut total = 0.0;
        for pm in &point_masses {
            if !(pm.location >= 0.0) || !pm.location.is_finite() {
                return Err(Error::contract(format!(
                    "point mass location must be finite and >= 0, got {}",
                    pm.location
                )));
            }
            check_weight(pm.weight)?;
            total += pm.weight;
        }
        for part in &continuous {
            part.density.validate()?;
            check_weight(part.weight)?;
            total += part.weight;
        }
        if (total - 1.0).abs() > WEIGHT_TOLERANCE {
            return Err(Error::contract(format!(
                "prior weights sum to {total}, expected 1"
            )));
        }
        Ok(Self {
            point_masses,
            continuous,
            renormalize_truncated: false,
        })
    }

    /// `delta(a - location)`.
    pub fn point_mass(location: f64) -> Result<Self> {
        Self::new(vec![PointMass { location, weight: 1.0 }], vec![])
    }

    pub fn uniform01() -> Self {
        Self::single(ContinuousDensity::Uniform01)
    }

    pub fn exponential(epsilon: f64) -> Result<Self> {
        let density = ContinuousDensity::Exponential { epsilon };
        density.validate()?;
        Ok(Self::single(density))
    }

    fn single(density: ContinuousDensity) -> Self {
        Self {
            point_masses: vec![],
            continuous: vec![ContinuousPart { density, weight: 1.0 }],
            renormalize_truncated: false,
        }
    }

    /// Rescale exponential parts so each integrates to one on `[0, 1]`.
    pub fn with_renormalization(mut self, on: bool) -> Self {
        self.renormalize_truncated = on;
        self
    }

    pub fn renormalize_truncated(&self) -> bool {
        self.renormalize_truncated
    }

    pub fn point_masses(&self) -> &[PointMass] {
        &self.point_masses
    }

    pub fn continuous_parts(&self) -> &[ContinuousPart] {
        &self.continuous
    }

    /// Density of the continuous parts at `a` (point masses excluded). Zero
    /// outside `[0, 1]`.
    pub fn prior_density(&self, a: f64) -> f64 {
        self.continuous
            .iter()
            .map(|p| p.weight * p.density.density(a, self.renormalize_truncated))
            .sum()
    }

    /// Total weight of point masses located exactly at `a`.
    pub fn mass_at(&self, a: f64) -> f64 {
        self.point_masses
            .iter()
            .filter(|p| p.location == a)
            .map(|p| p.weight)
            .sum()
    }

    /// Check that every point mass lies in `[0, a_max]`.
    pub fn check_domain(&self, a_max: f64) -> Result<()> {
        if let Some(p) = self.point_masses.iter().find(|p| p.location > a_max) {
            return Err(Error::domain(format!(
                "point mass at {} lies outside [0, {a_max}]",
                p.location
            )));
        }
        Ok(())
    }

    /// Combine priors with nonnegative mixing weights summing to one.
    pub fn mixture(components: &[(f64, &Prior)]) -> Result<Self> {
        let mut points = Vec::new();
        let mut continuous = Vec::new();
        let mut renormalize = false;
        for &(w, p) in components {
            check_weight(w)?;
            renormalize |= p.renormalize_truncated;
            points.extend(p.point_masses.iter().map(|pm| PointMass {
                location: pm.location,
                weight: w * pm.weight,
            }));
            continuous.extend(p.continuous.iter().map(|c| ContinuousPart {
                density: c.density,
                weight: w * c.weight,
            }));
        }
        Ok(Self::new(points, continuous)?.with_renormalization(renormalize))
    }
}

fn check_weight(w: f64) -> Result<()> {
    if w >= 0.0 && w.is_finite() {
        Ok(())
    } else {
        Err(Error::contract(format!("prior weight must be finite and >= 0, got {w}")))
    }
}

/// `int_0^inf a^k exp(-a/eps) da = k! eps^(k+1)`.
pub fn exponential_moment(k: u32, epsilon: f64) -> Result<f64> {
    check_moment_args(k, epsilon)?;
    let factorial: f64 = (1..=k).map(f64::from).product();
    Ok(factorial * epsilon.powi(k as i32 + 1))
}

/// `int_0^upper a^k exp(-a/eps) da` by graded Gauss-Legendre panels. Differs
/// from [`exponential_moment`] by a tail of order `exp(-upper/eps)`.
pub fn truncated_exponential_moment(k: u32, epsilon: f64, upper: f64) -> Result<f64> {
    check_moment_args(k, epsilon)?;
    if !(upper > 0.0) || !upper.is_finite() {
        return Err(Error::contract(format!("upper limit must be positive, got {upper}")));
    }
    let rule = GaussLegendre::new(64)?;
    let panels = graded_breakpoints(upper, epsilon);
    Ok(rule.integrate_panels(&panels, |a| a.powi(k as i32) * (-a / epsilon).exp()))
}

fn check_moment_args(k: u32, epsilon: f64) -> Result<()> {
    if k > MAX_MOMENT_ORDER {
        return Err(Error::contract(format!(
            "moment order {k} exceeds {MAX_MOMENT_ORDER}"
        )));
    }
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::contract(format!("epsilon must be positive, got {epsilon}")));
    }
    Ok(())
}

/// Bookkeeping for the finite-epsilon mixed prior
/// `alpha q_eps + (1 - alpha) q_base` with `alpha = 1 + eps - eps/beta`.
///
/// `beta` is held fixed while `eps -> 0`; the base weight `1 - alpha =
/// eps (1/beta - 1)` is stored directly so that `beta = eps / (1 - alpha + eps)`
/// round-trips without cancellation.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedPriorSchedule {
    beta: f64,
    epsilon: f64,
    base: Prior,
    base_weight: f64,
}

impl MixedPriorSchedule {
    pub fn new(beta: f64, epsilon: f64, base: Prior) -> Result<Self> {
        if !(beta > 0.0 && beta <= 1.0) {
            return Err(Error::contract(format!("beta must lie in (0, 1], got {beta}")));
        }
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return Err(Error::contract(format!("epsilon must be positive, got {epsilon}")));
        }
        let base_weight = epsilon * (1.0 / beta - 1.0);
        if base_weight > 1.0 {
            return Err(Error::contract(format!(
                "alpha = 1 + eps - eps/beta is negative for beta={beta}, eps={epsilon}"
            )));
        }
        let schedule = Self {
            beta,
            epsilon,
            base,
            base_weight,
        };
        let back = schedule.implied_beta();
        if ((back - beta) / beta).abs() > 1e-14 {
            return Err(Error::numeric(
                format!("beta round trip failed: {beta} -> {back}"),
                None,
            ));
        }
        Ok(schedule)
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn base(&self) -> &Prior {
        &self.base
    }

    /// Weight on the exponential component.
    pub fn alpha(&self) -> f64 {
        1.0 - self.base_weight
    }

    /// Weight on the base component, `1 - alpha`.
    pub fn base_weight(&self) -> f64 {
        self.base_weight
    }

    /// `eps / (1 - alpha + eps)`.
    pub fn implied_beta(&self) -> f64 {
        self.epsilon / (self.base_weight + self.epsilon)
    }
}

/// The finite-epsilon mixed prior as an ordinary [`Prior`].
pub fn mixed_prior(schedule: &MixedPriorSchedule) -> Result<Prior> {
    let alpha = schedule.alpha();
    let bw = schedule.base_weight();
    let base = schedule.base();
    let mut continuous = vec![ContinuousPart {
        density: ContinuousDensity::Exponential {
            epsilon: schedule.epsilon(),
        },
        weight: alpha,
    }];
    continuous.extend(base.continuous_parts().iter().map(|c| ContinuousPart {
        density: c.density,
        weight: bw * c.weight,
    }));
    let points = base
        .point_masses()
        .iter()
        .map(|p| PointMass {
            location: p.location,
            weight: bw * p.weight,
        })
        .collect();
    Ok(Prior::new(points, continuous)?.with_renormalization(base.renormalize_truncated()))
}
