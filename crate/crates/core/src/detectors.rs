//! Detector statistics.
//!
//! Every detector is a score function over pixels; larger scores are more
//! target-like. Scores keep each detector's natural scale (likelihood ratio,
//! derivative, or an affine mix of these) and are only comparable within a
//! single detector, since any monotone transform of a detector is an
//! equivalent detector.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{dot, Background, GaussianBackground, TargetInteractionModel};
use crate::numerics::{graded_breakpoints, grid_then_golden_max, log_sum_exp, GaussLegendre};
use crate::pixels::PixelMatrix;
use crate::priors::{mixed_prior, ContinuousPart, MixedPriorSchedule, Prior, CONTINUOUS_SUPPORT_MAX};

/// Default Gauss-Legendre order per quadrature panel.
pub const DEFAULT_QUADRATURE_NODES: usize = 64;
/// Equispaced grid size for the abundance search before golden refinement.
pub const DEFAULT_GRID_POINTS: usize = 256;
/// Bracket width at which golden-section refinement stops.
pub const DEFAULT_ABUNDANCE_TOL: f64 = 1e-8;
/// Tolerance on the sum of sculpting coefficients.
pub const SIMPLEX_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchSettings {
    pub quadrature_nodes: usize,
    pub grid_points: usize,
    pub abundance_tol: f64,
}

impl Default for SearchSettings {
    fn default() -> Self {
        Self {
            quadrature_nodes: DEFAULT_QUADRATURE_NODES,
            grid_points: DEFAULT_GRID_POINTS,
            abundance_tol: DEFAULT_ABUNDANCE_TOL,
        }
    }
}

/// Penalty `q(a)` for the penalized-likelihood abundance estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Penalty {
    /// Constant penalty; reproduces the GLRT estimate.
    Flat,
    /// `q(a) = exp(-a/scale) / scale` on the whole abundance domain.
    Exponential { scale: f64 },
    /// Continuous density of a prior (point masses contribute nothing).
    Prior { prior: Prior },
}

impl Penalty {
    pub fn log_value(&self, a: f64) -> f64 {
        match self {
            Penalty::Flat => 0.0,
            Penalty::Exponential { scale } => -a / scale - scale.ln(),
            Penalty::Prior { prior } => prior.prior_density(a).ln(),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Penalty::Exponential { scale } if !(*scale > 0.0) || !scale.is_finite() => Err(
                Error::contract(format!("penalty scale must be positive, got {scale}")),
            ),
            _ => Ok(()),
        }
    }
}

/// What the penalized GLRT reports once `a_q` is found.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PenalizedOutput {
    /// The clairvoyant detector evaluated at the penalized estimate.
    #[default]
    Clairvoyant,
    /// The penalized objective `q(a_q) p(a_q, x) / p(0, x)`.
    Objective,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SculptComponent {
    pub abundance: f64,
    pub beta: f64,
}

/// Declarative description of a detector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DetectorSpec {
    Clairvoyant {
        a0: f64,
    },
    Lmp,
    Glrt,
    PenalizedGlrt {
        penalty: Penalty,
        #[serde(default)]
        output: PenalizedOutput,
    },
    Bayes {
        prior: Prior,
    },
    MixedStar {
        beta: f64,
        base_prior: Prior,
    },
    Sculpted {
        beta0: f64,
        components: Vec<SculptComponent>,
    },
    FiniteEpsMixed {
        beta: f64,
        epsilon: f64,
        base_prior: Prior,
    },
    /// `t^T Sigma^{-1} (x - mu)`, written for general backgrounds as
    /// `-t . grad log P_bkg(x)`.
    MatchedFilter,
}

impl DetectorSpec {
    /// Short human-readable label, e.g. `clairvoyant(0.5)`.
    pub fn label(&self) -> String {
        match self {
            DetectorSpec::Clairvoyant { a0 } => format!("clairvoyant({a0})"),
            DetectorSpec::Lmp => "lmp".into(),
            DetectorSpec::Glrt => "glrt".into(),
            DetectorSpec::PenalizedGlrt { .. } => "penalized_glrt".into(),
            DetectorSpec::Bayes { .. } => "bayes".into(),
            DetectorSpec::MixedStar { beta, .. } => format!("mixed_star({beta})"),
            DetectorSpec::Sculpted { beta0, components } => {
                let parts: Vec<String> = components
                    .iter()
                    .map(|c| format!("{}@{}", c.beta, c.abundance))
                    .collect();
                format!("sculpted({beta0};{})", parts.join(","))
            }
            DetectorSpec::FiniteEpsMixed { beta, epsilon, .. } => {
                format!("finite_eps_mixed({beta},{epsilon})")
            }
            DetectorSpec::MatchedFilter => "matched_filter".into(),
        }
    }

    pub fn validate(&self, model: &TargetInteractionModel) -> Result<()> {
        match self {
            DetectorSpec::Clairvoyant { a0 } => model.check_abundance(*a0),
            DetectorSpec::Lmp | DetectorSpec::Glrt | DetectorSpec::MatchedFilter => Ok(()),
            DetectorSpec::PenalizedGlrt { penalty, .. } => {
                penalty.validate()?;
                if let Penalty::Prior { prior } = penalty {
                    prior.check_domain(model.a_max())?;
                }
                Ok(())
            }
            DetectorSpec::Bayes { prior } => prior.check_domain(model.a_max()),
            DetectorSpec::MixedStar { beta, base_prior } => {
                if !(0.0..=1.0).contains(beta) {
                    return Err(Error::contract(format!("beta must lie in [0, 1], got {beta}")));
                }
                base_prior.check_domain(model.a_max())
            }
            DetectorSpec::Sculpted { beta0, components } => {
                check_simplex(*beta0, components.iter().map(|c| c.beta))?;
                components
                    .iter()
                    .try_for_each(|c| model.check_abundance(c.abundance))
            }
            DetectorSpec::FiniteEpsMixed {
                beta,
                epsilon,
                base_prior,
            } => {
                base_prior.check_domain(model.a_max())?;
                MixedPriorSchedule::new(*beta, *epsilon, base_prior.clone()).map(|_| ())
            }
        }
    }
}

fn check_simplex(beta0: f64, rest: impl Iterator<Item = f64>) -> Result<()> {
    let mut total = beta0;
    if !(beta0 >= 0.0) {
        return Err(Error::contract(format!("beta0 must be >= 0, got {beta0}")));
    }
    for b in rest {
        if !(b >= 0.0) || !b.is_finite() {
            return Err(Error::contract(format!("sculpting weight must be >= 0, got {b}")));
        }
        total += b;
    }
    if (total - 1.0).abs() > SIMPLEX_TOLERANCE {
        return Err(Error::contract(format!(
            "sculpting weights sum to {total}, expected 1"
        )));
    }
    Ok(())
}

/// First-order prior weights for a sculpted detector:
/// `alpha0 = 1 - eps (1 - beta0) / beta0`, `alpha_i = eps beta_i / beta0`.
pub fn alpha_from_beta(beta0: f64, betas: &[f64], epsilon: f64) -> Result<(f64, Vec<f64>)> {
    check_simplex(beta0, betas.iter().copied())?;
    if beta0 == 0.0 {
        return Err(Error::contract("beta0 = 0 makes the alpha mapping singular"));
    }
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::contract(format!("epsilon must be positive, got {epsilon}")));
    }
    let alpha0 = 1.0 - epsilon * (1.0 - beta0) / beta0;
    let alphas = betas.iter().map(|b| epsilon * b / beta0).collect();
    Ok((alpha0, alphas))
}

/// Inverse of [`alpha_from_beta`]: `beta0 = eps / (1 - alpha0 + eps)` and
/// `beta_i = alpha_i beta0 / eps`.
pub fn beta_from_alpha(alpha0: f64, alphas: &[f64], epsilon: f64) -> Result<(f64, Vec<f64>)> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::contract(format!("epsilon must be positive, got {epsilon}")));
    }
    let beta0 = epsilon / (1.0 - alpha0 + epsilon);
    let betas = alphas.iter().map(|a| a * beta0 / epsilon).collect();
    Ok((beta0, betas))
}

/// Background, target model and numerical settings shared by all detectors.
#[derive(Debug, Clone)]
pub struct DetectionProblem<B: Background = GaussianBackground> {
    background: B,
    model: TargetInteractionModel,
    settings: SearchSettings,
    rule: GaussLegendre,
}

impl<B: Background> DetectionProblem<B> {
    pub fn new(background: B, model: TargetInteractionModel) -> Result<Self> {
        Self::with_settings(background, model, SearchSettings::default())
    }

    pub fn with_settings(
        background: B,
        model: TargetInteractionModel,
        settings: SearchSettings,
    ) -> Result<Self> {
        if background.dim() != model.dim() {
            return Err(Error::contract(format!(
                "background has {} channels, signature has {}",
                background.dim(),
                model.dim()
            )));
        }
        if settings.grid_points < 2 {
            return Err(Error::contract("abundance grid needs at least 2 points"));
        }
        if !(settings.abundance_tol > 0.0) {
            return Err(Error::contract("abundance tolerance must be positive"));
        }
        let rule = GaussLegendre::new(settings.quadrature_nodes)?;
        Ok(Self {
            background,
            model,
            settings,
            rule,
        })
    }

    pub fn background(&self) -> &B {
        &self.background
    }

    pub fn model(&self) -> &TargetInteractionModel {
        &self.model
    }

    pub fn settings(&self) -> &SearchSettings {
        &self.settings
    }

    fn null_log_likelihood(&self, x: &[f64]) -> Result<f64> {
        self.model.log_likelihood(&self.background, 0.0, x)
    }

    /// `log p(a, x) - log p(0, x)`.
    pub fn log_ratio(&self, a: f64, x: &[f64]) -> Result<f64> {
        let ll0 = self.null_log_likelihood(x)?;
        Ok(self.model.log_likelihood(&self.background, a, x)? - ll0)
    }

    /// `p(a0, x) / p(0, x)`.
    pub fn clairvoyant(&self, a0: f64, x: &[f64]) -> Result<f64> {
        Ok(self.log_ratio(a0, x)?.exp())
    }

    pub fn lmp(&self, x: &[f64]) -> Result<f64> {
        self.model.lmp_statistic(&self.background, x)
    }

    pub fn matched_filter(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.model.dim() {
            return Err(Error::contract(format!(
                "pixel has {} channels, expected {}",
                x.len(),
                self.model.dim()
            )));
        }
        let g = self.background.grad_log_density(x)?;
        Ok(-dot(self.model.signature(), &g))
    }

    /// Maximum-likelihood abundance over `[0, a_max]`; `value` is the maximal
    /// log likelihood ratio, so it is never below zero.
    pub fn glrt_estimate(&self, x: &[f64]) -> Result<crate::numerics::Maximum> {
        let ll0 = self.null_log_likelihood(x)?;
        self.maximize(x, |a, ll| if a == 0.0 { 0.0 } else { ll - ll0 })
    }

    /// `max_a p(a, x) / p(0, x)`.
    pub fn glrt(&self, x: &[f64]) -> Result<f64> {
        Ok(self.glrt_estimate(x)?.value.exp())
    }

    /// Penalized estimate `a_q = argmax_a q(a) p(a, x)`.
    pub fn penalized_estimate(&self, penalty: &Penalty, x: &[f64]) -> Result<crate::numerics::Maximum> {
        penalty.validate()?;
        let ll0 = self.null_log_likelihood(x)?;
        self.maximize(x, |a, ll| penalty.log_value(a) + ll - ll0)
    }

    pub fn penalized_glrt(&self, penalty: &Penalty, output: PenalizedOutput, x: &[f64]) -> Result<f64> {
        let est = self.penalized_estimate(penalty, x)?;
        match output {
            PenalizedOutput::Clairvoyant => self.clairvoyant(est.argmax, x),
            PenalizedOutput::Objective => Ok(est.value.exp()),
        }
    }

    fn maximize(&self, x: &[f64], objective: impl Fn(f64, f64) -> f64) -> Result<crate::numerics::Maximum> {
        let mut failure = None;
        let result = grid_then_golden_max(
            |a| match self.model.log_likelihood(&self.background, a, x) {
                Ok(ll) => objective(a, ll),
                Err(e) => {
                    failure.get_or_insert(e);
                    f64::NAN
                }
            },
            0.0,
            self.model.a_max(),
            self.settings.grid_points,
            self.settings.abundance_tol,
        );
        match (failure, result) {
            (Some(e), _) => Err(e),
            (None, r) => r,
        }
    }

    /// Bayesian detector `int q(a) p(a, x) da / p(0, x)`. Point masses are
    /// summed exactly; continuous parts use Gauss-Legendre quadrature on
    /// `[0, min(1, a_max)]`, graded near zero for exponential parts.
    pub fn bayes(&self, prior: &Prior, x: &[f64]) -> Result<f64> {
        let ll0 = self.null_log_likelihood(x)?;
        let mut total = 0.0;
        for pm in prior.point_masses() {
            if pm.weight == 0.0 {
                continue;
            }
            let ll = self.model.log_likelihood(&self.background, pm.location, x)?;
            total += pm.weight * (ll - ll0).exp();
        }
        for part in prior.continuous_parts() {
            if part.weight == 0.0 {
                continue;
            }
            total += part.weight * self.continuous_integral(part, prior.renormalize_truncated(), x, ll0)?;
        }
        if !total.is_finite() {
            return Err(Error::numeric(
                format!("Bayes integral is not finite ({total})"),
                None,
            ));
        }
        Ok(total)
    }

    fn continuous_integral(&self, part: &ContinuousPart, renormalize: bool, x: &[f64], ll0: f64) -> Result<f64> {
        let upper = self.model.a_max().min(CONTINUOUS_SUPPORT_MAX);
        let panels = match part.density.scale() {
            Some(s) => graded_breakpoints(upper, s),
            None => vec![0.0, upper],
        };
        let mut terms = Vec::with_capacity((panels.len() - 1) * self.rule.order());
        for w in panels.windows(2) {
            for (a, weight) in self.rule.mapped(w[0], w[1]) {
                let ll = self.model.log_likelihood(&self.background, a, x)?;
                let term = weight.ln() + part.density.log_density(a, renormalize) + ll - ll0;
                if term.is_nan() {
                    return Err(Error::numeric("quadrature term is NaN", Some(a)));
                }
                terms.push(term);
            }
        }
        Ok(log_sum_exp(&terms).exp())
    }

    /// `beta (D_mixed(eps, x) - alpha) / eps`, with `D_mixed` the Bayes
    /// detector for the finite-epsilon mixed prior.
    pub fn finite_eps_mixed(&self, schedule: &MixedPriorSchedule, x: &[f64]) -> Result<f64> {
        let prior = mixed_prior(schedule)?;
        let d = self.bayes(&prior, x)?;
        Ok(schedule.beta() * (d - schedule.alpha()) / schedule.epsilon())
    }

    /// `beta LMP(x) + (1 - beta) Bayes(base, x)`.
    pub fn mixed_star(&self, beta: f64, base: &Prior, x: &[f64]) -> Result<f64> {
        if !(0.0..=1.0).contains(&beta) {
            return Err(Error::contract(format!("beta must lie in [0, 1], got {beta}")));
        }
        let lmp = self.lmp(x)?;
        if beta == 1.0 {
            return Ok(lmp);
        }
        let d1 = self.bayes(base, x)?;
        Ok(beta * lmp + (1.0 - beta) * d1)
    }

    /// `beta0 LMP(x) + sum_i beta_i D_c(a_i, x)`.
    pub fn sculpted(&self, beta0: f64, components: &[SculptComponent], x: &[f64]) -> Result<f64> {
        check_simplex(beta0, components.iter().map(|c| c.beta))?;
        let mut total = beta0 * self.lmp(x)?;
        for c in components {
            total += c.beta * self.clairvoyant(c.abundance, x)?;
        }
        Ok(total)
    }

    /// Score one pixel with the detector described by `spec`. A score that
    /// overflows or is NaN is a numeric error.
    pub fn score(&self, spec: &DetectorSpec, x: &[f64]) -> Result<f64> {
        let v = self.score_unchecked(spec, x)?;
        if !v.is_finite() {
            let abundance = match spec {
                DetectorSpec::Clairvoyant { a0 } => Some(*a0),
                _ => None,
            };
            return Err(Error::numeric(format!("{} score is not finite ({v})", spec.label()), abundance));
        }
        Ok(v)
    }

    fn score_unchecked(&self, spec: &DetectorSpec, x: &[f64]) -> Result<f64> {
        match spec {
            DetectorSpec::Clairvoyant { a0 } => self.clairvoyant(*a0, x),
            DetectorSpec::Lmp => self.lmp(x),
            DetectorSpec::Glrt => self.glrt(x),
            DetectorSpec::PenalizedGlrt { penalty, output } => self.penalized_glrt(penalty, *output, x),
            DetectorSpec::Bayes { prior } => self.bayes(prior, x),
            DetectorSpec::MixedStar { beta, base_prior } => self.mixed_star(*beta, base_prior, x),
            DetectorSpec::Sculpted { beta0, components } => self.sculpted(*beta0, components, x),
            DetectorSpec::FiniteEpsMixed {
                beta,
                epsilon,
                base_prior,
            } => {
                let schedule = MixedPriorSchedule::new(*beta, *epsilon, base_prior.clone())?;
                self.finite_eps_mixed(&schedule, x)
            }
            DetectorSpec::MatchedFilter => self.matched_filter(x),
        }
    }

    /// Score every row of `pixels`, in order. Rows are scored independently,
    /// so the output does not depend on how the work is scheduled.
    pub fn batch_scores(&self, spec: &DetectorSpec, pixels: &PixelMatrix) -> Result<Vec<f64>> {
        if pixels.dim() != self.model.dim() {
            return Err(Error::contract(format!(
                "pixels have {} channels, model expects {}",
                pixels.dim(),
                self.model.dim()
            )));
        }
        spec.validate(&self.model)?;
        (0..pixels.len())
            .into_par_iter()
            .map(|i| self.score(spec, pixels.row(i)))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::ModelKind;
    use crate::priors::PointMass;

    fn fixture(kind: ModelKind, a_max: Option<f64>) -> DetectionProblem {
        let bg = GaussianBackground::isotropic(1, 0.0, 1.0).unwrap();
        let model = match a_max {
            Some(m) => TargetInteractionModel::with_a_max(kind, vec![1.0], m).unwrap(),
            None => TargetInteractionModel::new(kind, vec![1.0]).unwrap(),
        };
        DetectionProblem::new(bg, model).unwrap()
    }

    fn additive() -> DetectionProblem {
        fixture(ModelKind::Additive, Some(3.0))
    }

    // (Phi(1) - Phi(0)) / phi(0) for the standard normal
    const UNIFORM_BAYES_AT_ZERO: f64 = 0.855_624_391_892_148_9;

    #[test]
    fn clairvoyant_examples() {
        let p = additive();
        assert!((p.clairvoyant(1.0, &[0.0]).unwrap() - (-0.5f64).exp()).abs() < 1e-14);
        assert_eq!(p.clairvoyant(0.0, &[0.37]).unwrap(), 1.0);
        assert!((p.clairvoyant(1.0, &[2.0]).unwrap() - 1.5f64.exp()).abs() < 1e-13);
        assert!(matches!(p.clairvoyant(4.0, &[0.0]), Err(Error::Domain(_))));
    }

    #[test]
    fn lmp_examples() {
        assert!((additive().lmp(&[2.0]).unwrap() - 2.0).abs() < 1e-15);
        assert_eq!(additive().lmp(&[0.0]).unwrap(), 0.0);
        let rep = fixture(ModelKind::Replacement, None);
        assert!((rep.lmp(&[0.0]).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn glrt_examples() {
        let p = additive();
        let est = p.glrt_estimate(&[2.0]).unwrap();
        assert!((est.argmax - 2.0).abs() < 1e-7);
        assert!((p.glrt(&[2.0]).unwrap() - 2f64.exp()).abs() < 1e-10);
        let low = p.glrt_estimate(&[-1.0]).unwrap();
        assert_eq!(low.argmax, 0.0);
        assert_eq!(p.glrt(&[-1.0]).unwrap(), 1.0);
        for kind in [ModelKind::Additive, ModelKind::Replacement] {
            let q = fixture(kind, None);
            assert!(q.glrt(&[0.0]).unwrap() >= 1.0);
        }
    }

    #[test]
    fn penalized_glrt_examples() {
        let p = additive();
        let pen = Penalty::Exponential { scale: 1.0 };
        let est = p.penalized_estimate(&pen, &[2.0]).unwrap();
        assert!((est.argmax - 1.0).abs() < 1e-7);
        let v = p.penalized_glrt(&pen, PenalizedOutput::Clairvoyant, &[2.0]).unwrap();
        assert!((v - p.clairvoyant(est.argmax, &[2.0]).unwrap()).abs() < 1e-15);
        assert_eq!(p.penalized_estimate(&pen, &[0.5]).unwrap().argmax, 0.0);
        for x in [-0.3, 0.4, 1.7, 2.9] {
            let flat = p.penalized_estimate(&Penalty::Flat, &[x]).unwrap().argmax;
            assert_eq!(flat, p.glrt_estimate(&[x]).unwrap().argmax);
        }
    }

    #[test]
    fn penalized_objective_output() {
        let p = additive();
        let pen = Penalty::Exponential { scale: 1.0 };
        // q(1) p(1, 2) / p(0, 2) = e^{-1} e^{3/2}
        let v = p.penalized_glrt(&pen, PenalizedOutput::Objective, &[2.0]).unwrap();
        assert!((v - 0.5f64.exp()).abs() < 1e-10);
    }

    #[test]
    fn point_mass_penalty_is_rejected() {
        let p = additive();
        let pen = Penalty::Prior {
            prior: Prior::point_mass(0.5).unwrap(),
        };
        assert!(matches!(p.penalized_estimate(&pen, &[1.0]), Err(Error::Contract(_))));
    }

    #[test]
    fn bayes_examples() {
        let p = additive();
        for x in [-1.0, 0.3, 2.2] {
            let delta = Prior::point_mass(1.3).unwrap();
            assert_eq!(p.bayes(&delta, &[x]).unwrap(), p.clairvoyant(1.3, &[x]).unwrap());
        }
        let two = Prior::new(
            vec![
                PointMass { location: 1.0, weight: 0.5 },
                PointMass { location: 2.0, weight: 0.5 },
            ],
            vec![],
        )
        .unwrap();
        let expected = 0.5 * (-0.5f64).exp() + 0.5 * (-2.0f64).exp();
        assert!((p.bayes(&two, &[0.0]).unwrap() - expected).abs() < 1e-14);
        assert!((expected - 0.37093).abs() < 1e-5);
        let u = p.bayes(&Prior::uniform01(), &[0.0]).unwrap();
        assert!((u - UNIFORM_BAYES_AT_ZERO).abs() < 1e-13);
    }

    #[test]
    fn bayes_null_point_mass_is_one() {
        let p = additive();
        let delta0 = Prior::point_mass(0.0).unwrap();
        for x in [-2.0, 0.0, 5.0] {
            assert_eq!(p.bayes(&delta0, &[x]).unwrap(), 1.0);
        }
    }

    #[test]
    fn mixed_star_examples() {
        let p = additive();
        let u = Prior::uniform01();
        assert_eq!(p.mixed_star(1.0, &u, &[1.4]).unwrap(), p.lmp(&[1.4]).unwrap());
        assert_eq!(p.mixed_star(0.0, &u, &[1.4]).unwrap(), p.bayes(&u, &[1.4]).unwrap());
        let v = p.mixed_star(0.5, &u, &[0.0]).unwrap();
        assert!((v - 0.5 * UNIFORM_BAYES_AT_ZERO).abs() < 1e-13);
    }

    #[test]
    fn finite_eps_mixed_examples() {
        let p = additive();
        let s = MixedPriorSchedule::new(0.5, 0.01, Prior::uniform01()).unwrap();
        let v = p.finite_eps_mixed(&s, &[0.0]).unwrap();
        assert!((v - 0.427_81).abs() < 0.02);
        let s1 = MixedPriorSchedule::new(1.0, 1e-3, Prior::uniform01()).unwrap();
        let v1 = p.finite_eps_mixed(&s1, &[1.2]).unwrap();
        assert!((v1 - 1.2).abs() < 1e-2);
    }

    #[test]
    fn sculpted_examples() {
        let p = additive();
        assert_eq!(p.sculpted(1.0, &[], &[0.8]).unwrap(), p.lmp(&[0.8]).unwrap());
        let one = [SculptComponent { abundance: 0.7, beta: 1.0 }];
        assert_eq!(p.sculpted(0.0, &one, &[0.8]).unwrap(), p.clairvoyant(0.7, &[0.8]).unwrap());
        let half = [SculptComponent { abundance: 0.5, beta: 0.5 }];
        let v = p.sculpted(0.5, &half, &[0.0]).unwrap();
        assert!((v - 0.5 * (-0.125f64).exp()).abs() < 1e-15);
        assert!((v - 0.44124).abs() < 1e-5);
        let bad = [SculptComponent { abundance: 0.5, beta: 0.6 }];
        assert!(matches!(p.sculpted(0.5, &bad, &[0.0]), Err(Error::Contract(_))));
    }

    #[test]
    fn alpha_beta_mapping() {
        let (a0, ai) = alpha_from_beta(0.5, &[0.5], 0.01).unwrap();
        assert!((a0 - 0.99).abs() < 1e-15);
        assert!((ai[0] - 0.01).abs() < 1e-15);
        let (a0, ai) = alpha_from_beta(1.0, &[0.0, 0.0], 0.3).unwrap();
        assert_eq!(a0, 1.0);
        assert_eq!(ai, vec![0.0, 0.0]);
        assert!(alpha_from_beta(0.0, &[1.0], 0.1).is_err());
        let (b0, bi) = beta_from_alpha(0.99, &[0.01], 0.01).unwrap();
        assert!((b0 - 0.5).abs() < 1e-12 && (bi[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn batch_scores_edge_cases() {
        let p = additive();
        let empty = PixelMatrix::empty(1).unwrap();
        assert!(p.batch_scores(&DetectorSpec::Lmp, &empty).unwrap().is_empty());
        let one = PixelMatrix::new(1, vec![0.7]).unwrap();
        assert_eq!(p.batch_scores(&DetectorSpec::Glrt, &one).unwrap(), vec![p.glrt(&[0.7]).unwrap()]);
        let wrong = PixelMatrix::new(2, vec![0.7, 0.1]).unwrap();
        assert!(p.batch_scores(&DetectorSpec::Lmp, &wrong).is_err());
    }

    #[test]
    fn spec_validation() {
        let m = additive();
        assert!(DetectorSpec::Clairvoyant { a0: 5.0 }.validate(m.model()).is_err());
        assert!(DetectorSpec::MixedStar { beta: 1.5, base_prior: Prior::uniform01() }
            .validate(m.model())
            .is_err());
        assert!(DetectorSpec::FiniteEpsMixed { beta: 0.0, epsilon: 0.1, base_prior: Prior::uniform01() }
            .validate(m.model())
            .is_err());
    }

    #[test]
    fn spec_serde_shape() {
        let spec: DetectorSpec = serde_json::from_str(r#"{"kind":"clairvoyant","a0":0.5}"#).unwrap();
        assert_eq!(spec, DetectorSpec::Clairvoyant { a0: 0.5 });
        let spec: DetectorSpec = serde_json::from_str(
            r#"{"kind":"penalized_glrt","penalty":{"kind":"exponential","scale":1.0}}"#,
        )
        .unwrap();
        assert_eq!(
            spec,
            DetectorSpec::PenalizedGlrt {
                penalty: Penalty::Exponential { scale: 1.0 },
                output: PenalizedOutput::Clairvoyant
            }
        );
    }
}
