//! Monte-Carlo power curves at a fixed false-alarm rate.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::roc::power_at_far;
use crate::detectors::{DetectionProblem, DetectorSpec};
use crate::error::{Error, Result};
use crate::harness::rng::substream;
use crate::harness::scene::{draw_background, draw_targets};
use crate::models::{GaussianBackground, TargetInteractionModel};
use crate::pixels::PixelMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerEntry {
    pub abundance: f64,
    pub detection_prob: f64,
    pub n_targets: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerCurve {
    pub label: String,
    pub far: f64,
    pub n_background: usize,
    pub entries: Vec<PowerEntry>,
}

impl PowerCurve {
    /// Power per abundance from precomputed scores; `target_scores[k]` holds
    /// the scores of targets drawn at `abundances[k]`.
    pub fn from_scores(
        label: impl Into<String>,
        far: f64,
        abundances: &[f64],
        background_scores: &[f64],
        target_scores: &[Vec<f64>],
    ) -> Result<Self> {
        check_grid(abundances)?;
        if target_scores.len() != abundances.len() {
            return Err(Error::contract(format!(
                "{} target score sets for {} abundances",
                target_scores.len(),
                abundances.len()
            )));
        }
        let entries = abundances
            .iter()
            .zip(target_scores)
            .map(|(&a, t)| {
                Ok(PowerEntry {
                    abundance: a,
                    detection_prob: power_at_far(background_scores, t, far)?,
                    n_targets: t.len(),
                })
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            label: label.into(),
            far,
            n_background: background_scores.len(),
            entries,
        })
    }

    pub fn abundances(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.abundance).collect()
    }

    pub fn powers(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.detection_prob).collect()
    }
}

pub(crate) fn check_grid(a_grid: &[f64]) -> Result<()> {
    if a_grid.is_empty() {
        return Err(Error::contract("abundance grid is empty"));
    }
    if a_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::contract("abundance grid must be strictly increasing"));
    }
    Ok(())
}

/// Two-sided normal-approximation quantile for a confidence level.
pub fn normal_quantile(confidence: f64) -> Result<f64> {
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::contract(format!("confidence must lie in (0, 1), got {confidence}")));
    }
    let n = Normal::new(0.0, 1.0).expect("standard normal");
    Ok(n.inverse_cdf(0.5 + 0.5 * confidence))
}

/// Normal-approximation half-width of a binomial proportion `p` from `n` trials.
pub fn binomial_halfwidth(p: f64, n: usize, confidence: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::contract("binomial half-width needs n > 0"));
    }
    Ok(normal_quantile(confidence)? * (p * (1.0 - p) / n as f64).sqrt())
}

/// Background pixels and one target sample per abundance, drawn from the
/// substreams `power/background` and `power/target/<k>` of `seed`.
#[derive(Debug, Clone)]
pub struct PowerSample {
    pub abundances: Vec<f64>,
    pub background: PixelMatrix,
    pub targets: Vec<PixelMatrix>,
}

pub fn draw_power_sample(
    bg: &GaussianBackground,
    model: &TargetInteractionModel,
    a_grid: &[f64],
    n_background: usize,
    n_target_per_a: usize,
    seed: u64,
) -> Result<PowerSample> {
    check_grid(a_grid)?;
    a_grid.iter().try_for_each(|&a| model.check_abundance(a))?;
    if n_background == 0 || n_target_per_a == 0 {
        return Err(Error::contract("power sample sizes must be positive"));
    }
    let background = draw_background(bg, model.kind(), n_background, &mut substream(seed, "power/background"))?.pixels;
    let targets = a_grid
        .par_iter()
        .enumerate()
        .map(|(k, &a)| {
            let mut rng = substream(seed, &format!("power/target/{k}"));
            Ok(draw_targets(bg, model, a, n_target_per_a, &mut rng)?.pixels)
        })
        .collect::<Result<_>>()?;
    Ok(PowerSample {
        abundances: a_grid.to_vec(),
        background,
        targets,
    })
}

/// Score a power sample with one detector and reduce it to a power curve.
pub fn power_curve_on_sample(
    problem: &DetectionProblem,
    spec: &DetectorSpec,
    sample: &PowerSample,
    far: f64,
) -> Result<PowerCurve> {
    let bkg = problem.batch_scores(spec, &sample.background)?;
    let tgt = sample
        .targets
        .iter()
        .map(|t| problem.batch_scores(spec, t))
        .collect::<Result<Vec<_>>>()?;
    PowerCurve::from_scores(spec.label(), far, &sample.abundances, &bkg, &tgt)
}

/// Monte-Carlo power of `spec` at each grid abundance; deterministic in `seed`.
pub fn power_curve(
    problem: &DetectionProblem,
    spec: &DetectorSpec,
    a_grid: &[f64],
    far: f64,
    n_background: usize,
    n_target_per_a: usize,
    seed: u64,
) -> Result<PowerCurve> {
    let sample = draw_power_sample(
        problem.background(),
        problem.model(),
        a_grid,
        n_background,
        n_target_per_a,
        seed,
    )?;
    power_curve_on_sample(problem, spec, &sample, far)
}
