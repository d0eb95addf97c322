//! Choosing sculpting weights by derivative-free search on the simplex.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::power::{check_grid, draw_power_sample, PowerSample};
use super::roc::power_at_far;
use crate::detectors::{DetectionProblem, DetectorSpec, SculptComponent};
use crate::error::{Error, Result};

/// Coordinate step schedule: 1/4 halved down to 1/256.
const INITIAL_STEP: f64 = 0.25;
const FINAL_STEP: f64 = 1.0 / 256.0;
pub const DEFAULT_BUDGET: usize = 2000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SculptSettings {
    pub candidates: Vec<f64>,
    pub include_lmp: bool,
    pub a_grid: Vec<f64>,
    pub far: f64,
    pub n_background: usize,
    pub n_target_per_a: usize,
    pub seed: u64,
    /// Maximum number of objective evaluations.
    pub budget: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SculptResult {
    /// Weight on the LMP term; zero when it was not included.
    pub beta0: f64,
    pub components: Vec<SculptComponent>,
    /// Worst-case power over the abundance grid.
    pub objective: f64,
    pub powers: Vec<f64>,
    /// Objective at each pure component, LMP first when included.
    pub vertex_objectives: Vec<f64>,
    pub evaluations: usize,
    pub budget_exhausted: bool,
}

impl SculptResult {
    pub fn detector(&self) -> DetectorSpec {
        DetectorSpec::Sculpted {
            beta0: self.beta0,
            components: self.components.clone(),
        }
    }
}

/// Euclidean projection onto the probability simplex.
pub fn project_to_simplex(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (j, &uj) in u.iter().enumerate() {
        cum += uj;
        let t = (cum - 1.0) / (j + 1) as f64;
        if uj - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|x| (x - theta).max(0.0)).collect()
}

/// Cached per-component scores on a fixed Monte-Carlo sample.
struct ComponentScores {
    background: Vec<Vec<f64>>,
    /// `targets[k][c]`: scores of component `c` on targets at abundance `k`.
    targets: Vec<Vec<Vec<f64>>>,
}

fn mix(weights: &[f64], columns: &[Vec<f64>]) -> Vec<f64> {
    let n = columns[0].len();
    let mut out = vec![0.0; n];
    for (w, col) in weights.iter().zip(columns) {
        if *w == 0.0 {
            continue;
        }
        for (o, s) in out.iter_mut().zip(col) {
            *o += w * s;
        }
    }
    out
}

impl ComponentScores {
    fn build(problem: &DetectionProblem, specs: &[DetectorSpec], sample: &PowerSample) -> Result<Self> {
        let background = specs
            .iter()
            .map(|s| problem.batch_scores(s, &sample.background))
            .collect::<Result<_>>()?;
        let targets = sample
            .targets
            .iter()
            .map(|t| specs.iter().map(|s| problem.batch_scores(s, t)).collect::<Result<_>>())
            .collect::<Result<_>>()?;
        Ok(Self { background, targets })
    }

    fn powers(&self, weights: &[f64], far: f64) -> Result<Vec<f64>> {
        let bkg = mix(weights, &self.background);
        if bkg.iter().any(|s| s.is_nan()) {
            return Err(Error::numeric("sculpted background score is NaN", None));
        }
        self.targets
            .par_iter()
            .map(|t| power_at_far(&bkg, &mix(weights, t), far))
            .collect()
    }

    fn objective(&self, weights: &[f64], far: f64) -> Result<f64> {
        Ok(self.powers(weights, far)?.into_iter().fold(f64::INFINITY, f64::min))
    }
}

/// Maximize the worst-case power over `settings.a_grid` of
/// `beta0 LMP + sum_i beta_i D_c(a_i)` over the weight simplex.
///
/// Component scores are computed once; every candidate mix is re-thresholded
/// on the cached scores. The search starts at the best vertex or the
/// barycenter, then tries `project(w +/- s e_i)` for each coordinate,
/// accepting strict improvements, and halves `s` when no move helps.
pub fn sculpt_optimize(problem: &DetectionProblem, settings: &SculptSettings) -> Result<SculptResult> {
    if settings.candidates.is_empty() {
        return Err(Error::contract("sculpting needs at least one candidate abundance"));
    }
    check_grid(&settings.a_grid)?;
    if settings.budget == 0 {
        return Err(Error::contract("sculpting budget must be positive"));
    }
    let mut specs = Vec::new();
    if settings.include_lmp {
        specs.push(DetectorSpec::Lmp);
    }
    for &a in &settings.candidates {
        problem.model().check_abundance(a)?;
        specs.push(DetectorSpec::Clairvoyant { a0: a });
    }
    let sample = draw_power_sample(
        problem.background(),
        problem.model(),
        &settings.a_grid,
        settings.n_background,
        settings.n_target_per_a,
        settings.seed,
    )?;
    let cache = ComponentScores::build(problem, &specs, &sample)?;
    let m = specs.len();

    let mut evaluations = 0usize;
    let mut exhausted = false;
    let mut eval = |w: &[f64]| -> Result<Option<f64>> {
        if evaluations >= settings.budget {
            exhausted = true;
            return Ok(None);
        }
        evaluations += 1;
        cache.objective(w, settings.far).map(Some)
    };

    let vertices: Vec<Vec<f64>> = (0..m)
        .map(|i| (0..m).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    let mut vertex_objectives = Vec::with_capacity(m);
    let mut best: Option<(Vec<f64>, f64)> = None;
    let consider = |w: Vec<f64>, v: f64, best: &mut Option<(Vec<f64>, f64)>| {
        if best.as_ref().is_none_or(|(_, b)| v > *b) {
            *best = Some((w, v));
        }
    };
    for v in &vertices {
        match eval(v)? {
            Some(obj) => {
                vertex_objectives.push(obj);
                consider(v.clone(), obj, &mut best);
            }
            None => break,
        }
    }
    if m > 1 {
        let bary = vec![1.0 / m as f64; m];
        if let Some(obj) = eval(&bary)? {
            consider(bary, obj, &mut best);
        }
    }
    let (mut w, mut value) = best.expect("budget admits at least one evaluation");

    if m > 1 {
        let mut step = INITIAL_STEP;
        'outer: while step >= FINAL_STEP {
            let mut improved = true;
            while improved {
                improved = false;
                for i in 0..m {
                    for sign in [1.0, -1.0] {
                        let mut trial = w.clone();
                        trial[i] += sign * step;
                        let trial = project_to_simplex(&trial);
                        if trial == w {
                            continue;
                        }
                        match eval(&trial)? {
                            Some(obj) if obj > value => {
                                w = trial;
                                value = obj;
                                improved = true;
                            }
                            Some(_) => {}
                            None => break 'outer,
                        }
                    }
                }
            }
            step /= 2.0;
        }
    }

    let powers = cache.powers(&w, settings.far)?;
    let (beta0, rest) = if settings.include_lmp {
        (w[0], &w[1..])
    } else {
        (0.0, &w[..])
    };
    // Renormalize so the weights pass the simplex check exactly.
    let total = beta0 + rest.iter().sum::<f64>();
    let components = settings
        .candidates
        .iter()
        .zip(rest)
        .map(|(&a, &b)| SculptComponent {
            abundance: a,
            beta: b / total,
        })
        .collect();
    Ok(SculptResult {
        beta0: beta0 / total,
        components,
        objective: value,
        powers,
        vertex_objectives,
        evaluations,
        budget_exhausted: exhausted,
    })
}
