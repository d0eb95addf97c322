//! Experiment configuration documents.

use serde::{Deserialize, Serialize};

use crate::detectors::{DetectionProblem, DetectorSpec, SearchSettings};
use crate::error::{Error, Result};
use crate::evaluation::sculpt::DEFAULT_BUDGET;
use crate::models::{GaussianBackground, ModelKind, TargetInteractionModel};
use crate::priors::{MixedPriorSchedule, Prior};

pub const SCHEMA_VERSION: u32 = 1;

/// Gaussian background, either explicit or as `variance * I` with a constant mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BackgroundSpec {
    Full {
        mean: Vec<f64>,
        covariance: Vec<Vec<f64>>,
    },
    Isotropic {
        dimension: usize,
        mean: f64,
        variance: f64,
    },
}

impl BackgroundSpec {
    pub fn dim(&self) -> usize {
        match self {
            BackgroundSpec::Full { mean, .. } => mean.len(),
            BackgroundSpec::Isotropic { dimension, .. } => *dimension,
        }
    }

    /// Expanded to the explicit form.
    pub fn normalized(&self) -> BackgroundSpec {
        match self {
            BackgroundSpec::Full { .. } => self.clone(),
            BackgroundSpec::Isotropic {
                dimension,
                mean,
                variance,
            } => BackgroundSpec::Full {
                mean: vec![*mean; *dimension],
                covariance: (0..*dimension)
                    .map(|i| (0..*dimension).map(|j| if i == j { *variance } else { 0.0 }).collect())
                    .collect(),
            },
        }
    }

    pub fn build(&self) -> Result<GaussianBackground> {
        match self {
            BackgroundSpec::Full { mean, covariance } => GaussianBackground::from_rows(mean.clone(), covariance),
            BackgroundSpec::Isotropic {
                dimension,
                mean,
                variance,
            } => GaussianBackground::isotropic(*dimension, *mean, *variance),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub signature: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a_max: Option<f64>,
}

impl ModelSpec {
    pub fn build(&self) -> Result<TargetInteractionModel> {
        TargetInteractionModel::with_a_max(
            self.kind,
            self.signature.clone(),
            self.a_max.unwrap_or_else(|| self.kind.default_a_max()),
        )
    }

    pub fn normalized(&self) -> ModelSpec {
        ModelSpec {
            a_max: Some(self.a_max.unwrap_or_else(|| self.kind.default_a_max())),
            ..self.clone()
        }
    }
}

/// A detector with an optional display name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedDetector {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(flatten)]
    pub spec: DetectorSpec,
}

impl NamedDetector {
    pub fn new(spec: DetectorSpec) -> Self {
        Self { name: None, spec }
    }

    pub fn label(&self) -> String {
        self.name.clone().unwrap_or_else(|| self.spec.label())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SceneSpec {
    pub n_background: usize,
    pub target_abundances: Vec<f64>,
    pub n_per_abundance: usize,
}

impl Default for SceneSpec {
    fn default() -> Self {
        Self {
            n_background: 1000,
            target_abundances: Vec::new(),
            n_per_abundance: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SculptSpec {
    pub candidates: Vec<f64>,
    pub include_lmp: bool,
    pub budget: usize,
}

impl Default for SculptSpec {
    fn default() -> Self {
        Self {
            candidates: Vec::new(),
            include_lmp: true,
            budget: DEFAULT_BUDGET,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Fig1Spec {
    pub beta: f64,
    pub epsilons: Vec<f64>,
    pub a_grid: Vec<f64>,
}

impl Default for Fig1Spec {
    fn default() -> Self {
        Self {
            beta: 0.5,
            epsilons: vec![0.1, 0.05, 0.025, 0.0125],
            a_grid: (1..=40).map(|i| f64::from(i) / 40.0).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvaluationSpec {
    pub far: f64,
    pub a_grid: Vec<f64>,
    pub n_background: usize,
    pub n_target_per_a: usize,
    pub confidence: f64,
    pub epsilons: Vec<f64>,
    pub beta: f64,
    pub base_prior: Prior,
    pub convergence_pixels: usize,
    pub sculpt: SculptSpec,
    pub fig1: Fig1Spec,
}

impl Default for EvaluationSpec {
    fn default() -> Self {
        Self {
            far: 0.05,
            a_grid: Vec::new(),
            n_background: 2000,
            n_target_per_a: 2000,
            confidence: 0.99,
            epsilons: vec![0.02, 0.01, 0.005, 0.0025],
            beta: 0.5,
            base_prior: Prior::uniform01(),
            convergence_pixels: 200,
            sculpt: SculptSpec::default(),
            fig1: Fig1Spec::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    /// ROC curves and pairwise score agreement on the generated scene.
    Roc,
    /// Power curves on a fresh Monte-Carlo sample, with pairwise dominance.
    Power,
    Converge,
    Sculpt,
    Fig1,
}

fn default_pipeline() -> Vec<Stage> {
    vec![Stage::Roc]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub seed: u64,
    pub background: BackgroundSpec,
    pub model: ModelSpec,
    #[serde(default)]
    pub detectors: Vec<NamedDetector>,
    #[serde(default)]
    pub scene: SceneSpec,
    #[serde(default)]
    pub evaluation: EvaluationSpec,
    #[serde(default)]
    pub search: SearchSettings,
    #[serde(default = "default_pipeline")]
    pub pipeline: Vec<Stage>,
}

fn check_grid(name: &str, grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::config(format!("{name} is empty")));
    }
    if grid.iter().any(|v| !v.is_finite()) || grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::config(format!("{name} must be finite and strictly increasing")));
    }
    Ok(())
}

fn check_far(far: f64) -> Result<()> {
    if far > 0.0 && far < 1.0 {
        Ok(())
    } else {
        Err(Error::config(format!("far must lie in (0, 1), got {far}")))
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Explicit background, explicit `a_max`, named detectors.
    pub fn normalized(&self) -> ExperimentConfig {
        ExperimentConfig {
            background: self.background.normalized(),
            model: self.model.normalized(),
            detectors: self
                .detectors
                .iter()
                .map(|d| NamedDetector {
                    name: Some(d.label()),
                    spec: d.spec.clone(),
                })
                .collect(),
            ..self.clone()
        }
    }

    pub fn problem(&self) -> Result<DetectionProblem> {
        DetectionProblem::with_settings(self.background.build()?, self.model.build()?, self.search)
    }

    pub fn has_stage(&self, stage: Stage) -> bool {
        self.pipeline.contains(&stage)
    }

    /// Check every field that any requested stage will use.
    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::config(format!(
                "unsupported schema_version {}, expected {SCHEMA_VERSION}",
                self.schema_version
            )));
        }
        if self.pipeline.is_empty() {
            return Err(Error::config("pipeline is empty"));
        }
        let model = self.model.build()?;
        if self.background.dim() != model.dim() {
            return Err(Error::config(format!(
                "background has {} channels but the signature has {}",
                self.background.dim(),
                model.dim()
            )));
        }
        self.problem()?;

        let mut labels = std::collections::BTreeSet::new();
        for d in &self.detectors {
            d.spec.validate(&model)?;
            if !labels.insert(d.label()) {
                return Err(Error::config(format!("duplicate detector name {:?}", d.label())));
            }
        }

        for &a in &self.scene.target_abundances {
            if !(a > 0.0) {
                return Err(Error::config(format!("scene target abundances must be > 0, got {a}")));
            }
            model.check_abundance(a)?;
        }
        if !self.scene.target_abundances.is_empty() && self.scene.n_per_abundance == 0 {
            return Err(Error::config("scene.n_per_abundance must be positive when targets are requested"));
        }

        let ev = &self.evaluation;
        let needs_detectors = self.has_stage(Stage::Roc) || self.has_stage(Stage::Power);
        if needs_detectors && self.detectors.is_empty() {
            return Err(Error::config("detector list is empty"));
        }
        if self.has_stage(Stage::Roc) && (self.scene.n_background == 0 || self.scene.target_abundances.is_empty()) {
            return Err(Error::config("the roc stage needs background and target pixels in the scene"));
        }
        if self.has_stage(Stage::Power) || self.has_stage(Stage::Sculpt) {
            check_far(ev.far)?;
            check_grid("evaluation.a_grid", &ev.a_grid)?;
            ev.a_grid.iter().try_for_each(|&a| model.check_abundance(a))?;
            if ev.n_background == 0 || ev.n_target_per_a == 0 {
                return Err(Error::config("power sample sizes must be positive"));
            }
            if !(ev.confidence > 0.0 && ev.confidence < 1.0) {
                return Err(Error::config(format!("confidence must lie in (0, 1), got {}", ev.confidence)));
            }
        }
        if self.has_stage(Stage::Converge) {
            if ev.epsilons.is_empty() || ev.epsilons.windows(2).any(|w| !(w[1] < w[0])) {
                return Err(Error::config("evaluation.epsilons must be nonempty and strictly decreasing"));
            }
            ev.base_prior.check_domain(model.a_max())?;
            for &e in &ev.epsilons {
                MixedPriorSchedule::new(ev.beta, e, ev.base_prior.clone())?;
            }
            if ev.convergence_pixels == 0 {
                return Err(Error::config("evaluation.convergence_pixels must be positive"));
            }
        }
        if self.has_stage(Stage::Sculpt) {
            if ev.sculpt.candidates.is_empty() {
                return Err(Error::config("evaluation.sculpt.candidates is empty"));
            }
            ev.sculpt.candidates.iter().try_for_each(|&a| model.check_abundance(a))?;
            if ev.sculpt.budget == 0 {
                return Err(Error::config("evaluation.sculpt.budget must be positive"));
            }
        }
        if self.has_stage(Stage::Fig1) {
            let f = &ev.fig1;
            check_grid("evaluation.fig1.a_grid", &f.a_grid)?;
            if f.a_grid[0] <= 0.0 || f.a_grid[f.a_grid.len() - 1] > 1.0 {
                return Err(Error::config("evaluation.fig1.a_grid must lie in (0, 1]"));
            }
            if f.epsilons.is_empty() {
                return Err(Error::config("evaluation.fig1.epsilons is empty"));
            }
            for &e in &f.epsilons {
                MixedPriorSchedule::new(f.beta, e, ev.base_prior.clone())?;
            }
        }
        Ok(())
    }
}
