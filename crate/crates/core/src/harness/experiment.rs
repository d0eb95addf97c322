//! Running a configured pipeline into a self-contained results document.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, Stage, SCHEMA_VERSION};
use super::fig1::{emit_prior_curves, PriorCurveRow};
use super::rng::{substream, RNG_FAMILY};
use super::scene::{draw_background, generate_scene, Scene};
use crate::detectors::DetectionProblem;
use crate::error::Result;
use crate::evaluation::{
    convergence_study, dominance_check, draw_power_sample, empirical_roc, kendall, power_curve_on_sample,
    sculpt_optimize, ConvergenceStudy, DominanceReport, PowerCurve, RocCurve, SculptResult, SculptSettings,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LibraryInfo {
    pub name: String,
    pub version: String,
}

impl LibraryInfo {
    pub fn current() -> Self {
        Self {
            name: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneSummary {
    pub n_background: usize,
    pub n_target: usize,
    pub rejections: u64,
    pub attempts: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedRoc {
    pub detector: String,
    pub curve: RocCurve,
}

/// Kendall rank agreement between two detectors over all scene pixels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreAgreement {
    pub first: String,
    pub second: String,
    pub tau_b: f64,
    pub gamma: f64,
    pub discordant: u64,
    /// No discordant pair: the two detectors order the pixels identically.
    pub rank_consistent: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Tables {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scene: Option<SceneSummary>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub roc: Vec<NamedRoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub score_agreement: Vec<ScoreAgreement>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub power: Vec<PowerCurve>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub dominance: Vec<DominanceReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub convergence: Option<ConvergenceStudy>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sculpt: Option<SculptResult>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub fig1: Vec<PriorCurveRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultsDocument {
    pub schema_version: u32,
    pub library: LibraryInfo,
    pub rng: String,
    /// Normalized echo of the configuration that produced the tables.
    pub config: ExperimentConfig,
    pub tables: Tables,
    /// Wall-clock time per stage; not reproducible and excluded from
    /// table comparisons.
    pub timings_ms: BTreeMap<String, f64>,
}

impl ResultsDocument {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Re-run the embedded configuration.
    pub fn rerun(&self) -> Result<ResultsDocument> {
        run_experiment(&self.config)
    }
}

/// Read either a configuration or a results document (whose embedded
/// configuration is used) from JSON text.
pub fn load_config(text: &str) -> Result<ExperimentConfig> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    let cfg: ExperimentConfig = match value.get("config") {
        Some(inner) if value.get("tables").is_some() => serde_json::from_value(inner.clone())?,
        _ => serde_json::from_value(value)?,
    };
    cfg.validate()?;
    Ok(cfg)
}

fn timed<T>(timings: &mut BTreeMap<String, f64>, name: &str, f: impl FnOnce() -> Result<T>) -> Result<T> {
    let start = Instant::now();
    let out = f()?;
    timings.insert(name.into(), start.elapsed().as_secs_f64() * 1e3);
    Ok(out)
}

fn roc_tables(
    cfg: &ExperimentConfig,
    problem: &DetectionProblem,
    scene: &Scene,
) -> Result<(Vec<NamedRoc>, Vec<ScoreAgreement>)> {
    let bkg = scene.background_pixels();
    let tgt = scene.target_pixels();
    let mut rocs = Vec::new();
    let mut all_scores = Vec::new();
    for d in &cfg.detectors {
        let sb = problem.batch_scores(&d.spec, &bkg)?;
        let st = problem.batch_scores(&d.spec, &tgt)?;
        rocs.push(NamedRoc {
            detector: d.label(),
            curve: empirical_roc(&sb, &st)?,
        });
        all_scores.push([sb, st].concat());
    }
    let mut agreement = Vec::new();
    for i in 0..cfg.detectors.len() {
        for j in i + 1..cfg.detectors.len() {
            let k = kendall(&all_scores[i], &all_scores[j])?;
            agreement.push(ScoreAgreement {
                first: cfg.detectors[i].label(),
                second: cfg.detectors[j].label(),
                tau_b: k.tau_b,
                gamma: k.gamma,
                discordant: k.discordant,
                rank_consistent: k.is_rank_consistent(),
            });
        }
    }
    Ok((rocs, agreement))
}

fn power_tables(cfg: &ExperimentConfig, problem: &DetectionProblem) -> Result<(Vec<PowerCurve>, Vec<DominanceReport>)> {
    let ev = &cfg.evaluation;
    let sample = draw_power_sample(
        problem.background(),
        problem.model(),
        &ev.a_grid,
        ev.n_background,
        ev.n_target_per_a,
        cfg.seed,
    )?;
    let mut curves = Vec::new();
    for d in &cfg.detectors {
        let mut c = power_curve_on_sample(problem, &d.spec, &sample, ev.far)?;
        c.label = d.label();
        curves.push(c);
    }
    let mut reports = Vec::new();
    for i in 0..curves.len() {
        for j in i + 1..curves.len() {
            reports.push(dominance_check(&curves[i], &curves[j], ev.confidence)?);
        }
    }
    Ok((curves, reports))
}

fn convergence_table(cfg: &ExperimentConfig, problem: &DetectionProblem) -> Result<ConvergenceStudy> {
    let ev = &cfg.evaluation;
    let pixels = draw_background(
        problem.background(),
        problem.model().kind(),
        ev.convergence_pixels,
        &mut substream(cfg.seed, "converge/pixels"),
    )?
    .pixels;
    convergence_study(problem, ev.beta, &ev.base_prior, &ev.epsilons, &pixels)
}

fn sculpt_table(cfg: &ExperimentConfig, problem: &DetectionProblem) -> Result<SculptResult> {
    let ev = &cfg.evaluation;
    sculpt_optimize(
        problem,
        &SculptSettings {
            candidates: ev.sculpt.candidates.clone(),
            include_lmp: ev.sculpt.include_lmp,
            a_grid: ev.a_grid.clone(),
            far: ev.far,
            n_background: ev.n_background,
            n_target_per_a: ev.n_target_per_a,
            seed: cfg.seed,
            budget: ev.sculpt.budget,
        },
    )
}

/// Run every stage of `config.pipeline`, in a fixed order, and collect the
/// results. All randomness derives from `config.seed`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ResultsDocument> {
    config.validate()?;
    let cfg = config.normalized();
    let problem = cfg.problem()?;
    let mut tables = Tables::default();
    let mut timings = BTreeMap::new();

    if cfg.has_stage(Stage::Roc) {
        let scene = timed(&mut timings, "generate", || generate_scene(&cfg, cfg.seed))?;
        let m = &scene.provenance.manifest;
        tables.scene = Some(SceneSummary {
            n_background: m.n_background,
            n_target: m.n_target,
            rejections: m.rejections,
            attempts: m.attempts,
        });
        let (roc, agreement) = timed(&mut timings, "roc", || roc_tables(&cfg, &problem, &scene))?;
        tables.roc = roc;
        tables.score_agreement = agreement;
    }
    if cfg.has_stage(Stage::Power) {
        let (power, dominance) = timed(&mut timings, "power", || power_tables(&cfg, &problem))?;
        tables.power = power;
        tables.dominance = dominance;
    }
    if cfg.has_stage(Stage::Converge) {
        tables.convergence = Some(timed(&mut timings, "converge", || convergence_table(&cfg, &problem))?);
    }
    if cfg.has_stage(Stage::Sculpt) {
        tables.sculpt = Some(timed(&mut timings, "sculpt", || sculpt_table(&cfg, &problem))?);
    }
    if cfg.has_stage(Stage::Fig1) {
        let f = &cfg.evaluation.fig1;
        tables.fig1 = timed(&mut timings, "fig1", || {
            emit_prior_curves(f.beta, &f.epsilons, &cfg.evaluation.base_prior, &f.a_grid)
        })?;
    }
    Ok(ResultsDocument {
        schema_version: SCHEMA_VERSION,
        library: LibraryInfo::current(),
        rng: RNG_FAMILY.into(),
        config: cfg,
        tables,
        timings_ms: timings,
    })
}
