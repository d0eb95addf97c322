//! Synthetic scene generation.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{BackgroundSpec, ExperimentConfig, ModelSpec};
use super::rng::{substream, RNG_FAMILY};
use crate::error::{Error, Result};
use crate::models::{GaussianBackground, ModelKind, TargetInteractionModel};
use crate::pixels::PixelMatrix;

/// Draws are abandoned once this many have been attempted with a majority
/// rejected.
const REJECTION_PROBE: u64 = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Background,
    Target,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationManifest {
    pub rng: String,
    pub n_background: usize,
    pub n_target: usize,
    /// Background draws discarded for a nonpositive channel (Beer's law only).
    pub rejections: u64,
    pub attempts: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub seed: u64,
    pub background: BackgroundSpec,
    pub model: ModelSpec,
    pub manifest: GenerationManifest,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub pixels: PixelMatrix,
    pub labels: Vec<Label>,
    pub abundances: Vec<f64>,
    pub provenance: Provenance,
}

impl Scene {
    fn split(&self, label: Label) -> PixelMatrix {
        let mut m = PixelMatrix::empty(self.pixels.dim()).expect("scene dimension is positive");
        for (row, l) in self.pixels.rows().zip(&self.labels) {
            if *l == label {
                m.push_row(row).expect("row length matches");
            }
        }
        m
    }

    pub fn background_pixels(&self) -> PixelMatrix {
        self.split(Label::Background)
    }

    pub fn target_pixels(&self) -> PixelMatrix {
        self.split(Label::Target)
    }
}

/// Result of drawing background pixels.
#[derive(Debug, Clone)]
pub struct BackgroundDraw {
    pub pixels: PixelMatrix,
    pub rejections: u64,
    pub attempts: u64,
}

/// Draw `n` background pixels. Under Beer's law, draws with any nonpositive
/// channel are rejected and redrawn; a rejection rate above one half is a
/// configuration error.
pub fn draw_background<R: Rng + ?Sized>(
    bg: &GaussianBackground,
    kind: ModelKind,
    n: usize,
    rng: &mut R,
) -> Result<BackgroundDraw> {
    let d = bg.mean().len();
    let mut pixels = PixelMatrix::new(d, Vec::with_capacity(n * d))?;
    let (mut rejections, mut attempts) = (0u64, 0u64);
    let too_many = |rej: u64, att: u64| 2 * rej > att;
    while pixels.len() < n {
        let z = bg.sample(rng);
        attempts += 1;
        if kind == ModelKind::BeersLaw && z.iter().any(|&v| v <= 0.0) {
            rejections += 1;
            if attempts >= REJECTION_PROBE && too_many(rejections, attempts) {
                break;
            }
            continue;
        }
        pixels.push_row(&z)?;
    }
    if too_many(rejections, attempts) {
        return Err(Error::config(format!(
            "Beer's-law background rejection rate {rejections}/{attempts} exceeds 50%; \
             shift the background mean further above zero"
        )));
    }
    Ok(BackgroundDraw {
        pixels,
        rejections,
        attempts,
    })
}

/// Draw `n` background pixels and embed a target of strength `a` in each.
pub fn draw_targets<R: Rng + ?Sized>(
    bg: &GaussianBackground,
    model: &TargetInteractionModel,
    a: f64,
    n: usize,
    rng: &mut R,
) -> Result<BackgroundDraw> {
    model.check_abundance(a)?;
    let mut draw = draw_background(bg, model.kind(), n, rng)?;
    let mut out = PixelMatrix::new(model.dim(), Vec::with_capacity(n * model.dim()))?;
    for z in draw.pixels.rows() {
        out.push_row(&model.embed(a, z)?)?;
    }
    draw.pixels = out;
    Ok(draw)
}

/// Generate the scene described by `config.scene` from `seed`.
///
/// Background pixels come first, followed by `n_per_abundance` targets for
/// each entry of `target_abundances`, in order.
pub fn generate_scene(config: &ExperimentConfig, seed: u64) -> Result<Scene> {
    config.validate()?;
    let bg = config.background.build()?;
    let model = config.model.build()?;
    let spec = &config.scene;
    let bkg = draw_background(&bg, model.kind(), spec.n_background, &mut substream(seed, "scene/background"))?;
    let targets: Vec<BackgroundDraw> = spec
        .target_abundances
        .par_iter()
        .enumerate()
        .map(|(k, &a)| {
            let mut rng = substream(seed, &format!("scene/target/{k}"));
            draw_targets(&bg, &model, a, spec.n_per_abundance, &mut rng)
        })
        .collect::<Result<_>>()?;

    let mut pixels = bkg.pixels.clone();
    let mut labels = vec![Label::Background; bkg.pixels.len()];
    let mut abundances = vec![0.0; bkg.pixels.len()];
    let (mut rejections, mut attempts) = (bkg.rejections, bkg.attempts);
    for (draw, &a) in targets.iter().zip(&spec.target_abundances) {
        for row in draw.pixels.rows() {
            pixels.push_row(row)?;
        }
        labels.extend(std::iter::repeat_n(Label::Target, draw.pixels.len()));
        abundances.extend(std::iter::repeat_n(a, draw.pixels.len()));
        rejections += draw.rejections;
        attempts += draw.attempts;
    }
    let n_target = labels.len() - bkg.pixels.len();
    Ok(Scene {
        pixels,
        labels,
        abundances,
        provenance: Provenance {
            seed,
            background: config.background.normalized(),
            model: config.model.clone(),
            manifest: GenerationManifest {
                rng: RNG_FAMILY.to_string(),
                n_background: spec.n_background,
                n_target,
                rejections,
                attempts,
            },
        },
    })
}
