//! Configuration, scene generation, file formats and experiment running.

pub mod config;
pub mod csvio;
pub mod experiment;
pub mod fig1;
pub mod rng;
pub mod scene;

pub use config::{
    BackgroundSpec, EvaluationSpec, ExperimentConfig, Fig1Spec, ModelSpec, NamedDetector, SceneSpec, SculptSpec, Stage,
    SCHEMA_VERSION,
};
pub use experiment::{load_config, run_experiment, ResultsDocument, Tables};
pub use fig1::{emit_prior_curves, PriorCurveRow};
pub use rng::{substream, RNG_FAMILY};
pub use scene::{generate_scene, Label, Scene};
