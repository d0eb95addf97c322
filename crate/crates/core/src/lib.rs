//! Detectors for a target of known signature and unknown strength in a
//! Gaussian background: clairvoyant, locally most powerful, GLRT and
//! Bayesian statistics, the small-epsilon mixed-prior family, and tools to
//! evaluate and compare them.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod detectors;
pub mod error;
pub mod evaluation;
pub mod harness;
pub mod models;
pub mod numerics;
pub mod pixels;
pub mod priors;

pub use detectors::{DetectionProblem, DetectorSpec, Penalty, PenalizedOutput, SculptComponent, SearchSettings};
pub use error::{Error, ErrorClass, Result};
pub use models::{Background, GaussianBackground, ModelKind, TargetInteractionModel};
pub use pixels::PixelMatrix;
pub use priors::{ContinuousDensity, MixedPriorSchedule, Prior};
