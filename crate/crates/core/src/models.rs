//! Background distribution and target-interaction likelihoods.
//!
//! A target of strength `a` acts on a background pixel `z` through a map
//! `x = xi(a, z)`. The observation likelihood `p(a, x)` is the background
//! density evaluated at `xi^{-1}(a, x)`, corrected by the Jacobian of the map.
//! All densities are handled in the log domain.

use std::f64::consts::PI;
use std::ops::Deref;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::finite_diff;

/// Smallest admissible abundance. Only `a >= 0` alternatives are modelled.
pub const MIN_ABUNDANCE: f64 = 0.0;

/// Default upper abundance for the additive and Beer's-law models.
pub const DEFAULT_A_MAX: f64 = 1.0;

/// Default upper abundance for the replacement model; the likelihood diverges
/// at `a = 1`.
pub const REPLACEMENT_DEFAULT_A_MAX: f64 = 1.0 - 1e-9;

/// Relative step (times `a_max`) for finite-difference abundance derivatives.
pub const FD_RELATIVE_STEP: f64 = 1e-2;

/// A non-empty vector of finite spectral values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Spectrum(Vec<f64>);

impl Spectrum {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::contract("spectrum must have at least one channel"));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::contract(format!(
                "spectrum channel {i} is not finite ({})",
                values[i]
            )));
        }
        Ok(Self(values))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for Spectrum {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for Spectrum {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        Spectrum::new(values)
    }
}

impl From<Spectrum> for Vec<f64> {
    fn from(s: Spectrum) -> Self {
        s.0
    }
}

/// Background pixel distribution `P_bkg`.
///
/// Only [`GaussianBackground`] ships; other backgrounds can implement this
/// trait and reuse the likelihood and detector machinery.
pub trait Background: Send + Sync {
    fn dim(&self) -> usize;

    fn log_density(&self, x: &[f64]) -> Result<f64>;

    /// Gradient of `log P_bkg` at `x`.
    fn grad_log_density(&self, x: &[f64]) -> Result<Vec<f64>>;

    /// `v^T (Hessian of log P_bkg)(x) v` when available in closed form.
    fn directional_curvature(&self, _x: &[f64], _v: &[f64]) -> Option<f64> {
        None
    }
}

/// Multivariate normal background with a cached Cholesky factor.
#[derive(Debug, Clone)]
pub struct GaussianBackground {
    mean: DVector<f64>,
    covariance: DMatrix<f64>,
    /// Lower-triangular `L` with `L L^T = covariance`.
    factor: DMatrix<f64>,
    log_det: f64,
    log_norm: f64,
}

impl GaussianBackground {
    pub fn new(mean: Vec<f64>, covariance: DMatrix<f64>) -> Result<Self> {
        let mean = Spectrum::new(mean)?;
        let d = mean.len();
        if covariance.nrows() != d || covariance.ncols() != d {
            return Err(Error::contract(format!(
                "covariance is {}x{} but mean has {d} channels",
                covariance.nrows(),
                covariance.ncols()
            )));
        }
        if covariance.iter().any(|v| !v.is_finite()) {
            return Err(Error::contract("covariance has non-finite entries"));
        }
        let scale = covariance.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for i in 0..d {
            for j in 0..i {
                if (covariance[(i, j)] - covariance[(j, i)]).abs() > 1e-12 * scale {
                    return Err(Error::contract(format!(
                        "covariance is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        let chol = nalgebra::Cholesky::new(covariance.clone())
            .ok_or_else(|| Error::contract("covariance is not positive definite"))?;
        let factor = chol.l();
        if (0..d).any(|i| !(factor[(i, i)] > 0.0)) {
            return Err(Error::contract("covariance is not positive definite"));
        }
        let log_det = 2.0 * (0..d).map(|i| factor[(i, i)].ln()).sum::<f64>();
        let log_norm = -0.5 * (d as f64 * (2.0 * PI).ln() + log_det);
        Ok(Self {
            mean: DVector::from_vec(mean.into_vec()),
            covariance,
            factor,
            log_det,
            log_norm,
        })
    }

    /// Convenience constructor from row-major nested vectors.
    pub fn from_rows(mean: Vec<f64>, rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.len();
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::contract("covariance rows must form a square matrix"));
        }
        let cov = DMatrix::from_fn(d, d, |i, j| rows[i][j]);
        Self::new(mean, cov)
    }

    /// `N(mean * 1, variance * I)` in `dim` channels.
    pub fn isotropic(dim: usize, mean: f64, variance: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::contract("dimension must be at least 1"));
        }
        Self::new(
            vec![mean; dim],
            DMatrix::from_diagonal_element(dim, dim, variance),
        )
    }

    pub fn mean(&self) -> &[f64] {
        self.mean.as_slice()
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.covariance
    }

    pub fn cholesky_factor(&self) -> &DMatrix<f64> {
        &self.factor
    }

    pub fn log_determinant(&self) -> f64 {
        self.log_det
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.mean.len() {
            return Err(Error::contract(format!(
                "dimension mismatch: got {} channels, background has {}",
                x.len(),
                self.mean.len()
            )));
        }
        Ok(())
    }

    /// Solve `L y = v` by forward substitution.
    pub fn whiten(&self, v: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(v)?;
        Ok(self.forward_solve(v))
    }

    #[allow(clippy::needless_range_loop)]
    fn forward_solve(&self, v: &[f64]) -> Vec<f64> {
        let d = v.len();
        let mut y = vec![0.0; d];
        for i in 0..d {
            let mut acc = v[i];
            for j in 0..i {
                acc -= self.factor[(i, j)] * y[j];
            }
            y[i] = acc / self.factor[(i, i)];
        }
        y
    }

    /// Solve `L^T y = v` by back substitution.
    #[allow(clippy::needless_range_loop)]
    fn back_solve(&self, v: &[f64]) -> Vec<f64> {
        let d = v.len();
        let mut y = vec![0.0; d];
        for i in (0..d).rev() {
            let mut acc = v[i];
            for j in i + 1..d {
                acc -= self.factor[(j, i)] * y[j];
            }
            y[i] = acc / self.factor[(i, i)];
        }
        y
    }

    fn centered(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(self.mean.iter()).map(|(a, m)| a - m).collect()
    }

    /// `u^T Sigma^{-1} v`.
    pub fn precision_inner(&self, u: &[f64], v: &[f64]) -> Result<f64> {
        self.check_dim(u)?;
        self.check_dim(v)?;
        let wu = self.forward_solve(u);
        let wv = self.forward_solve(v);
        Ok(dot(&wu, &wv))
    }

    /// Matched-filter statistic `t^T Sigma^{-1} (x - mu)`.
    pub fn matched_filter(&self, signature: &[f64], x: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        self.precision_inner(signature, &self.centered(x))
    }

    /// Draw one pixel as `mu + L u` with `u` standard normal.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let d = self.mean.len();
        let u: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        (0..d)
            .map(|i| {
                let mut acc = self.mean[i];
                for (j, uj) in u.iter().enumerate().take(i + 1) {
                    acc += self.factor[(i, j)] * uj;
                }
                acc
            })
            .collect()
    }
}

impl Background for GaussianBackground {
    fn dim(&self) -> usize {
        self.mean.len()
    }

    fn log_density(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        let w = self.forward_solve(&self.centered(x));
        Ok(self.log_norm - 0.5 * dot(&w, &w))
    }

    fn grad_log_density(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x)?;
        let w = self.forward_solve(&self.centered(x));
        Ok(self.back_solve(&w).into_iter().map(|v| -v).collect())
    }

    fn directional_curvature(&self, x: &[f64], v: &[f64]) -> Option<f64> {
        if x.len() != self.dim() || v.len() != self.dim() {
            return None;
        }
        let w = self.forward_solve(v);
        Some(-dot(&w, &w))
    }
}

/// `log P_bkg(x)` with a dimension check.
pub fn log_bkg_density<B: Background + ?Sized>(bg: &B, x: &[f64]) -> Result<f64> {
    bg.log_density(x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    /// `xi(a, z) = z + a t`
    Additive,
    /// `xi(a, z) = (1 - a) z + a t`; opaque sub-pixel targets.
    Replacement,
    /// `xi(a, z) = z * exp(-a t)` channelwise; absorbing plumes.
    BeersLaw,
}

impl ModelKind {
    pub fn default_a_max(self) -> f64 {
        match self {
            ModelKind::Replacement => REPLACEMENT_DEFAULT_A_MAX,
            ModelKind::Additive | ModelKind::BeersLaw => DEFAULT_A_MAX,
        }
    }
}

/// A target-interaction model with known signature and abundance domain
/// `[0, a_max]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetInteractionModel {
    kind: ModelKind,
    signature: Spectrum,
    tau: f64,
    a_max: f64,
}

impl TargetInteractionModel {
    pub fn new(kind: ModelKind, signature: Vec<f64>) -> Result<Self> {
        Self::with_a_max(kind, signature, kind.default_a_max())
    }

    pub fn with_a_max(kind: ModelKind, signature: Vec<f64>, a_max: f64) -> Result<Self> {
        let signature = Spectrum::new(signature)?;
        if !(a_max > MIN_ABUNDANCE) || !a_max.is_finite() {
            return Err(Error::contract(format!(
                "a_max must be finite and positive, got {a_max}"
            )));
        }
        if kind == ModelKind::Replacement && a_max >= 1.0 {
            return Err(Error::contract(format!(
                "replacement model requires a_max < 1, got {a_max}"
            )));
        }
        let tau = signature.iter().sum();
        Ok(Self {
            kind,
            signature,
            tau,
            a_max,
        })
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn signature(&self) -> &[f64] {
        &self.signature
    }

    /// Sum of the signature entries (Beer's-law Jacobian exponent).
    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn a_max(&self) -> f64 {
        self.a_max
    }

    pub fn dim(&self) -> usize {
        self.signature.len()
    }

    pub fn check_abundance(&self, a: f64) -> Result<()> {
        if !(MIN_ABUNDANCE..=self.a_max).contains(&a) {
            return Err(Error::domain(format!(
                "abundance {a} outside [{MIN_ABUNDANCE}, {}]",
                self.a_max
            )));
        }
        Ok(())
    }

    fn check_vector(&self, v: &[f64], what: &str) -> Result<()> {
        if v.len() != self.dim() {
            return Err(Error::contract(format!(
                "{what} has {} channels, signature has {}",
                v.len(),
                self.dim()
            )));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::domain(format!("{what} has non-finite entries")));
        }
        if self.kind == ModelKind::BeersLaw && v.iter().any(|&x| x <= 0.0) {
            return Err(Error::domain(format!(
                "Beer's-law model requires strictly positive {what}"
            )));
        }
        Ok(())
    }

    /// Check that `x` lies in the observation domain of the model.
    pub fn check_observation(&self, x: &[f64]) -> Result<()> {
        self.check_vector(x, "observation")
    }

    /// `xi(a, z)`: the pixel observed when a target of strength `a` is
    /// present on background `z`.
    pub fn embed(&self, a: f64, z: &[f64]) -> Result<Vec<f64>> {
        self.check_abundance(a)?;
        self.check_vector(z, "background pixel")?;
        if a == 0.0 {
            return Ok(z.to_vec());
        }
        let t = self.signature.iter();
        Ok(match self.kind {
            ModelKind::Additive => z.iter().zip(t).map(|(z, t)| z + a * t).collect(),
            ModelKind::Replacement => z
                .iter()
                .zip(t)
                .map(|(z, t)| (1.0 - a) * z + a * t)
                .collect(),
            ModelKind::BeersLaw => z.iter().zip(t).map(|(z, t)| z * (-a * t).exp()).collect(),
        })
    }

    /// `xi^{-1}(a, x)`: the background pixel that maps to `x` at strength `a`.
    pub fn inverse_embed(&self, a: f64, x: &[f64]) -> Result<Vec<f64>> {
        self.check_abundance(a)?;
        self.check_observation(x)?;
        if a == 0.0 {
            return Ok(x.to_vec());
        }
        Ok(self.inverse_unchecked(a, x))
    }

    fn inverse_unchecked(&self, a: f64, x: &[f64]) -> Vec<f64> {
        let t = self.signature.iter();
        match self.kind {
            ModelKind::Additive => x.iter().zip(t).map(|(x, t)| x - a * t).collect(),
            ModelKind::Replacement => {
                let s = 1.0 - a;
                x.iter().zip(t).map(|(x, t)| (x - a * t) / s).collect()
            }
            ModelKind::BeersLaw => x.iter().zip(t).map(|(x, t)| x * (a * t).exp()).collect(),
        }
    }

    /// Log of the inverse Jacobian determinant `|d xi / d x|^{-1}`.
    fn log_jacobian(&self, a: f64) -> f64 {
        match self.kind {
            ModelKind::Additive => 0.0,
            ModelKind::Replacement => -(self.dim() as f64) * (-a).ln_1p(),
            ModelKind::BeersLaw => a * self.tau,
        }
    }

    /// `log p(a, x)`. At `a = 0` this is exactly `log P_bkg(x)`.
    pub fn log_likelihood<B: Background + ?Sized>(&self, bg: &B, a: f64, x: &[f64]) -> Result<f64> {
        self.check_abundance(a)?;
        self.check_observation(x)?;
        self.check_background(bg)?;
        if a == 0.0 {
            return bg.log_density(x);
        }
        self.log_likelihood_raw(bg, a, x)
    }

    /// `log p(a, x)` evaluated by the same closed form for abundances outside
    /// `[0, a_max]`, including small negative `a`. Intended for derivative
    /// checks at the null; `a` must keep the map invertible (`a < 1` for the
    /// replacement model).
    pub fn log_likelihood_continued<B: Background + ?Sized>(
        &self,
        bg: &B,
        a: f64,
        x: &[f64],
    ) -> Result<f64> {
        if !a.is_finite() || (self.kind == ModelKind::Replacement && a >= 1.0) {
            return Err(Error::domain(format!("abundance {a} makes the map singular")));
        }
        self.check_observation(x)?;
        self.check_background(bg)?;
        if a == 0.0 {
            return bg.log_density(x);
        }
        self.log_likelihood_raw(bg, a, x)
    }

    fn log_likelihood_raw<B: Background + ?Sized>(&self, bg: &B, a: f64, x: &[f64]) -> Result<f64> {
        let z = self.inverse_unchecked(a, x);
        Ok(self.log_jacobian(a) + bg.log_density(&z)?)
    }

    fn check_background<B: Background + ?Sized>(&self, bg: &B) -> Result<()> {
        if bg.dim() != self.dim() {
            return Err(Error::contract(format!(
                "background has {} channels, signature has {}",
                bg.dim(),
                self.dim()
            )));
        }
        Ok(())
    }

    /// LMP statistic `p'(0, x) / p(0, x)`, the abundance derivative of
    /// `log p(a, x)` at `a = 0`.
    ///
    /// With `g = grad log P_bkg(x)`: additive `-t.g`, replacement
    /// `d + g.(x - t)`, Beer's law `tau + g.(x * t)`. For the Gaussian
    /// background `g = -Sigma^{-1}(x - mu)`.
    pub fn lmp_statistic<B: Background + ?Sized>(&self, bg: &B, x: &[f64]) -> Result<f64> {
        self.check_observation(x)?;
        self.check_background(bg)?;
        let g = bg.grad_log_density(x)?;
        let t = self.signature.as_slice();
        Ok(match self.kind {
            ModelKind::Additive => -dot(t, &g),
            ModelKind::Replacement => {
                let v: Vec<f64> = x.iter().zip(t).map(|(x, t)| x - t).collect();
                self.dim() as f64 + dot(&g, &v)
            }
            ModelKind::BeersLaw => {
                let v: Vec<f64> = x.iter().zip(t).map(|(x, t)| x * t).collect();
                self.tau + dot(&g, &v)
            }
        })
    }

    /// `p''(0, x) / p(0, x) = (d^2/da^2 log p)(0, x) + lmp^2`.
    ///
    /// The curvature term is analytic for the additive model when the
    /// background exposes its Hessian, and otherwise comes from Richardson
    /// extrapolated central differences with step `FD_RELATIVE_STEP * a_max`.
    pub fn second_derivative_ratio<B: Background + ?Sized>(&self, bg: &B, x: &[f64]) -> Result<f64> {
        let lmp = self.lmp_statistic(bg, x)?;
        let analytic = match self.kind {
            ModelKind::Additive => bg.directional_curvature(x, self.signature()),
            _ => None,
        };
        let curvature = match analytic {
            Some(c) => c,
            None => {
                let h = FD_RELATIVE_STEP * self.a_max;
                let mut failure = None;
                let c = finite_diff::richardson_second(
                    |a| match self.log_likelihood_continued(bg, a, x) {
                        Ok(v) => v,
                        Err(e) => {
                            failure.get_or_insert(e);
                            f64::NAN
                        }
                    },
                    0.0,
                    h,
                );
                if let Some(e) = failure {
                    return Err(e);
                }
                c
            }
        };
        Ok(curvature + lmp * lmp)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
