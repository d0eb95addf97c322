//! Independent oracles and fixtures shared by the integration tests.
#![allow(dead_code)]

use composite_detect::{GaussianBackground, ModelKind, TargetInteractionModel};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Dense Gaussian evaluated through an explicit inverse and an LU
/// determinant, sharing no code with the library's Cholesky path.
pub struct OracleGaussian {
    pub mean: DVector<f64>,
    pub precision: DMatrix<f64>,
    pub log_det: f64,
}

impl OracleGaussian {
    pub fn new(mean: &[f64], cov: &DMatrix<f64>) -> Self {
        let precision = cov.clone().try_inverse().expect("invertible covariance");
        Self {
            mean: DVector::from_column_slice(mean),
            precision,
            log_det: cov.clone().lu().determinant().ln(),
        }
    }

    pub fn log_density(&self, x: &[f64]) -> f64 {
        let r = DVector::from_column_slice(x) - &self.mean;
        let q = (r.transpose() * &self.precision * &r)[(0, 0)];
        let d = x.len() as f64;
        -0.5 * (d * (2.0 * std::f64::consts::PI).ln() + self.log_det + q)
    }

    /// `Sigma^{-1} (x - mu)`.
    pub fn whitened_residual(&self, x: &[f64]) -> DVector<f64> {
        &self.precision * (DVector::from_column_slice(x) - &self.mean)
    }
}

/// Log likelihood of `x` at abundance `a` under the three interaction
/// models, written directly from the change-of-variables formula.
pub fn oracle_log_likelihood(g: &OracleGaussian, kind: ModelKind, t: &[f64], a: f64, x: &[f64]) -> f64 {
    let d = x.len() as f64;
    match kind {
        ModelKind::Additive => {
            let z: Vec<f64> = x.iter().zip(t).map(|(x, t)| x - a * t).collect();
            g.log_density(&z)
        }
        ModelKind::Replacement => {
            let z: Vec<f64> = x.iter().zip(t).map(|(x, t)| (x - a * t) / (1.0 - a)).collect();
            -d * (1.0 - a).ln() + g.log_density(&z)
        }
        ModelKind::BeersLaw => {
            let z: Vec<f64> = x.iter().zip(t).map(|(x, t)| x * (a * t).exp()).collect();
            a * t.iter().sum::<f64>() + g.log_density(&z)
        }
    }
}

/// Deterministic correlated covariance: `0.6 I + 0.4 * rho^|i-j|`, scaled.
pub fn covariance(d: usize, scale: f64) -> DMatrix<f64> {
    DMatrix::from_fn(d, d, |i, j| {
        let lag = (i as i32 - j as i32).unsigned_abs() as i32;
        scale * ((if i == j { 0.6 } else { 0.0 }) + 0.4 * 0.5f64.powi(lag))
    })
}

pub fn signature(d: usize) -> Vec<f64> {
    (0..d).map(|i| 1.0 + 0.5 * ((i as f64) * 1.3).sin()).collect()
}

pub struct Fixture {
    pub kind: ModelKind,
    pub mean: Vec<f64>,
    pub cov: DMatrix<f64>,
    pub signature: Vec<f64>,
}

impl Fixture {
    /// Standard fixture per model. Beer's law gets a positive mean and a
    /// small spread so nonpositive draws are rare.
    pub fn new(kind: ModelKind, d: usize) -> Self {
        let (mean, scale) = match kind {
            ModelKind::BeersLaw => (vec![3.0; d], 0.25),
            _ => ((0..d).map(|i| 0.1 * i as f64).collect(), 1.0),
        };
        let signature = match kind {
            ModelKind::Replacement => (0..d).map(|i| 2.0 + 0.5 * ((i as f64) * 0.7).cos()).collect(),
            ModelKind::BeersLaw => signature(d).iter().map(|v| 0.5 * v).collect(),
            ModelKind::Additive => signature(d),
        };
        Self {
            kind,
            mean,
            cov: covariance(d, scale),
            signature,
        }
    }

    pub fn background(&self) -> GaussianBackground {
        GaussianBackground::new(self.mean.clone(), self.cov.clone()).unwrap()
    }

    pub fn model(&self) -> TargetInteractionModel {
        TargetInteractionModel::new(self.kind, self.signature.clone()).unwrap()
    }

    pub fn model_with_a_max(&self, a_max: f64) -> TargetInteractionModel {
        TargetInteractionModel::with_a_max(self.kind, self.signature.clone(), a_max).unwrap()
    }

    pub fn oracle(&self) -> OracleGaussian {
        OracleGaussian::new(&self.mean, &self.cov)
    }

    /// Background draws via an eigen-decomposition square root of the
    /// covariance, independent of the library's sampler.
    pub fn draw(&self, n: usize, seed: u64) -> Vec<Vec<f64>> {
        let eig = self.cov.clone().symmetric_eigen();
        let root = &eig.eigenvectors * DMatrix::from_diagonal(&eig.eigenvalues.map(f64::sqrt));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = self.mean.len();
        let mut out = Vec::with_capacity(n);
        while out.len() < n {
            let u = DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal));
            let z: Vec<f64> = (root.clone() * u).iter().zip(&self.mean).map(|(v, m)| v + m).collect();
            if self.kind == ModelKind::BeersLaw && z.iter().any(|&v| v <= 0.0) {
                continue;
            }
            out.push(z);
        }
        out
    }
}

/// Adaptive Simpson quadrature with absolute tolerance `tol`.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn step(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    step(f, a, b, fa, fm, fb, whole, tol, 50)
}

/// Pairwise AUC: `P(T > B) + P(T = B) / 2`, by direct comparison of all pairs.
pub fn brute_force_auc(bkg: &[f64], tgt: &[f64]) -> f64 {
    let mut twice = 0u64;
    for &t in tgt {
        for &b in bkg {
            twice += if t > b { 2 } else if t == b { 1 } else { 0 };
        }
    }
    twice as f64 / (2 * bkg.len() * tgt.len()) as f64
}

/// Least-squares slope of `ln y` on `ln x`.
pub fn log_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// Random pixels with integer-valued scores in a small range, so ties are common.
pub fn tied_scores<R: Rng>(rng: &mut R, n: usize, range: i32) -> Vec<f64> {
    (0..n).map(|_| f64::from(rng.random_range(0..range))).collect()
}

/// Adaptive Simpson on `panels` equal subintervals, for integrands whose
/// mass may sit inside a single coarse Simpson cell.
pub fn panelled_simpson(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64, panels: usize, tol: f64) -> f64 {
    let w = (hi - lo) / panels as f64;
    (0..panels)
        .map(|j| adaptive_simpson(f, lo + w * j as f64, lo + w * (j + 1) as f64, tol / panels as f64))
        .sum()
}
