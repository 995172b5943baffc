use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use super::{check_training_set, sq_dist};
use crate::error::{Error, Result};

/// Candidate length scales, tried in ascending order.
pub const LENGTH_SCALE_LADDER: [f64; 5] = [0.1, 0.3, 1.0, 3.0, 10.0];
const BASE_JITTER: f64 = 1e-6;
const MAX_JITTER: f64 = 1e-2;

fn matern52(r: f64, length_scale: f64) -> f64 {
    let s = 5f64.sqrt() * r / length_scale;
    (1.0 + s + s * s / 3.0) * (-s).exp()
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct TargetTransform {
    mean: f64,
    std: f64,
    log: bool,
}

/// Gaussian process with a unit-variance Matérn-5/2 kernel over
/// standardized (optionally log-transformed) targets.
#[derive(Debug, Clone)]
pub struct GpModel {
    x: Vec<Vec<f64>>,
    length_scale: f64,
    jitter: f64,
    chol_l: DMatrix<f64>,
    alpha: DVector<f64>,
    transform: TargetTransform,
    log_marginal_likelihood: f64,
}

struct Factored {
    chol: Cholesky<f64, Dyn>,
    jitter: f64,
}

fn factor(x: &[Vec<f64>], length_scale: f64) -> Option<Factored> {
    let n = x.len();
    let base = DMatrix::from_fn(n, n, |i, j| matern52(sq_dist(&x[i], &x[j]).sqrt(), length_scale));
    let mut jitter = BASE_JITTER;
    while jitter <= MAX_JITTER * (1.0 + 1e-9) {
        let k = &base + DMatrix::identity(n, n) * jitter;
        if let Some(chol) = Cholesky::new(k) {
            return Some(Factored { chol, jitter });
        }
        jitter *= 10.0;
    }
    None
}

impl GpModel {
    /// Fits the model, choosing the length scale from
    /// [`LENGTH_SCALE_LADDER`] by maximum marginal likelihood (ties go to the
    /// smaller scale).
    pub fn fit<X: AsRef<[f64]>>(x: &[X], y: &[f64], log_transform: bool) -> Result<Self> {
        check_training_set(x, y)?;
        if log_transform {
            if let Some(bad) = y.iter().find(|&&v| v <= 0.0) {
                return Err(Error::Fit(format!("log transform needs positive targets, got {bad}")));
            }
        }
        let z: Vec<f64> = if log_transform { y.iter().map(|v| v.ln()).collect() } else { y.to_vec() };
        let n = z.len() as f64;
        let mean = z.iter().sum::<f64>() / n;
        let var = z.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        let std = if var.sqrt() > 1e-12 { var.sqrt() } else { 1.0 };
        let transform = TargetTransform {
            mean,
            std,
            log: log_transform,
        };
        let ys = DVector::from_iterator(z.len(), z.iter().map(|v| (v - mean) / std));
        let xs: Vec<Vec<f64>> = x.iter().map(|r| r.as_ref().to_vec()).collect();

        let mut best: Option<(f64, f64, Factored, DVector<f64>)> = None;
        for &ls in &LENGTH_SCALE_LADDER {
            let Some(f) = factor(&xs, ls) else { continue };
            let alpha = f.chol.solve(&ys);
            let log_det: f64 = f.chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum();
            let lml = -0.5 * ys.dot(&alpha) - log_det - 0.5 * n * (2.0 * std::f64::consts::PI).ln();
            if best.as_ref().is_none_or(|b| lml > b.1) {
                best = Some((ls, lml, f, alpha));
            }
        }
        let (length_scale, lml, f, alpha) = best.ok_or_else(|| {
            Error::Numeric(format!("kernel matrix not positive definite with jitter up to {MAX_JITTER}"))
        })?;
        Ok(Self {
            x: xs,
            length_scale,
            jitter: f.jitter,
            chol_l: f.chol.l(),
            alpha,
            transform,
            log_marginal_likelihood: lml,
        })
    }

    pub fn length_scale(&self) -> f64 {
        self.length_scale
    }

    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn log_marginal_likelihood(&self) -> f64 {
        self.log_marginal_likelihood
    }

    /// Posterior mean and standard deviation in standardized latent units.
    pub fn latent_posterior(&self, x: &[f64]) -> (f64, f64) {
        // The jitter is a nugget of the covariance function: it also applies
        // between a query and a training input at the same location, so
        // training points are interpolated exactly.
        let k = DVector::from_iterator(
            self.x.len(),
            self.x.iter().map(|xi| {
                let d2 = sq_dist(xi, x);
                matern52(d2.sqrt(), self.length_scale) + if d2 == 0.0 { self.jitter } else { 0.0 }
            }),
        );
        let mean = k.dot(&self.alpha);
        let v = self
            .chol_l
            .solve_lower_triangular(&k)
            .expect("cholesky factor has a positive diagonal");
        let var = (1.0 + self.jitter - v.norm_squared()).max(0.0);
        (mean, var.sqrt())
    }

    /// Posterior mean and standard deviation on the original target scale.
    /// Under a log transform the mean is `exp` of the latent mean and the
    /// standard deviation follows the first-order delta rule.
    pub fn posterior(&self, x: &[f64]) -> (f64, f64) {
        let (m, s) = self.latent_posterior(x);
        let t = self.transform;
        let m = m * t.std + t.mean;
        let s = s * t.std;
        if t.log {
            let e = m.exp();
            (e, e * s)
        } else {
            (m, s)
        }
    }
}
