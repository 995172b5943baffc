//! Regression surrogates and acquisition functions over encoded points.

mod acquisition;
mod forest;
mod gp;
mod rbf;

pub use acquisition::{normal_cdf, normal_pdf, Acquisition, DEFAULT_KAPPA};
pub use forest::{ForestConfig, ForestModel};
pub use gp::{GpModel, LENGTH_SCALE_LADDER};
pub use rbf::RbfModel;

use crate::error::{Error, Result};

/// Rejects training sets that contain the same input twice with different
/// targets; returns the input dimension.
pub(crate) fn check_training_set<X: AsRef<[f64]>>(x: &[X], y: &[f64]) -> Result<usize> {
    if x.is_empty() {
        return Err(Error::Fit("empty training set".into()));
    }
    if x.len() != y.len() {
        return Err(Error::Fit(format!("{} inputs but {} targets", x.len(), y.len())));
    }
    let d = x[0].as_ref().len();
    for (i, xi) in x.iter().enumerate() {
        if xi.as_ref().len() != d {
            return Err(Error::Fit("inputs have inconsistent dimension".into()));
        }
        if !y[i].is_finite() || xi.as_ref().iter().any(|v| !v.is_finite()) {
            return Err(Error::Fit(format!("non-finite training row {i}")));
        }
        for j in 0..i {
            if x[j].as_ref() == xi.as_ref() && y[j] != y[i] {
                return Err(Error::Fit(format!(
                    "rows {j} and {i} share an input but have targets {} and {}",
                    y[j], y[i]
                )));
            }
        }
    }
    Ok(d)
}

pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}
