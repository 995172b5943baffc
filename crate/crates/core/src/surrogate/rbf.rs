use nalgebra::{DMatrix, DVector};

use super::{check_training_set, sq_dist};
use crate::error::{Error, Result};

const RIDGE_START: f64 = 1e-8;
const RIDGE_MAX: f64 = 1e-2;
const RANK_TOL: f64 = 1e-9;

/// Cubic radial basis interpolant `s(x) = Σ w_i |x - c_i|³ + p(x)` with an
/// affine tail `p`.
///
/// The tail uses a maximal linearly independent subset of the columns
/// `[1, x_1, ..., x_d]` evaluated at the centers. One-hot encodings make the
/// full column set rank deficient; the reduced basis spans the same affine
/// functions on the centers' affine hull and keeps the saddle-point system
/// nonsingular.
#[derive(Debug, Clone, PartialEq)]
pub struct RbfModel {
    centers: Vec<Vec<f64>>,
    weights: Vec<f64>,
    /// Selected tail columns: 0 is the constant, `j + 1` is feature `j`.
    tail_columns: Vec<usize>,
    tail_coef: Vec<f64>,
    ridge: f64,
}

fn tail_value(col: usize, x: &[f64]) -> f64 {
    if col == 0 {
        1.0
    } else {
        x[col - 1]
    }
}

/// Greedy Gram-Schmidt column selection.
fn independent_columns(centers: &[Vec<f64>], d: usize) -> Vec<usize> {
    let mut basis: Vec<DVector<f64>> = Vec::new();
    let mut cols = Vec::new();
    for col in 0..=d {
        let mut v = DVector::from_iterator(centers.len(), centers.iter().map(|c| tail_value(col, c)));
        let norm0 = v.norm();
        if norm0 == 0.0 {
            continue;
        }
        for b in &basis {
            let proj = b.dot(&v);
            v -= b * proj;
        }
        let norm = v.norm();
        if norm > RANK_TOL * norm0.max(1.0) {
            basis.push(v / norm);
            cols.push(col);
        }
    }
    cols
}

impl RbfModel {
    pub fn fit<X: AsRef<[f64]>>(x: &[X], y: &[f64]) -> Result<Self> {
        let d = check_training_set(x, y)?;
        // Repeated centers carry identical targets here; keep the first.
        let mut centers: Vec<Vec<f64>> = Vec::new();
        let mut targets = Vec::new();
        for (xi, &yi) in x.iter().zip(y) {
            if !centers.iter().any(|c| c.as_slice() == xi.as_ref()) {
                centers.push(xi.as_ref().to_vec());
                targets.push(yi);
            }
        }
        let n = centers.len();
        let tail = independent_columns(&centers, d);
        let t = tail.len();
        let mut ridge = 0.0;
        loop {
            let a = DMatrix::from_fn(n + t, n + t, |i, j| match (i < n, j < n) {
                (true, true) => sq_dist(&centers[i], &centers[j]).sqrt().powi(3) + if i == j { ridge } else { 0.0 },
                (true, false) => tail_value(tail[j - n], &centers[i]),
                (false, true) => tail_value(tail[i - n], &centers[j]),
                (false, false) => 0.0,
            });
            let mut rhs = DVector::zeros(n + t);
            rhs.rows_mut(0, n).copy_from_slice(&targets);
            if let Some(sol) = a.lu().solve(&rhs) {
                if sol.iter().all(|v| v.is_finite()) {
                    return Ok(Self {
                        centers,
                        weights: sol.rows(0, n).iter().copied().collect(),
                        tail_columns: tail,
                        tail_coef: sol.rows(n, t).iter().copied().collect(),
                        ridge,
                    });
                }
            }
            ridge = if ridge == 0.0 { RIDGE_START } else { ridge * 10.0 };
            if ridge > RIDGE_MAX * (1.0 + 1e-9) {
                return Err(Error::Numeric(format!(
                    "RBF system singular with ridge up to {RIDGE_MAX}"
                )));
            }
        }
    }

    pub fn ridge(&self) -> f64 {
        self.ridge
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        let rbf: f64 = self
            .centers
            .iter()
            .zip(&self.weights)
            .map(|(c, w)| w * sq_dist(c, x).sqrt().powi(3))
            .sum();
        let poly: f64 = self
            .tail_columns
            .iter()
            .zip(&self.tail_coef)
            .map(|(&col, c)| c * tail_value(col, x))
            .sum();
        rbf + poly
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::SearchSpace;
    use rand::{seq::SliceRandom, Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn interpolates_centers() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x: Vec<Vec<f64>> = (0..15).map(|_| (0..3).map(|_| rng.gen_range(0.0..1.0)).collect()).collect();
        let y: Vec<f64> = (0..15).map(|_| rng.gen_range(1.0..100.0)).collect();
        let m = RbfModel::fit(&x, &y).unwrap();
        for (xi, yi) in x.iter().zip(&y) {
            assert!((m.predict(xi) - yi).abs() < 1e-6);
        }
    }

    #[test]
    fn single_center_is_constant() {
        let m = RbfModel::fit(&[vec![0.3, 0.7]], &[12.5]).unwrap();
        assert!((m.predict(&[0.3, 0.7]) - 12.5).abs() < 1e-12);
        assert!((m.predict(&[5.0, -2.0]) - 12.5).abs() < 1e-12);
    }

    #[test]
    fn reproduces_linear_functions_on_one_hot_points() {
        let space = SearchSpace::reference();
        let gcp = space.enumerate_provider(2).unwrap();
        let enc: Vec<Vec<f64>> = gcp.iter().map(|p| space.encode(p).unwrap().0).collect();
        let d = enc[0].len();
        let coef: Vec<f64> = (0..d).map(|j| 0.5 + j as f64 * 1.3).collect();
        let truth = |x: &[f64]| 7.0 + x.iter().zip(&coef).map(|(a, b)| a * b).sum::<f64>();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let mut idx: Vec<usize> = (0..enc.len()).collect();
            idx.shuffle(&mut rng);
            let train: Vec<Vec<f64>> = idx[..d + 2].iter().map(|&i| enc[i].clone()).collect();
            let y: Vec<f64> = train.iter().map(|x| truth(x)).collect();
            let m = RbfModel::fit(&train, &y).unwrap();
            for x in &enc {
                assert!((m.predict(x) - truth(x)).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn refit_is_identical() {
        let x = vec![vec![0.0], vec![0.5], vec![1.0]];
        let y = [1.0, 3.0, 2.0];
        assert_eq!(RbfModel::fit(&x, &y).unwrap(), RbfModel::fit(&x, &y).unwrap());
    }
}
