use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::check_training_set;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub bootstrap: bool,
    /// Features examined per split; `None` means `ceil(sqrt(d))`.
    pub max_features: Option<usize>,
    /// Nodes with fewer samples than this become leaves.
    pub min_samples_split: usize,
    pub max_depth: Option<usize>,
}

impl Default for ForestConfig {
    fn default() -> Self {
        Self {
            n_trees: 30,
            bootstrap: true,
            max_features: None,
            min_samples_split: 2,
            max_depth: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Leaf(f64),
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    fn predict(&self, x: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf(v) => return v,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if x[feature] <= threshold { left } else { right },
            }
        }
    }
}

struct Builder<'a> {
    x: &'a [Vec<f64>],
    y: &'a [f64],
    max_features: usize,
    min_samples_split: usize,
    max_depth: Option<usize>,
    rng: ChaCha8Rng,
    nodes: Vec<Node>,
}

struct Split {
    feature: usize,
    threshold: f64,
    gain: f64,
}

impl Builder<'_> {
    fn build(&mut self, idx: &mut [usize], depth: usize) -> usize {
        let slot = self.nodes.len();
        let pure = idx.iter().all(|&i| self.y[i] == self.y[idx[0]]);
        let mean = if pure {
            self.y[idx[0]]
        } else {
            idx.iter().map(|&i| self.y[i]).sum::<f64>() / idx.len() as f64
        };
        self.nodes.push(Node::Leaf(mean));
        if pure || idx.len() < self.min_samples_split || self.max_depth.is_some_and(|d| depth >= d) {
            return slot;
        }
        let Some(split) = self.best_split(idx) else {
            return slot;
        };
        let mut cut = 0;
        for j in 0..idx.len() {
            if self.x[idx[j]][split.feature] <= split.threshold {
                idx.swap(cut, j);
                cut += 1;
            }
        }
        let (l, r) = idx.split_at_mut(cut);
        let left = self.build(l, depth + 1);
        let right = self.build(r, depth + 1);
        self.nodes[slot] = Node::Split {
            feature: split.feature,
            threshold: split.threshold,
            left,
            right,
        };
        slot
    }

    /// Greedy variance-reduction split over a random feature subset; falls
    /// back to the remaining features when the subset has no usable split.
    fn best_split(&mut self, idx: &[usize]) -> Option<Split> {
        let d = self.x[0].len();
        let chosen = sample(&mut self.rng, d, self.max_features.min(d)).into_vec();
        if let Some(s) = self.scan(idx, chosen.iter().copied()) {
            return Some(s);
        }
        let rest: Vec<usize> = (0..d).filter(|f| !chosen.contains(f)).collect();
        self.scan(idx, rest.into_iter())
    }

    fn scan(&self, idx: &[usize], features: impl Iterator<Item = usize>) -> Option<Split> {
        let n = idx.len() as f64;
        let total: f64 = idx.iter().map(|&i| self.y[i]).sum();
        let mut best: Option<Split> = None;
        let mut order = idx.to_vec();
        for f in features {
            order.sort_by(|&a, &b| self.x[a][f].total_cmp(&self.x[b][f]).then(a.cmp(&b)));
            let mut left_sum = 0.0;
            for (j, w) in order.windows(2).enumerate() {
                left_sum += self.y[w[0]];
                let (lo, hi) = (self.x[w[0]][f], self.x[w[1]][f]);
                if lo == hi {
                    continue;
                }
                let nl = (j + 1) as f64;
                let nr = n - nl;
                let right_sum = total - left_sum;
                let gain = left_sum * left_sum / nl + right_sum * right_sum / nr - total * total / n;
                if best.as_ref().is_none_or(|b| gain > b.gain) {
                    best = Some(Split {
                        feature: f,
                        threshold: 0.5 * (lo + hi),
                        gain,
                    });
                }
            }
        }
        best
    }
}

/// Bagged regression trees. Predictions are the mean across trees and the
/// uncertainty is the across-tree standard deviation.
#[derive(Debug, Clone, PartialEq)]
pub struct ForestModel {
    trees: Vec<Tree>,
    bootstrap_indices: Vec<Vec<usize>>,
}

impl ForestModel {
    pub fn fit<X: AsRef<[f64]>>(x: &[X], y: &[f64], config: &ForestConfig, seed: u64) -> Result<Self> {
        let d = check_training_set(x, y)?;
        if config.n_trees == 0 {
            return Err(Error::Fit("forest needs at least one tree".into()));
        }
        let xs: Vec<Vec<f64>> = x.iter().map(|r| r.as_ref().to_vec()).collect();
        let max_features = config
            .max_features
            .unwrap_or_else(|| (d as f64).sqrt().ceil() as usize)
            .clamp(1, d.max(1));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = xs.len();
        let mut trees = Vec::with_capacity(config.n_trees);
        let mut bootstrap_indices = Vec::with_capacity(config.n_trees);
        for _ in 0..config.n_trees {
            let mut idx: Vec<usize> = if config.bootstrap {
                (0..n).map(|_| rng.gen_range(0..n)).collect()
            } else {
                (0..n).collect()
            };
            bootstrap_indices.push(idx.clone());
            let mut b = Builder {
                x: &xs,
                y,
                max_features,
                min_samples_split: config.min_samples_split.max(2),
                max_depth: config.max_depth,
                rng: ChaCha8Rng::seed_from_u64(rng.gen()),
                nodes: Vec::new(),
            };
            if d > 0 {
                b.build(&mut idx, 0);
            } else {
                let mean = idx.iter().map(|&i| y[i]).sum::<f64>() / n as f64;
                b.nodes.push(Node::Leaf(mean));
            }
            trees.push(Tree { nodes: b.nodes });
        }
        Ok(Self {
            trees,
            bootstrap_indices,
        })
    }

    pub fn bootstrap_indices(&self) -> &[Vec<usize>] {
        &self.bootstrap_indices
    }

    pub fn predict(&self, x: &[f64]) -> (f64, f64) {
        let preds: Vec<f64> = self.trees.iter().map(|t| t.predict(x)).collect();
        if preds.iter().all(|&p| p == preds[0]) {
            return (preds[0], 0.0);
        }
        let n = preds.len() as f64;
        let mean = preds.iter().sum::<f64>() / n;
        let var = preds.iter().map(|p| (p - mean) * (p - mean)).sum::<f64>() / n;
        (mean, var.max(0.0).sqrt())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid() -> Vec<Vec<f64>> {
        let mut x = Vec::new();
        for a in 0..4 {
            for b in 0..3 {
                x.push(vec![a as f64 / 3.0, (b == 1) as u8 as f64, b as f64 / 2.0]);
            }
        }
        x
    }

    #[test]
    fn constant_targets() {
        let x = grid();
        let y = vec![4.2; x.len()];
        let m = ForestModel::fit(&x, &y, &ForestConfig::default(), 1).unwrap();
        assert_eq!(m.predict(&[0.3, 0.0, 0.9]), (4.2, 0.0));
    }

    #[test]
    fn single_full_tree_memorizes() {
        let x = grid();
        let y: Vec<f64> = (0..x.len()).map(|i| ((i * 7) % 5) as f64 + 0.1 * i as f64).collect();
        let cfg = ForestConfig {
            n_trees: 1,
            bootstrap: false,
            ..ForestConfig::default()
        };
        let m = ForestModel::fit(&x, &y, &cfg, 3).unwrap();
        for (xi, yi) in x.iter().zip(&y) {
            assert_eq!(m.predict(xi), (*yi, 0.0));
        }
    }

    #[test]
    fn same_seed_same_predictions() {
        let x = grid();
        let y: Vec<f64> = x.iter().map(|r| r[0] * 3.0 + r[2]).collect();
        let a = ForestModel::fit(&x, &y, &ForestConfig::default(), 8).unwrap();
        let b = ForestModel::fit(&x, &y, &ForestConfig::default(), 8).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.bootstrap_indices().len(), 30);
    }

    proptest! {
        #[test]
        fn mean_within_target_range(ys in prop::collection::vec(-50.0f64..50.0, 12), seed in 0u64..100,
                                    q in prop::collection::vec(0.0f64..1.0, 3)) {
            let x = grid();
            let m = ForestModel::fit(&x, &ys, &ForestConfig::default(), seed).unwrap();
            let (mean, std) = m.predict(&q);
            let lo = ys.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(mean >= lo - 1e-9 && mean <= hi + 1e-9);
            prop_assert!(std >= 0.0);
        }
    }
}
