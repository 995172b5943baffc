use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::error::{Error, Result};

/// Exploration weight of the lower confidence bound.
pub const DEFAULT_KAPPA: f64 = 1.96;

pub fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z * FRAC_1_SQRT_2)
}

pub fn normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * PI).sqrt()
}

/// Acquisition functions for minimization. Higher scores are more desirable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Acquisition {
    ExpectedImprovement,
    ProbabilityOfImprovement,
    LowerConfidenceBound { kappa: f64 },
}

impl Acquisition {
    pub fn lcb() -> Self {
        Acquisition::LowerConfidenceBound { kappa: DEFAULT_KAPPA }
    }

    pub fn score(&self, mean: f64, std: f64, best: f64) -> Result<f64> {
        if std.is_nan() || std < 0.0 {
            return Err(Error::Domain(format!("posterior std must be >= 0, got {std}")));
        }
        let gap = best - mean;
        Ok(match *self {
            Acquisition::ExpectedImprovement => {
                if std == 0.0 {
                    gap.max(0.0)
                } else {
                    let z = gap / std;
                    (gap * normal_cdf(z) + std * normal_pdf(z)).max(0.0)
                }
            }
            Acquisition::ProbabilityOfImprovement => {
                if std == 0.0 {
                    if mean < best {
                        1.0
                    } else {
                        0.0
                    }
                } else {
                    normal_cdf(gap / std)
                }
            }
            Acquisition::LowerConfidenceBound { kappa } => -(mean - kappa * std),
        })
    }
}
