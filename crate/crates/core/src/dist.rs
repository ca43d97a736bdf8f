//! Probability distributions over a finite label alphabet.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::logval::LogValue;

/// Tolerance on the total mass of a distribution.
pub const MASS_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Distribution {
    probs: Vec<f64>,
}

impl Distribution {
    /// Validates nonnegativity and total mass 1 within `MASS_TOL`.
    pub fn new(probs: Vec<f64>) -> Result<Distribution> {
        if probs.is_empty() {
            return Err(Error::InvalidDistribution {
                reason: "empty probability vector".into(),
            });
        }
        for (i, &p) in probs.iter().enumerate() {
            if !p.is_finite() || p < 0.0 {
                return Err(Error::InvalidDistribution {
                    reason: format!("entry {i} is {p}, must be a finite nonnegative number"),
                });
            }
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::InvalidDistribution {
                reason: format!("entries sum to {total}, expected 1 within {MASS_TOL}"),
            });
        }
        Ok(Distribution { probs })
    }

    pub fn uniform(k: usize) -> Distribution {
        assert!(k > 0);
        Distribution {
            probs: vec![1.0 / k as f64; k],
        }
    }

    pub fn point_mass(k: usize, label: usize) -> Distribution {
        assert!(label < k);
        let mut probs = vec![0.0; k];
        probs[label] = 1.0;
        Distribution { probs }
    }

    /// Binary distribution parameterized by the probability of label 1.
    pub fn bernoulli(p1: f64) -> Result<Distribution> {
        Distribution::new(vec![1.0 - p1, p1])
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn prob(&self, label: usize) -> f64 {
        self.probs[label]
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn log_prob(&self, label: usize) -> LogValue {
        LogValue::from_linear(self.probs[label])
    }

    /// Membership in the strictly positive simplex.
    pub fn strictly_positive(&self) -> bool {
        self.probs.iter().all(|&p| p > 0.0)
    }

    /// The smooth truncation map q(y) = (p(y) + delta) / (1 + K*delta),
    /// mixing toward uniform. `delta` is assumed already validated.
    pub fn smooth_truncate(&self, delta: f64) -> Distribution {
        let k = self.probs.len() as f64;
        let denom = 1.0 + k * delta;
        Distribution {
            probs: self.probs.iter().map(|p| (p + delta) / denom).collect(),
        }
    }
}
