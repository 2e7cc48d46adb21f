use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Tolerance on the total mass of a mixed strategy.
pub const MASS_TOLERANCE: f64 = 1e-12;

/// Probability vector over a bidder's bid set `0..v`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct MixedStrategy(Vec<f64>);

impl TryFrom<Vec<f64>> for MixedStrategy {
    type Error = crate::error::Error;

    fn try_from(probs: Vec<f64>) -> Result<Self> {
        Self::new(probs)
    }
}

impl From<MixedStrategy> for Vec<f64> {
    fn from(s: MixedStrategy) -> Self {
        s.0
    }
}

impl MixedStrategy {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return domain("mixed strategy over an empty bid set");
        }
        if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return domain("mixed strategy has a negative or non-finite entry");
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return domain(format!("mixed strategy sums to {total}"));
        }
        Ok(Self(probs))
    }

    /// `1_b` over a bid set of size `len`.
    pub fn point_mass(len: usize, bid: u32) -> Self {
        let mut probs = vec![0.0; len];
        probs[bid as usize] = 1.0;
        Self(probs)
    }

    pub fn uniform(len: usize) -> Self {
        Self(vec![1.0 / len as f64; len])
    }

    pub(crate) fn from_vec_unchecked(probs: Vec<f64>) -> Self {
        Self(probs)
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn prob(&self, bid: u32) -> f64 {
        self.0.get(bid as usize).copied().unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Most likely bid, lowest on ties.
    pub fn argmax(&self) -> u32 {
        let mut best = 0;
        for (b, &p) in self.0.iter().enumerate() {
            if p > self.0[best] {
                best = b;
            }
        }
        best as u32
    }

    /// Draw one bid by inversion using one uniform variate.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        let mut last_positive = 0;
        for (b, &p) in self.0.iter().enumerate() {
            if p > 0.0 {
                last_positive = b;
                acc += p;
                if u < acc {
                    return b as u32;
                }
            }
        }
        // Rounding left a sliver above the accumulated mass.
        last_positive as u32
    }
}
