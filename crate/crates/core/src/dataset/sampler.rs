use std::collections::BTreeMap;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

use super::manifest::{Label, ManifestEntry};
use crate::error::{AugmentError, Result};

/// Per-entry draw probabilities, inversely proportional to class size.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplerWeights {
    probabilities: Vec<f64>,
}

impl SamplerWeights {
    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    /// Draws `count` entry indices with replacement.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R, count: usize) -> Vec<usize> {
        let dist = WeightedIndex::new(&self.probabilities).expect("validated weights");
        (0..count).map(|_| dist.sample(rng)).collect()
    }
}

pub fn balanced_weights(entries: &[ManifestEntry]) -> Result<SamplerWeights> {
    if entries.is_empty() {
        return Err(AugmentError::invalid("cannot balance an empty manifest"));
    }
    let mut counts: BTreeMap<Label, usize> = BTreeMap::new();
    for e in entries {
        *counts.entry(e.label).or_default() += 1;
    }
    let raw: Vec<f64> = entries
        .iter()
        .map(|e| 1.0 / counts[&e.label] as f64)
        .collect();
    let total: f64 = raw.iter().sum();
    Ok(SamplerWeights {
        probabilities: raw.into_iter().map(|w| w / total).collect(),
    })
}
