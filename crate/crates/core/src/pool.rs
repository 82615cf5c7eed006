//! Weighted, append-only collections of samples from which episodes are drawn.

use std::collections::HashSet;

use rand::Rng;

use crate::error::{Error, Result};
use crate::sample::PoolSample;

/// Samples paired with relative draw weights, plus the label vocabulary that
/// defines the environment's actions.
#[derive(Debug, Clone)]
pub struct DataPool<S> {
    entries: Vec<(S, f64)>,
    // running sum of weights, parallel to `entries`
    cumulative: Vec<f64>,
    labels: Vec<String>,
    label_set: HashSet<String>,
    ids: HashSet<String>,
}

impl<S: PoolSample> DataPool<S> {
    /// Empty pool over a fixed label vocabulary (order is preserved).
    pub fn new<I, L>(labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = L>,
        L: Into<String>,
    {
        let mut out = Vec::new();
        let mut label_set = HashSet::new();
        for l in labels {
            let l = l.into();
            if !label_set.insert(l.clone()) {
                return Err(Error::Config(format!("duplicate label `{l}` in vocabulary")));
            }
            out.push(l);
        }
        Ok(Self {
            entries: Vec::new(),
            cumulative: Vec::new(),
            labels: out,
            label_set,
            ids: HashSet::new(),
        })
    }

    /// Pool with every sample at weight 1.0.
    pub fn from_samples<I, L>(labels: I, samples: impl IntoIterator<Item = S>) -> Result<Self>
    where
        I: IntoIterator<Item = L>,
        L: Into<String>,
    {
        let mut pool = Self::new(labels)?;
        for s in samples {
            pool.add_sample(s, 1.0)?;
        }
        Ok(pool)
    }

    pub fn add_sample(&mut self, sample: S, weight: f64) -> Result<()> {
        if !weight.is_finite() || weight < 0.0 {
            return Err(Error::InvalidWeight(weight));
        }
        if let Some(bad) = sample
            .vocabulary_labels()
            .iter()
            .find(|l| !self.label_set.contains(*l))
        {
            return Err(Error::VocabularyViolation(bad.clone()));
        }
        if self.ids.contains(sample.id()) {
            return Err(Error::DuplicateSample(sample.id().to_string()));
        }
        self.ids.insert(sample.id().to_string());
        let total = self.total_weight() + weight;
        self.entries.push((sample, weight));
        self.cumulative.push(total);
        Ok(())
    }

    /// Draws one sample with probability proportional to its weight.
    pub fn draw_sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<&S> {
        let total = self.total_weight();
        if total <= 0.0 {
            return Err(Error::EmptyPool);
        }
        let u = rng.random::<f64>() * total;
        let ix = self.cumulative.partition_point(|&c| c <= u);
        // guard against rounding pushing `u` past the last positive entry
        let ix = if ix < self.entries.len() {
            ix
        } else {
            self.entries.iter().rposition(|(_, w)| *w > 0.0).unwrap()
        };
        Ok(&self.entries[ix].0)
    }

    pub fn total_weight(&self) -> f64 {
        self.cumulative.last().copied().unwrap_or(0.0)
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&S, f64)> {
        self.entries.iter().map(|(s, w)| (s, *w))
    }
}
