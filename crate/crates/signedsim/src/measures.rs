//! Value types for signed and non-negative distributions on finite index
//! sets, together with the divergence and distance computations used
//! throughout the crate.
//!
//! Conventions (fixed once here so every caller agrees):
//!
//! - KL divergence uses the natural logarithm (nats).
//! - `0 · log(0/x) = 0`, and `q_i > 0` with `p_i = 0` gives `+∞`.
//! - Construction renormalizes inputs whose total is within `1e-9` of one
//!   and rejects anything further away, so normalization drift cannot
//!   accumulate silently through long pipelines.
//!
//! All types are immutable values; every operation is a pure function of
//! its arguments.

use crate::error::{Error, Result};

/// Tolerance for accepting (and then renormalizing) a weight total.
pub const NORMALIZATION_TOL: f64 = 1e-9;

fn check_labels(labels: &[String], n: usize) -> Result<()> {
    if labels.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "{} labels for {} weights",
            labels.len(),
            n
        )));
    }
    let mut sorted: Vec<&String> = labels.iter().collect();
    sorted.sort();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidMeasure("duplicate labels".into()));
    }
    Ok(())
}

fn default_labels(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("s{i}")).collect()
}

/// A signed probability measure: real-valued weights on a finite label set
/// summing to one.  Negative entries are allowed; this is the
/// quasi-probability object the simulation scheme starts from.
#[derive(Debug, Clone, PartialEq)]
pub struct SignedMeasure {
    labels: Vec<String>,
    weights: Vec<f64>,
}

impl SignedMeasure {
    pub fn new(labels: Vec<String>, weights: Vec<f64>) -> Result<Self> {
        check_labels(&labels, weights.len())?;
        if weights.is_empty() || weights.iter().all(|&w| w == 0.0) {
            return Err(Error::InvalidMeasure("all weights are zero".into()));
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::InvalidMeasure("non-finite weight".into()));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::InvalidMeasure(format!(
                "weights sum to {sum}, not 1"
            )));
        }
        let weights = weights.iter().map(|w| w / sum).collect();
        Ok(Self { labels, weights })
    }

    /// Convenience constructor with generated labels `s0, s1, ...`.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        let labels = default_labels(weights.len());
        Self::new(labels, weights)
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// True when every weight is non-negative (a classical measure).
    pub fn is_classical(&self) -> bool {
        self.weights.iter().all(|&w| w >= 0.0)
    }
}

/// A non-negative probability distribution on a finite label set.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbDist {
    labels: Vec<String>,
    probs: Vec<f64>,
}

impl ProbDist {
    pub fn new(labels: Vec<String>, probs: Vec<f64>) -> Result<Self> {
        check_labels(&labels, probs.len())?;
        if probs.is_empty() {
            return Err(Error::InvalidDistribution("empty distribution".into()));
        }
        if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::InvalidDistribution(
                "negative or non-finite probability".into(),
            ));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::InvalidDistribution(format!(
                "probabilities sum to {sum}, not 1"
            )));
        }
        let probs = probs.iter().map(|p| p / sum).collect();
        Ok(Self { labels, probs })
    }

    /// Convenience constructor with generated labels `s0, s1, ...`.
    pub fn from_probs(probs: Vec<f64>) -> Result<Self> {
        let labels = default_labels(probs.len());
        Self::new(labels, probs)
    }

    pub fn uniform(labels: Vec<String>) -> Result<Self> {
        let n = labels.len();
        Self::new(labels, vec![1.0 / n as f64; n])
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn same_labels(&self, other: &ProbDist) -> bool {
        self.labels == other.labels
    }
}

/// Observed counts from `n_samples` i.i.d. draws.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrequencyDist {
    counts: Vec<u64>,
    n_samples: u64,
}

impl FrequencyDist {
    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn n_samples(&self) -> u64 {
        self.n_samples
    }

    /// Empirical probabilities `counts / n_samples`.
    pub fn probs(&self) -> Vec<f64> {
        let n = self.n_samples as f64;
        self.counts.iter().map(|&c| c as f64 / n).collect()
    }

    /// Attach labels to the empirical probabilities.
    pub fn to_dist(&self, labels: &[String]) -> Result<ProbDist> {
        ProbDist::new(labels.to_vec(), self.probs())
    }
}

/// Build a [`FrequencyDist`] from raw counts.
///
/// Errors with [`Error::EmptySample`] when the counts sum to zero.
pub fn empirical_from_counts(counts: &[u64]) -> Result<FrequencyDist> {
    let n_samples: u64 = counts.iter().sum();
    if n_samples == 0 {
        return Err(Error::EmptySample);
    }
    Ok(FrequencyDist {
        counts: counts.to_vec(),
        n_samples,
    })
}

/// KL divergence `D(q‖p) = Σ q_i ln(q_i / p_i)` in nats.
///
/// Returns `+∞` when `q` puts mass outside the support of `p`.  The label
/// sequences must be identical.
pub fn kl_divergence(q: &ProbDist, p: &ProbDist) -> Result<f64> {
    if !q.same_labels(p) {
        return Err(Error::LabelMismatch(
            "kl_divergence requires identical label sequences".into(),
        ));
    }
    Ok(kl_raw(q.probs(), p.probs()))
}

/// KL divergence on raw probability slices (callers guarantee alignment).
pub(crate) fn kl_raw(q: &[f64], p: &[f64]) -> f64 {
    let mut total = 0.0;
    for (&qi, &pi) in q.iter().zip(p) {
        if qi > 0.0 {
            if pi <= 0.0 {
                return f64::INFINITY;
            }
            total += qi * (qi / pi).ln();
        }
    }
    total
}

/// Total variation weight `Λ = Σ |λ_j|`.
///
/// Always at least one, with equality exactly when the measure is
/// classical (all weights non-negative).
pub fn total_variation_weight(lam: &SignedMeasure) -> f64 {
    lam.weights().iter().map(|w| w.abs()).sum()
}

/// L1 distance `Σ |a_i − b_i|` between two distributions on the same labels.
pub fn l1_distance(a: &ProbDist, b: &ProbDist) -> Result<f64> {
    if !a.same_labels(b) {
        return Err(Error::LabelMismatch(
            "l1_distance requires identical label sequences".into(),
        ));
    }
    Ok(l1_raw(a.probs(), b.probs()))
}

pub(crate) fn l1_raw(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}
