//! Probability vectors and the log-space primitives used to build them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on the total mass of a distribution.
pub const MASS_TOLERANCE: f64 = 1e-9;

/// `log Σ exp(x_i)` with max-subtraction. Returns `-inf` for an empty slice
/// or when every entry is `-inf`.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    let sum: f64 = xs.iter().map(|&x| (x - max).exp()).sum();
    max + sum.ln()
}

/// Normalized log-probabilities `x_i - log Σ exp(x_j)`.
pub fn log_normalize(xs: &[f64]) -> Result<Vec<f64>> {
    let z = log_sum_exp(xs);
    if z == f64::NEG_INFINITY {
        return Err(Error::ZeroMass);
    }
    if !z.is_finite() {
        return Err(Error::NonFinite("log normalizer".into()));
    }
    Ok(xs.iter().map(|&x| x - z).collect())
}

/// Softmax of `scale * x`, computed in log space.
pub fn softmax_scaled(xs: &[f64], scale: f64) -> Result<Vec<f64>> {
    let scaled: Vec<f64> = xs
        .iter()
        .map(|&x| if scale == 0.0 { 0.0 } else { scale * x })
        .collect();
    Ok(log_normalize(&scaled)?.into_iter().map(f64::exp).collect())
}

/// Index of the largest entry; the lowest index wins ties.
pub fn argmax(xs: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &x) in xs.iter().enumerate() {
        match best {
            Some(b) if xs[b] >= x => {}
            _ => best = Some(i),
        }
    }
    best
}

/// Non-negative vector over a fixed index set summing to one.
///
/// Built from log-weights; the log-probabilities are kept alongside the
/// exponentiated probabilities so both views are available without
/// recomputation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "Vec<f64>", try_from = "Vec<f64>")]
pub struct Distribution {
    log_probs: Vec<f64>,
    probs: Vec<f64>,
}

impl Distribution {
    pub fn from_log_weights(log_weights: &[f64]) -> Result<Self> {
        if log_weights.iter().any(|x| x.is_nan()) {
            return Err(Error::NonFinite("NaN log-weight".into()));
        }
        let log_probs = log_normalize(log_weights)?;
        let probs: Vec<f64> = log_probs.iter().map(|x| x.exp()).collect();
        Ok(Distribution { log_probs, probs })
    }

    /// Normalize non-negative weights (counts, ratings, unnormalized mass).
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::InvalidArgument(format!("weight {w} is not a finite non-negative number")));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::ZeroMass);
        }
        let probs: Vec<f64> = weights.iter().map(|w| w / total).collect();
        let log_probs = probs.iter().map(|p| p.ln()).collect();
        Ok(Distribution { log_probs, probs })
    }

    /// Wrap probabilities that must already sum to one within [`MASS_TOLERANCE`].
    pub fn from_probs(probs: Vec<f64>) -> Result<Self> {
        if let Some(p) = probs.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return Err(Error::InvalidArgument(format!("probability {p} is not a finite non-negative number")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::InvalidArgument(format!("probabilities sum to {total}")));
        }
        let log_probs = probs.iter().map(|p| p.ln()).collect();
        Ok(Distribution { log_probs, probs })
    }

    pub fn uniform(n: usize) -> Self {
        let p = 1.0 / n as f64;
        Distribution {
            log_probs: vec![p.ln(); n],
            probs: vec![p; n],
        }
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn log_probs(&self) -> &[f64] {
        &self.log_probs
    }

    pub fn prob(&self, i: usize) -> f64 {
        self.probs[i]
    }

    pub fn argmax(&self) -> usize {
        argmax(&self.probs).expect("distribution is non-empty")
    }
}

impl From<Distribution> for Vec<f64> {
    fn from(d: Distribution) -> Self {
        d.probs
    }
}

impl TryFrom<Vec<f64>> for Distribution {
    type Error = Error;

    fn try_from(probs: Vec<f64>) -> Result<Self> {
        Distribution::from_probs(probs)
    }
}
