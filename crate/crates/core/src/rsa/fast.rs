use crate::dist::Distribution;
use crate::error::{Error, Result};
use crate::lexicon::{MetaphorItem, TypicalityTable};

/// `β_λ,i = β_i^λ / Σ_j β_j^λ`, computed as a softmax of `λ·log β`.
pub fn stretch_typicality(beta: &[f64], lambda: f64) -> Result<Distribution> {
    Distribution::from_log_weights(&stretched_log_weights(beta, lambda)?)
}

fn stretched_log_weights(beta: &[f64], lambda: f64) -> Result<Vec<f64>> {
    if !lambda.is_finite() {
        return Err(Error::InvalidArgument(format!("lambda {lambda} is not finite")));
    }
    beta.iter()
        .enumerate()
        .map(|(i, &b)| {
            if lambda == 0.0 {
                Ok(0.0)
            } else if b > 0.0 {
                Ok(lambda * b.ln())
            } else {
                Err(Error::DegenerateInput(format!(
                    "vehicle typicality of feature {i} is {b}; cannot stretch with lambda {lambda}"
                )))
            }
        })
        .collect()
}

/// Reduced pipeline: stretch the vehicle row and reweight it by the topic row,
/// `out_i ∝ α_i · β_λ,i` with `α = T[topic]` and `β = T[vehicle]`.
pub fn interpret_fast(metaphor: &MetaphorItem, lambda: f64, table: &TypicalityTable) -> Result<Distribution> {
    let alpha = table.row_of(&metaphor.topic)?;
    fast_with_derivative(alpha, table.row_of(&metaphor.vehicle)?, lambda).map(|(d, _)| d)
}

/// Fast-path output and its derivative with respect to lambda.
pub(crate) fn fast_with_derivative(alpha: &[f64], beta: &[f64], lambda: f64) -> Result<(Distribution, Vec<f64>)> {
    let stretched = stretched_log_weights(beta, lambda)?;
    let log_q: Vec<f64> = alpha
        .iter()
        .zip(&stretched)
        .map(|(&a, &s)| a.ln() + s)
        .collect();
    let out = Distribution::from_log_weights(&log_q)?;
    // d log q_i / dλ = log β_i; terms with p_i = 0 contribute nothing.
    let dlog: Vec<f64> = beta
        .iter()
        .zip(out.probs())
        .map(|(&b, &p)| if p > 0.0 { b.ln() } else { 0.0 })
        .collect();
    let mean: f64 = out.probs().iter().zip(&dlog).map(|(p, d)| p * d).sum();
    let deriv = out.probs().iter().zip(&dlog).map(|(p, d)| p * (d - mean)).collect();
    Ok((out, deriv))
}
