//! Distribution comparison metrics: Pearson correlation, Jensen-Shannon
//! divergence and top-k agreement.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Logarithm base for [`jsd`]. Base 2 bounds the divergence by 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum LogBase {
    #[default]
    #[serde(rename = "2")]
    Two,
    #[serde(rename = "e")]
    E,
}

impl LogBase {
    fn ln_base(self) -> f64 {
        match self {
            LogBase::Two => std::f64::consts::LN_2,
            LogBase::E => 1.0,
        }
    }
}

fn check_lengths(p: &[f64], q: &[f64]) -> Result<()> {
    if p.len() != q.len() {
        return Err(Error::LengthMismatch(p.len(), q.len()));
    }
    Ok(())
}

fn centered(xs: &[f64]) -> (Vec<f64>, f64) {
    // An exactly constant vector can still get a mean off by one ulp.
    if xs.iter().all(|&x| x == xs[0]) {
        return (vec![0.0; xs.len()], 0.0);
    }
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    let c: Vec<f64> = xs.iter().map(|x| x - mean).collect();
    let ss = c.iter().map(|x| x * x).sum();
    (c, ss)
}

/// Sample Pearson correlation of paired entries.
pub fn pearson(p: &[f64], q: &[f64]) -> Result<f64> {
    pearson_with_gradient(p, q).map(|(r, _)| r)
}

/// Pearson correlation and its gradient with respect to `p`.
pub fn pearson_with_gradient(p: &[f64], q: &[f64]) -> Result<(f64, Vec<f64>)> {
    check_lengths(p, q)?;
    if p.len() < 2 {
        return Err(Error::InvalidArgument("pearson needs at least two pairs".into()));
    }
    let (pc, sp) = centered(p);
    let (qc, sq) = centered(q);
    if !(sp > 0.0) {
        return Err(Error::ZeroVariance("first argument"));
    }
    if !(sq > 0.0) {
        return Err(Error::ZeroVariance("second argument"));
    }
    let cov: f64 = pc.iter().zip(&qc).map(|(a, b)| a * b).sum();
    let norm = (sp * sq).sqrt();
    let r = cov / norm;
    if !r.is_finite() {
        return Err(Error::NonFinite("pearson".into()));
    }
    // dr/dp_i = qc_i / norm - r * pc_i / sp (centering terms cancel).
    let grad = pc.iter().zip(&qc).map(|(a, b)| b / norm - r * a / sp).collect();
    Ok((r.clamp(-1.0, 1.0), grad))
}

/// Jensen-Shannon divergence `½KL(p‖m) + ½KL(q‖m)`, `m = (p+q)/2`, with
/// `0·log 0 = 0`.
pub fn jsd(p: &[f64], q: &[f64], base: LogBase) -> Result<f64> {
    check_lengths(p, q)?;
    if p.iter().chain(q).any(|x| !x.is_finite() || *x < 0.0) {
        return Err(Error::InvalidArgument("jsd arguments must be non-negative".into()));
    }
    let kl_half = |a: f64, m: f64| if a > 0.0 { a * (a / m).ln() } else { 0.0 };
    let total: f64 = p
        .iter()
        .zip(q)
        .map(|(&a, &b)| {
            let m = 0.5 * (a + b);
            0.5 * (kl_half(a, m) + kl_half(b, m))
        })
        .sum();
    Ok((total / base.ln_base()).max(0.0))
}

/// Indices of the `k` largest entries, descending, ties to the lower index.
pub fn top_k(p: &[f64], k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..p.len()).collect();
    idx.sort_by(|&a, &b| p[b].partial_cmp(&p[a]).unwrap_or(Ordering::Equal).then(a.cmp(&b)));
    idx.truncate(k);
    idx
}

/// True when the k-th and (k+1)-th ranked entries are equal, i.e. the top-k
/// set depends on the tie-breaking rule.
pub fn top_k_boundary_tie(p: &[f64], k: usize) -> bool {
    if k == 0 || k >= p.len() {
        return false;
    }
    let ranked = top_k(p, k + 1);
    p[ranked[k - 1]] == p[ranked[k]]
}

/// `|top_k(p) ∩ top_k(q)|`.
pub fn k_agreement(p: &[f64], q: &[f64], k: usize) -> usize {
    let a = top_k(p, k);
    let b = top_k(q, k);
    a.iter().filter(|i| b.contains(i)).count()
}

/// Arithmetic mean and sample standard deviation. The SD is zero for a
/// single value.
pub fn mean_sd(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}
