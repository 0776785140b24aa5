//! Nonlinear conjugate gradient ascent (Polak-Ribière) with Armijo
//! backtracking.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A smooth function to be maximized.
pub trait Objective {
    fn value_and_gradient(&self, x: &[f64]) -> Result<(f64, Vec<f64>)>;
}

impl<F> Objective for F
where
    F: Fn(&[f64]) -> Result<(f64, Vec<f64>)>,
{
    fn value_and_gradient(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        self(x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgOptions {
    pub max_iterations: usize,
    /// Stop once the gradient norm is at or below this.
    pub tol: f64,
    /// Sufficient-increase constant.
    pub armijo: f64,
    /// Step shrink factor on rejection.
    pub shrink: f64,
    pub max_backtracks: usize,
}

impl Default for CgOptions {
    fn default() -> Self {
        CgOptions {
            max_iterations: 200,
            tol: 1e-6,
            armijo: 1e-4,
            shrink: 0.5,
            max_backtracks: 60,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    GradientTolerance,
    MaxIterations,
    /// No step along the search direction gave sufficient increase.
    LineSearchStalled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CgStep {
    pub iteration: usize,
    pub x: Vec<f64>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CgOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub gradient: Vec<f64>,
    pub iterations: usize,
    pub stop: StopReason,
    /// Starting point followed by every accepted iterate.
    pub trace: Vec<CgStep>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn finite(v: f64, g: &[f64]) -> bool {
    v.is_finite() && g.iter().all(|x| x.is_finite())
}

/// Maximize `f` from `x0`. Directions restart to the gradient every
/// `x0.len()` iterations and whenever the Polak-Ribière update stops being
/// an ascent direction.
pub fn maximize<F: Objective + ?Sized>(f: &F, x0: &[f64], opts: &CgOptions) -> Result<CgOutcome> {
    if x0.is_empty() || x0.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument("starting point must be finite and non-empty".into()));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }
    let dim = x0.len();
    let mut x = x0.to_vec();
    let (mut value, mut grad) = f.value_and_gradient(&x)?;
    if !finite(value, &grad) {
        return Err(Error::NonFinite("objective at starting point".into()));
    }
    let mut trace = vec![CgStep {
        iteration: 0,
        x: x.clone(),
        value,
    }];
    let mut dir = grad.clone();
    let mut prev: Option<(Vec<f64>, Vec<f64>)> = None;
    let mut prev_alpha = 0.0;
    let mut iterations = 0;

    let stop = loop {
        if norm(&grad) <= opts.tol {
            break StopReason::GradientTolerance;
        }
        if iterations >= opts.max_iterations {
            break StopReason::MaxIterations;
        }
        let slope = dot(&grad, &dir);
        let mut alpha = initial_step(&x, &grad, &dir, prev.as_ref(), prev_alpha);

        let mut accepted = None;
        for _ in 0..=opts.max_backtracks {
            let trial: Vec<f64> = x.iter().zip(&dir).map(|(xi, di)| xi + alpha * di).collect();
            if let Ok((v, g)) = f.value_and_gradient(&trial) {
                if finite(v, &g) && v >= value + opts.armijo * alpha * slope {
                    accepted = Some((trial, v, g));
                    break;
                }
            }
            alpha *= opts.shrink;
        }
        let Some((x_new, v_new, g_new)) = accepted else {
            break StopReason::LineSearchStalled;
        };
        iterations += 1;

        let restart = iterations % dim == 0;
        let beta = if restart {
            0.0
        } else {
            let y: Vec<f64> = g_new.iter().zip(&grad).map(|(a, b)| a - b).collect();
            (dot(&g_new, &y) / dot(&grad, &grad)).max(0.0)
        };
        let mut new_dir: Vec<f64> = g_new.iter().zip(&dir).map(|(g, d)| g + beta * d).collect();
        if dot(&g_new, &new_dir) <= 0.0 {
            new_dir = g_new.clone();
        }

        prev = Some((x.clone(), grad.clone()));
        prev_alpha = alpha;
        x = x_new;
        value = v_new;
        grad = g_new;
        dir = new_dir;
        trace.push(CgStep {
            iteration: iterations,
            x: x.clone(),
            value,
        });
    };

    Ok(CgOutcome {
        x,
        value,
        gradient: grad,
        iterations,
        stop,
        trace,
    })
}

/// First trial step: a Barzilai-Borwein length when the last step saw
/// negative curvature, otherwise twice the previous step; on the first
/// iteration, a move of `max(1, |x|)` along the direction.
fn initial_step(x: &[f64], grad: &[f64], dir: &[f64], prev: Option<&(Vec<f64>, Vec<f64>)>, prev_alpha: f64) -> f64 {
    let dn = norm(dir);
    let fallback = norm(x).max(1.0) / dn;
    let Some((px, pg)) = prev else {
        return fallback;
    };
    let s: Vec<f64> = x.iter().zip(px).map(|(a, b)| a - b).collect();
    let y: Vec<f64> = grad.iter().zip(pg).map(|(a, b)| a - b).collect();
    let sy = dot(&s, &y);
    let alpha = if sy < 0.0 {
        dot(&s, &s) / -sy * dot(grad, grad) / dot(grad, dir)
    } else {
        2.0 * prev_alpha
    };
    if alpha.is_finite() && alpha > 0.0 {
        alpha
    } else {
        fallback
    }
}
