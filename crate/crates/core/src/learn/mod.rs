//! Fitting the speaker rationality lambda by conjugate gradient ascent on the
//! train-set model/human correlation.

pub mod cg;
mod objective;
mod split;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lexicon::{HumanResponseTable, MetaphorItem, TypicalityTable};
use crate::rsa::RsaConfig;

pub use cg::{CgOptions, StopReason};
pub use objective::{gradient, objective, CorrelationObjective, ObjectiveKind};
pub use split::{make_split, stratified_split, TrainTestSplit, ITEMS_PER_CLASS, TRAIN_PER_CLASS};

pub const DEFAULT_INIT: f64 = 1.0;
pub const DEFAULT_MAX_ITERATIONS: usize = 200;
pub const DEFAULT_TOL: f64 = 1e-6;
/// Starting points tried by [`learn_lambda_multistart`].
pub const DEFAULT_STARTS: [f64; 5] = [0.5, 1.0, 5.0, 20.0, 50.0];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub iteration: usize,
    pub lambda: f64,
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub lambda_hat: f64,
    pub objective_value: f64,
    pub iterations: usize,
    pub gradient_norm_at_convergence: f64,
    pub converged: bool,
    pub stop: StopReason,
    pub init: f64,
    pub trace: Vec<TracePoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiStartFit {
    pub best: FitResult,
    pub starts: Vec<FitResult>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LearnOptions {
    pub max_iterations: usize,
    pub tol: f64,
}

impl Default for LearnOptions {
    fn default() -> Self {
        LearnOptions {
            max_iterations: DEFAULT_MAX_ITERATIONS,
            tol: DEFAULT_TOL,
        }
    }
}

/// Run conjugate gradient ascent on an objective from one starting lambda.
pub fn fit(objective: &CorrelationObjective<'_>, init: f64, opts: LearnOptions) -> Result<FitResult> {
    if !init.is_finite() {
        return Err(Error::InvalidArgument(format!("initial lambda {init} is not finite")));
    }
    let f = |x: &[f64]| objective.value_and_gradient(x[0]).map(|(v, g)| (v, vec![g]));
    let cg_opts = CgOptions {
        max_iterations: opts.max_iterations,
        tol: opts.tol,
        ..CgOptions::default()
    };
    let out = cg::maximize(&f, &[init], &cg_opts)?;
    Ok(FitResult {
        lambda_hat: out.x[0],
        objective_value: out.value,
        iterations: out.iterations,
        gradient_norm_at_convergence: out.gradient[0].abs(),
        converged: out.stop == StopReason::GradientTolerance,
        stop: out.stop,
        init,
        trace: out
            .trace
            .into_iter()
            .map(|s| TracePoint {
                iteration: s.iteration,
                lambda: s.x[0],
                objective: s.value,
            })
            .collect(),
    })
}

/// Fit lambda on `train` from a single starting point.
#[allow(clippy::too_many_arguments)]
pub fn learn_lambda(
    train: &[MetaphorItem],
    human: &HumanResponseTable,
    config: &RsaConfig,
    table: &TypicalityTable,
    kind: ObjectiveKind,
    init: f64,
    max_iterations: usize,
    tol: f64,
) -> Result<FitResult> {
    let objective = CorrelationObjective::new(train, human, config, table, kind)?;
    fit(&objective, init, LearnOptions { max_iterations, tol })
}

/// Fit from each starting point and keep the highest objective (earliest
/// start on ties). Starts whose objective cannot be evaluated are skipped;
/// if every start fails the first error is returned.
pub fn learn_lambda_multistart(
    objective: &CorrelationObjective<'_>,
    starts: &[f64],
    opts: LearnOptions,
) -> Result<MultiStartFit> {
    let mut fits = Vec::with_capacity(starts.len());
    let mut first_err = None;
    for &init in starts {
        match fit(objective, init, opts) {
            Ok(f) => fits.push(f),
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    let best = fits
        .iter()
        .fold(None::<&FitResult>, |best, f| match best {
            Some(b) if b.objective_value >= f.objective_value => Some(b),
            _ => Some(f),
        })
        .cloned();
    match best {
        Some(best) => Ok(MultiStartFit { best, starts: fits }),
        None => Err(first_err.unwrap_or_else(|| Error::InvalidArgument("no starting points".into()))),
    }
}
