use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learn::CorrelationObjective;
use crate::lexicon::{HumanResponseTable, MetaphorItem, TypicalityTable};
use crate::rsa::{GoalPrior, RsaConfig};

use super::{evaluate, EvalOptions, EvalReport};

pub const ABLATION_NO_RELEVANCE: &str = "no-relevance";
pub const ABLATION_GRID_LAMBDA: &str = "grid-lambda";

/// Evaluate with the relevance prior over goals replaced by a uniform one.
pub fn ablate_relevance(
    items: &[MetaphorItem],
    human: &HumanResponseTable,
    config: &RsaConfig,
    table: &TypicalityTable,
    opts: &EvalOptions,
) -> Result<EvalReport> {
    let ablated = RsaConfig {
        goal_prior: GoalPrior::Uniform,
        ..config.clone()
    };
    let mut report = evaluate(items, human, &ablated, table, opts)?;
    report.ablation = Some(ABLATION_NO_RELEVANCE.to_string());
    Ok(report)
}

/// `count` log-spaced points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi >= lo && count > 0) || !hi.is_finite() {
        return Err(Error::InvalidArgument(format!("bad grid {lo}:{hi}:{count}")));
    }
    if count == 1 {
        return Ok(vec![lo]);
    }
    let (a, b) = (lo.ln(), hi.ln());
    Ok((0..count)
        .map(|k| {
            if k == count - 1 {
                hi
            } else {
                (a + (b - a) * k as f64 / (count - 1) as f64).exp()
            }
        })
        .collect())
}

/// 200 log-spaced points on [0.5, 100].
pub fn default_grid() -> Vec<f64> {
    log_grid(0.5, 100.0, 200).expect("static grid")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub lambda: f64,
    /// `None` when the objective is undefined at this lambda.
    pub objective: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridAblation {
    pub best_lambda: f64,
    pub best_objective: f64,
    pub grid: Vec<GridPoint>,
    pub report: EvalReport,
}

/// Pick lambda by exhaustive search of the train objective over `grid`
/// (first point wins ties), then evaluate `items` at that lambda.
pub fn ablate_lambda_interpolation(
    objective: &CorrelationObjective<'_>,
    items: &[MetaphorItem],
    human: &HumanResponseTable,
    config: &RsaConfig,
    table: &TypicalityTable,
    grid: &[f64],
    opts: &EvalOptions,
) -> Result<GridAblation> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument("empty lambda grid".into()));
    }
    let points: Vec<GridPoint> = grid
        .iter()
        .map(|&lambda| GridPoint {
            lambda,
            objective: objective.value(lambda).ok(),
        })
        .collect();
    let (best_lambda, best_objective) = points
        .iter()
        .filter_map(|p| p.objective.map(|o| (p.lambda, o)))
        .fold(None::<(f64, f64)>, |best, (l, o)| match best {
            Some((_, bo)) if bo >= o => best,
            _ => Some((l, o)),
        })
        .ok_or_else(|| Error::InvalidArgument("objective undefined at every grid point".into()))?;
    let mut report = evaluate(items, human, &config.with_lambda(best_lambda), table, opts)?;
    report.ablation = Some(ABLATION_GRID_LAMBDA.to_string());
    Ok(GridAblation {
        best_lambda,
        best_objective,
        grid: points,
        report,
    })
}
