use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dist::Distribution;
use crate::error::{Error, Result};
use crate::lexicon::{HumanResponseTable, MetaphorItem, TypicalityTable};
use crate::metrics::pearson_with_gradient;
use crate::rsa::{interpret_with_derivative, RsaConfig};

/// How model/human agreement over the training items is scored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectiveKind {
    /// Unweighted mean of per-metaphor Pearson r.
    #[default]
    Mean,
    /// One Pearson r over all (metaphor, feature) pairs.
    Pooled,
}

/// Train-set correlation as a function of lambda.
#[derive(Debug, Clone)]
pub struct CorrelationObjective<'a> {
    items: Vec<&'a MetaphorItem>,
    targets: Vec<&'a Distribution>,
    config: &'a RsaConfig,
    table: &'a TypicalityTable,
    kind: ObjectiveKind,
}

impl<'a> CorrelationObjective<'a> {
    pub fn new(
        train: &'a [MetaphorItem],
        human: &'a HumanResponseTable,
        config: &'a RsaConfig,
        table: &'a TypicalityTable,
        kind: ObjectiveKind,
    ) -> Result<Self> {
        Self::from_refs(train.iter().collect(), human, config, table, kind)
    }

    pub fn from_refs(
        items: Vec<&'a MetaphorItem>,
        human: &'a HumanResponseTable,
        config: &'a RsaConfig,
        table: &'a TypicalityTable,
        kind: ObjectiveKind,
    ) -> Result<Self> {
        if items.is_empty() {
            return Err(Error::InvalidArgument("empty training set".into()));
        }
        let targets = items.iter().map(|m| human.require(&m.id)).collect::<Result<Vec<_>>>()?;
        Ok(CorrelationObjective {
            items,
            targets,
            config,
            table,
            kind,
        })
    }

    pub fn kind(&self) -> ObjectiveKind {
        self.kind
    }

    fn model_outputs(&self, lambda: f64) -> Result<Vec<(Distribution, Vec<f64>)>> {
        let config = self.config.with_lambda(lambda);
        self.items
            .par_iter()
            .map(|m| interpret_with_derivative(m, &config, self.table))
            .collect()
    }

    pub fn value(&self, lambda: f64) -> Result<f64> {
        self.value_and_gradient(lambda).map(|(v, _)| v)
    }

    /// Objective and its analytic derivative in lambda.
    pub fn value_and_gradient(&self, lambda: f64) -> Result<(f64, f64)> {
        if !lambda.is_finite() {
            return Err(Error::InvalidArgument(format!("lambda {lambda} is not finite")));
        }
        let outputs = self.model_outputs(lambda)?;
        let (value, grad) = match self.kind {
            ObjectiveKind::Mean => {
                let mut value = 0.0;
                let mut grad = 0.0;
                for ((model, dmodel), target) in outputs.iter().zip(&self.targets) {
                    let (r, dr) = pearson_with_gradient(model.probs(), target.probs())?;
                    value += r;
                    grad += dr.iter().zip(dmodel).map(|(a, b)| a * b).sum::<f64>();
                }
                let n = outputs.len() as f64;
                (value / n, grad / n)
            }
            ObjectiveKind::Pooled => {
                let model: Vec<f64> = outputs.iter().flat_map(|(d, _)| d.probs().iter().copied()).collect();
                let dmodel: Vec<f64> = outputs.iter().flat_map(|(_, d)| d.iter().copied()).collect();
                let target: Vec<f64> = self.targets.iter().flat_map(|d| d.probs().iter().copied()).collect();
                let (r, dr) = pearson_with_gradient(&model, &target)?;
                (r, dr.iter().zip(&dmodel).map(|(a, b)| a * b).sum())
            }
        };
        if !value.is_finite() || !grad.is_finite() {
            return Err(Error::NonFinite(format!("objective at lambda {lambda}")));
        }
        Ok((value, grad))
    }

    /// Central difference with step `1e-4·max(1, |λ|)`.
    pub fn finite_difference(&self, lambda: f64) -> Result<f64> {
        let h = 1e-4 * lambda.abs().max(1.0);
        Ok((self.value(lambda + h)? - self.value(lambda - h)?) / (2.0 * h))
    }
}

/// Mean (or pooled) train-set Pearson r at `lambda`.
pub fn objective(
    lambda: f64,
    train: &[MetaphorItem],
    human: &HumanResponseTable,
    config: &RsaConfig,
    table: &TypicalityTable,
    kind: ObjectiveKind,
) -> Result<f64> {
    CorrelationObjective::new(train, human, config, table, kind)?.value(lambda)
}

/// Analytic `d objective / dλ`.
pub fn gradient(
    lambda: f64,
    train: &[MetaphorItem],
    human: &HumanResponseTable,
    config: &RsaConfig,
    table: &TypicalityTable,
    kind: ObjectiveKind,
) -> Result<f64> {
    CorrelationObjective::new(train, human, config, table, kind)?
        .value_and_gradient(lambda)
        .map(|(_, g)| g)
}
