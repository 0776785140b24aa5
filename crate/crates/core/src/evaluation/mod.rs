//! Model-versus-human evaluation: per-metaphor metrics, class aggregates,
//! ablations and feature-correlation matrices.

mod ablation;
mod correlation;

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lexicon::{format_significant, HumanResponseTable, MetaphorClass, MetaphorItem, TypicalityTable};
use crate::metrics::{jsd, k_agreement, mean_sd, pearson, top_k, top_k_boundary_tie, LogBase};
use crate::rsa::{interpret, InferenceMode, RsaConfig};

pub use ablation::{ablate_lambda_interpolation, ablate_relevance, default_grid, log_grid, GridAblation, GridPoint};
pub use correlation::{feature_correlation_matrix, CorrelationMatrix, CorrelationSource};

/// Size of the top-feature lists kept per metaphor.
pub const TOP_LIST: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct EvalOptions {
    /// k values for k-agreement.
    pub ks: Vec<usize>,
    pub jsd_base: LogBase,
    /// Also run the other inference mode and record the JSD between the two.
    pub compare_modes: bool,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            ks: vec![1, 3],
            jsd_base: LogBase::Two,
            compare_modes: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalEntry {
    pub id: String,
    pub topic: String,
    pub vehicle: String,
    pub class: MetaphorClass,
    pub model: Vec<f64>,
    pub human: Vec<f64>,
    pub pearson: f64,
    pub jsd: f64,
    /// k -> |top_k(model) ∩ top_k(human)|
    pub k_agreement: BTreeMap<usize, usize>,
    pub model_top: Vec<String>,
    pub human_top: Vec<String>,
    pub model_argmax_in_human_top3: bool,
    /// Human top-k set decided by tie-breaking for some evaluated k.
    pub human_tie: bool,
    /// JSD between full-recursion and fast-path outputs.
    pub mode_divergence: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanSd {
    pub mean: f64,
    pub sd: f64,
}

impl MeanSd {
    fn of(xs: &[f64]) -> Self {
        let (mean, sd) = mean_sd(xs);
        MeanSd { mean, sd }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregates {
    pub count: usize,
    pub pearson: MeanSd,
    pub jsd: MeanSd,
    pub k_agreement_total: BTreeMap<usize, usize>,
    pub k_agreement_mean: BTreeMap<usize, f64>,
    pub argmax_in_human_top3_rate: f64,
    pub human_ties: usize,
}

impl Aggregates {
    pub fn from_entries<'a>(entries: impl IntoIterator<Item = &'a EvalEntry>) -> Self {
        let entries: Vec<&EvalEntry> = entries.into_iter().collect();
        let count = entries.len();
        let rs: Vec<f64> = entries.iter().map(|e| e.pearson).collect();
        let js: Vec<f64> = entries.iter().map(|e| e.jsd).collect();
        let mut k_agreement_total = BTreeMap::new();
        for e in &entries {
            for (&k, &v) in &e.k_agreement {
                *k_agreement_total.entry(k).or_insert(0) += v;
            }
        }
        let k_agreement_mean = k_agreement_total
            .iter()
            .map(|(&k, &v)| (k, v as f64 / count as f64))
            .collect();
        let hits = entries.iter().filter(|e| e.model_argmax_in_human_top3).count();
        Aggregates {
            count,
            pearson: MeanSd::of(&rs),
            jsd: MeanSd::of(&js),
            k_agreement_total,
            k_agreement_mean,
            argmax_in_human_top3_rate: hits as f64 / count as f64,
            human_ties: entries.iter().filter(|e| e.human_tie).count(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupAggregates {
    pub overall: Aggregates,
    pub inherent: Option<Aggregates>,
    pub non_inherent: Option<Aggregates>,
}

impl GroupAggregates {
    pub fn from_entries<'a>(entries: impl IntoIterator<Item = &'a EvalEntry> + Clone) -> Self {
        let class = |c: MetaphorClass| {
            let subset: Vec<&EvalEntry> = entries.clone().into_iter().filter(|e| e.class == c).collect();
            (!subset.is_empty()).then(|| Aggregates::from_entries(subset))
        };
        GroupAggregates {
            overall: Aggregates::from_entries(entries.clone()),
            inherent: class(MetaphorClass::VehicleInherent),
            non_inherent: class(MetaphorClass::NonVehicleInherent),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub ablation: Option<String>,
    pub config: RsaConfig,
    pub jsd_base: LogBase,
    pub ks: Vec<usize>,
    pub features: Vec<String>,
    pub entries: Vec<EvalEntry>,
    pub aggregates: GroupAggregates,
    /// Aggregates restricted to held-out items, when a split is known.
    pub test_aggregates: Option<GroupAggregates>,
}

impl EvalReport {
    /// Attach aggregates over the entries whose ids are listed.
    pub fn with_subset(mut self, ids: &[String]) -> Self {
        let subset: Vec<&EvalEntry> = self.entries.iter().filter(|e| ids.contains(&e.id)).collect();
        if !subset.is_empty() {
            self.test_aggregates = Some(GroupAggregates::from_entries(subset));
        }
        self
    }

    /// One row per metaphor.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        let mut header = vec!["id", "topic", "vehicle", "class", "pearson", "jsd"]
            .into_iter()
            .map(String::from)
            .collect::<Vec<_>>();
        header.extend(self.ks.iter().map(|k| format!("agreement_{k}")));
        header.extend(
            ["model_top3", "human_top3", "model_argmax_in_human_top3", "human_tie", "mode_divergence"]
                .map(String::from),
        );
        w.write_record(&header).map_err(csv_err)?;
        let fmt = |x: f64| format_significant(x, 12);
        for e in &self.entries {
            let mut row = vec![
                e.id.clone(),
                e.topic.clone(),
                e.vehicle.clone(),
                e.class.to_string(),
                fmt(e.pearson),
                fmt(e.jsd),
            ];
            row.extend(self.ks.iter().map(|k| e.k_agreement[k].to_string()));
            row.push(e.model_top.join(";"));
            row.push(e.human_top.join(";"));
            row.push(e.model_argmax_in_human_top3.to_string());
            row.push(e.human_tie.to_string());
            row.push(e.mode_divergence.map(fmt).unwrap_or_default());
            w.write_record(&row).map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::InvalidArgument(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::InvalidArgument(e.to_string()))
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::InvalidArgument(format!("csv: {e}"))
}

fn entry(
    item: &MetaphorItem,
    human: &HumanResponseTable,
    config: &RsaConfig,
    table: &TypicalityTable,
    opts: &EvalOptions,
) -> Result<EvalEntry> {
    let target = human.require(&item.id)?;
    let model = interpret(item, config, table)?;
    let (m, h) = (model.probs(), target.probs());
    let names = |idx: Vec<usize>| -> Vec<String> { idx.into_iter().map(|i| table.vocab().name(i).to_string()).collect() };
    let top = TOP_LIST.min(m.len());
    let mode_divergence = if opts.compare_modes {
        let other = RsaConfig {
            mode: match config.mode {
                InferenceMode::Full => InferenceMode::Fast,
                InferenceMode::Fast => InferenceMode::Full,
            },
            ..config.clone()
        };
        Some(jsd(m, interpret(item, &other, table)?.probs(), opts.jsd_base)?)
    } else {
        None
    };
    Ok(EvalEntry {
        id: item.id.clone(),
        topic: item.topic.clone(),
        vehicle: item.vehicle.clone(),
        class: item.class,
        pearson: pearson(m, h)?,
        jsd: jsd(m, h, opts.jsd_base)?,
        k_agreement: opts.ks.iter().map(|&k| (k, k_agreement(m, h, k))).collect(),
        model_top: names(top_k(m, top)),
        human_top: names(top_k(h, top)),
        model_argmax_in_human_top3: top_k(h, top).contains(&model.argmax()),
        human_tie: opts.ks.iter().any(|&k| top_k_boundary_tie(h, k)),
        mode_divergence,
        model: m.to_vec(),
        human: h.to_vec(),
    })
}

/// Score the model against human data on every item.
pub fn evaluate(
    items: &[MetaphorItem],
    human: &HumanResponseTable,
    config: &RsaConfig,
    table: &TypicalityTable,
    opts: &EvalOptions,
) -> Result<EvalReport> {
    if items.is_empty() {
        return Err(Error::InvalidArgument("no items to evaluate".into()));
    }
    let n = table.n_features();
    if let Some(&k) = opts.ks.iter().find(|&&k| k == 0 || k > n) {
        return Err(Error::InvalidArgument(format!("k = {k} outside 1..={n}")));
    }
    let entries = items
        .par_iter()
        .map(|item| entry(item, human, config, table, opts))
        .collect::<Result<Vec<_>>>()?;
    Ok(EvalReport {
        ablation: None,
        config: config.clone(),
        jsd_base: opts.jsd_base,
        ks: opts.ks.clone(),
        features: table.vocab().features().to_vec(),
        aggregates: GroupAggregates::from_entries(&entries),
        entries,
        test_aggregates: None,
    })
}
