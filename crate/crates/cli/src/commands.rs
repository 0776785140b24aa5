use std::fs;

use anyhow::{anyhow, bail, Context};
use metaphor_rsa::evaluation::{
    ablate_lambda_interpolation, ablate_relevance, evaluate, feature_correlation_matrix, log_grid, CorrelationSource,
    EvalOptions,
};
use metaphor_rsa::learn::{learn_lambda_multistart, make_split, CorrelationObjective, LearnOptions, DEFAULT_STARTS};
use metaphor_rsa::lexicon::{format_significant, load_dataset, load_raw_dataset, Dataset, LoadOptions, MetaphorClass, MetaphorItem, CSV_DIGITS};
use metaphor_rsa::metrics::top_k;
use metaphor_rsa::rsa::interpret;
use serde_json::{json, Value};

use crate::config::{AblationKind, LambdaArg, RunConfig};
use crate::output::{csv_with_header, dataset_hash, envelope, Outputs};

pub const PARAMS_FILE: &str = "params.json";

struct Loaded {
    ds: Dataset,
    hash: String,
}

fn load(cfg: &RunConfig) -> anyhow::Result<Loaded> {
    let ds = load_dataset(&cfg.data_dir, LoadOptions { raw_ratings: cfg.raw_ratings })?;
    let hash = dataset_hash(&cfg.data_dir)?;
    Ok(Loaded { ds, hash })
}

fn eval_options(cfg: &RunConfig) -> EvalOptions {
    EvalOptions {
        ks: cfg.k.clone(),
        jsd_base: cfg.log_base(),
        compare_modes: true,
    }
}

/// Lambda plus, when read from `params.json`, the held-out ids.
struct Lambda {
    value: f64,
    test: Option<Vec<String>>,
}

fn resolve_lambda(cfg: &RunConfig, hash: &str) -> anyhow::Result<Lambda> {
    if let LambdaArg::Value(value) = cfg.lambda {
        return Ok(Lambda { value, test: None });
    }
    let path = cfg.output_dir.join(PARAMS_FILE);
    let text = fs::read_to_string(&path).with_context(|| format!("reading {} (run `train` first)", path.display()))?;
    let params: Value = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    if params["dataset_sha256"] != json!(hash) {
        bail!("{} was trained on a different dataset", path.display());
    }
    let trained = &params["config"];
    let current = serde_json::to_value(cfg)?;
    for key in ["mode", "utterances", "category_prior", "raw_ratings"] {
        if trained[key] != current[key] {
            bail!(
                "{} was trained with {key} = {}, this run uses {}",
                path.display(),
                trained[key],
                current[key]
            );
        }
    }
    let value = params["lambda"]
        .as_f64()
        .ok_or_else(|| anyhow!("{} has no numeric lambda", path.display()))?;
    let test = serde_json::from_value(params["split"]["test"].clone()).ok();
    Ok(Lambda { value, test })
}

fn lambda_json(cfg: &RunConfig, lambda: &Lambda) -> Value {
    json!({ "value": lambda.value, "source": if cfg.lambda == LambdaArg::Learned { "params.json" } else { "flag" } })
}

fn fmt(x: f64) -> String {
    format_significant(x, CSV_DIGITS)
}

pub fn validate(cfg: &RunConfig) -> anyhow::Result<()> {
    let ds = load_raw_dataset(&cfg.data_dir, LoadOptions { raw_ratings: cfg.raw_ratings })?;
    let report = ds.validate();
    if !report.is_clean() {
        for v in &report.violations {
            eprintln!("violation: {v}");
        }
        bail!("{} violation(s) in {}", report.violations.len(), cfg.data_dir.display());
    }
    println!(
        "ok: {} categories, {} features, {} metaphors",
        ds.table.categories().len(),
        ds.table.n_features(),
        ds.items.len()
    );
    Ok(())
}

/// Lexicon entries within edit distance 2, closest first.
pub fn suggestions<'a>(name: &str, candidates: &'a [String]) -> Vec<&'a str> {
    let mut close: Vec<(usize, &str)> = candidates
        .iter()
        .map(|c| (strsim::levenshtein(name, c), c.as_str()))
        .filter(|(d, _)| *d <= 2)
        .collect();
    close.sort();
    close.into_iter().map(|(_, c)| c).collect()
}

fn check_noun(name: &str, ds: &Dataset) -> anyhow::Result<()> {
    let cats = ds.table.categories();
    if cats.iter().any(|c| c == name) {
        return Ok(());
    }
    let near = suggestions(name, cats);
    if near.is_empty() {
        bail!("unknown noun '{name}'");
    }
    bail!("unknown noun '{name}'; did you mean: {}?", near.join(", "))
}

pub fn interpret_pair(cfg: &RunConfig, topic: &str, vehicle: &str) -> anyhow::Result<()> {
    let Loaded { ds, hash } = load(cfg)?;
    check_noun(topic, &ds)?;
    check_noun(vehicle, &ds)?;
    let lambda = resolve_lambda(cfg, &hash)?;
    let item = ds
        .find_pair(topic, vehicle)
        .cloned()
        .unwrap_or_else(|| MetaphorItem::new("query", topic, vehicle, MetaphorClass::VehicleInherent));
    let out = interpret(&item, &cfg.rsa(lambda.value), &ds.table)?;
    let p = out.probs();
    let names = ds.table.vocab();
    let width = names.features().iter().map(|f| f.chars().count()).max().unwrap_or(0);
    for i in top_k(p, p.len()) {
        println!("{:<width$}  {}", names.name(i), fmt(p[i]));
    }
    for &k in &cfg.k {
        let top: Vec<&str> = top_k(p, k.min(p.len())).into_iter().map(|i| names.name(i)).collect();
        println!("top-{k}: {}", top.join(", "));
    }
    Ok(())
}

pub fn train(cfg: &RunConfig) -> anyhow::Result<()> {
    let Loaded { ds, hash } = load(cfg)?;
    let split = make_split(&ds.items, cfg.split_seed)?;
    let rsa = cfg.rsa(1.0);
    let kind = cfg.objective_kind();
    let obj = CorrelationObjective::from_refs(split.train_items(&ds.items), &ds.human, &rsa, &ds.table, kind)?;
    let fit = learn_lambda_multistart(&obj, &DEFAULT_STARTS, LearnOptions::default())?;
    let best = &fit.best;
    let test_obj = CorrelationObjective::from_refs(split.test_items(&ds.items), &ds.human, &rsa, &ds.table, kind)?;
    let test_objective = test_obj.value(best.lambda_hat).ok();
    let starts: Vec<Value> = fit
        .starts
        .iter()
        .map(|s| {
            json!({
                "init": s.init,
                "lambda": s.lambda_hat,
                "objective": s.objective_value,
                "iterations": s.iterations,
                "converged": s.converged,
                "stop": s.stop,
            })
        })
        .collect();
    let payload = json!({
        "lambda": best.lambda_hat,
        "objective": best.objective_value,
        "test_objective": test_objective,
        "iterations": best.iterations,
        "gradient_norm": best.gradient_norm_at_convergence,
        "converged": best.converged,
        "stop": best.stop,
        "init": best.init,
        "trace": best.trace,
        "split_seed": cfg.split_seed,
        "split": { "train": split.train, "test": split.test },
        "starts": starts,
    });
    let mut out = Outputs::new(&cfg.output_dir);
    out.add_json(PARAMS_FILE, &envelope(cfg, &hash, payload)?)?;
    out.commit()?;
    println!(
        "lambda = {} (train objective {}, {} iterations, {})",
        fmt(best.lambda_hat),
        fmt(best.objective_value),
        best.iterations,
        if best.converged { "converged" } else { "not converged" }
    );
    Ok(())
}

fn print_summary(label: &str, report: &metaphor_rsa::evaluation::EvalReport) {
    let a = &report.aggregates.overall;
    let k: Vec<String> = a.k_agreement_total.iter().map(|(k, v)| format!("{k}-agreement {v}/{}", a.count)).collect();
    println!(
        "{label}: mean r {} (SD {}), mean JSD {} (SD {}), {}",
        fmt(a.pearson.mean),
        fmt(a.pearson.sd),
        fmt(a.jsd.mean),
        fmt(a.jsd.sd),
        k.join(", ")
    );
}

pub fn eval(cfg: &RunConfig) -> anyhow::Result<()> {
    let Loaded { ds, hash } = load(cfg)?;
    let lambda = resolve_lambda(cfg, &hash)?;
    let mut report = evaluate(&ds.items, &ds.human, &cfg.rsa(lambda.value), &ds.table, &eval_options(cfg))?;
    if let Some(test) = &lambda.test {
        report = report.with_subset(test);
    }
    let mut out = Outputs::new(&cfg.output_dir);
    let payload = json!({ "lambda": lambda_json(cfg, &lambda), "report": report });
    out.add_json("report.json", &envelope(cfg, &hash, payload)?)?;
    out.add("report.csv", csv_with_header(cfg, &hash, &report.to_csv()?)?);
    out.commit()?;
    print_summary("eval", &report);
    Ok(())
}

pub fn ablate(cfg: &RunConfig, kind: AblationKind) -> anyhow::Result<()> {
    let Loaded { ds, hash } = load(cfg)?;
    let opts = eval_options(cfg);
    let payload = match kind {
        AblationKind::NoRelevance => {
            let lambda = resolve_lambda(cfg, &hash)?;
            let rsa = cfg.rsa(lambda.value);
            let full = evaluate(&ds.items, &ds.human, &rsa, &ds.table, &opts)?;
            let report = ablate_relevance(&ds.items, &ds.human, &rsa, &ds.table, &opts)?;
            print_summary("full", &full);
            print_summary(kind.as_str(), &report);
            json!({
                "kind": kind,
                "lambda": lambda_json(cfg, &lambda),
                "baseline_aggregates": full.aggregates,
                "report": report,
            })
        }
        AblationKind::GridLambda => {
            let grid = log_grid(cfg.grid.lo, cfg.grid.hi, cfg.grid.count)?;
            let split = make_split(&ds.items, cfg.split_seed)?;
            let rsa = cfg.rsa(1.0);
            let obj = CorrelationObjective::from_refs(
                split.train_items(&ds.items),
                &ds.human,
                &rsa,
                &ds.table,
                cfg.objective_kind(),
            )?;
            let result = ablate_lambda_interpolation(&obj, &ds.items, &ds.human, &rsa, &ds.table, &grid, &opts)?;
            let report = result.report.with_subset(&split.test);
            println!("grid lambda = {} (train objective {})", fmt(result.best_lambda), fmt(result.best_objective));
            print_summary(kind.as_str(), &report);
            json!({
                "kind": kind,
                "split_seed": cfg.split_seed,
                "split": { "train": split.train, "test": split.test },
                "best_lambda": result.best_lambda,
                "best_objective": result.best_objective,
                "grid": result.grid,
                "report": report,
            })
        }
    };
    let mut out = Outputs::new(&cfg.output_dir);
    out.add_json(&format!("ablation_{}.json", kind.as_str()), &envelope(cfg, &hash, payload)?)?;
    out.commit()?;
    Ok(())
}

pub fn corr(cfg: &RunConfig) -> anyhow::Result<()> {
    let Loaded { ds, hash } = load(cfg)?;
    let lambda = resolve_lambda(cfg, &hash)?;
    let rsa = cfg.rsa(lambda.value);
    let mut out = Outputs::new(&cfg.output_dir);
    for (source, name) in [(CorrelationSource::Model, "corr_model.csv"), (CorrelationSource::Human, "corr_human.csv")] {
        let m = feature_correlation_matrix(&ds.items, source, &ds.human, &rsa, &ds.table)?;
        out.add(name, csv_with_header(cfg, &hash, &m.to_csv()?)?);
    }
    for path in out.commit()? {
        println!("wrote {}", path.display());
    }
    Ok(())
}
