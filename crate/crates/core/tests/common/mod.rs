#![allow(dead_code)]

pub mod oracle;

use metaphor_rsa::learn::{CorrelationObjective, ObjectiveKind};
use metaphor_rsa::lexicon::{FeatureVocab, HumanResponseTable, MetaphorClass, MetaphorItem, TypicalityTable};
use metaphor_rsa::rsa::{
    interpret, resolve_utterances, CategoryPrior, GoalPrior, InferenceMode, RsaConfig, UtteranceSet,
};
use metaphor_rsa::Distribution;
use oracle::Problem;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random row on the open simplex with entries bounded away from 0.
pub fn random_row(rng: &mut ChaCha8Rng, n: usize, lo: f64) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| rng.gen_range(lo..1.0)).collect();
    let s: f64 = w.iter().sum();
    w.iter().map(|x| x / s).collect()
}

/// Row within `spread` (relative) of uniform.
pub fn near_uniform_row(rng: &mut ChaCha8Rng, n: usize, spread: f64) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| 1.0 + rng.gen_range(-spread..spread)).collect();
    let s: f64 = w.iter().sum();
    w.iter().map(|x| x / s).collect()
}

pub fn names(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

pub fn table_from_rows(rows: Vec<Vec<f64>>) -> TypicalityTable {
    let n = rows[0].len();
    let vocab = FeatureVocab::new(names("f", n)).unwrap();
    TypicalityTable::new(names("c", rows.len()), vocab, rows).unwrap()
}

pub fn random_table(rng: &mut ChaCha8Rng, categories: usize, features: usize) -> TypicalityTable {
    table_from_rows((0..categories).map(|_| random_row(rng, features, 0.05)).collect())
}

pub fn near_uniform_table(rng: &mut ChaCha8Rng, categories: usize, features: usize, spread: f64) -> TypicalityTable {
    table_from_rows((0..categories).map(|_| near_uniform_row(rng, features, spread)).collect())
}

/// `2 * per_class` items on distinct (topic, vehicle) pairs, classes
/// alternating.
pub fn synthetic_items(rng: &mut ChaCha8Rng, table: &TypicalityTable, per_class: usize) -> Vec<MetaphorItem> {
    let cats = table.categories();
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    while pairs.len() < 2 * per_class {
        let t = rng.gen_range(0..cats.len());
        let v = rng.gen_range(0..cats.len());
        if t != v && !pairs.contains(&(t, v)) {
            pairs.push((t, v));
        }
    }
    pairs
        .into_iter()
        .enumerate()
        .map(|(k, (t, v))| {
            let class = if k % 2 == 0 {
                MetaphorClass::VehicleInherent
            } else {
                MetaphorClass::NonVehicleInherent
            };
            MetaphorItem::new(format!("m{k:02}"), cats[t].clone(), cats[v].clone(), class)
        })
        .collect()
}

/// Human table produced by the model itself under `config`.
pub fn model_generated_human(items: &[MetaphorItem], config: &RsaConfig, table: &TypicalityTable) -> HumanResponseTable {
    let mut human = HumanResponseTable::new();
    for m in items {
        human.insert(m.id.clone(), interpret(m, config, table).unwrap()).unwrap();
    }
    human
}

/// Human table of random forced-choice counts.
pub fn random_human(rng: &mut ChaCha8Rng, items: &[MetaphorItem], n: usize, participants: usize) -> HumanResponseTable {
    let mut human = HumanResponseTable::new();
    for m in items {
        let mut counts = vec![0.0; n];
        for _ in 0..participants {
            counts[rng.gen_range(0..n)] += 1.0;
        }
        human.insert(m.id.clone(), Distribution::from_weights(&counts).unwrap()).unwrap();
    }
    human
}

pub struct Synthetic {
    pub table: TypicalityTable,
    pub items: Vec<MetaphorItem>,
    pub human: HumanResponseTable,
}

/// 48 categories, 59 features, 24 metaphors (12 per class) with
/// near-uniform typicalities and random human counts.
pub fn full_scale(rng: &mut ChaCha8Rng) -> Synthetic {
    let table = near_uniform_table(rng, 48, 59, 0.5);
    let items = synthetic_items(rng, &table, 12);
    let human = random_human(rng, &items, 59, 40);
    Synthetic { table, items, human }
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Oracle inputs for an engine configuration.
pub fn oracle_output(m: &MetaphorItem, config: &RsaConfig, table: &TypicalityTable) -> Vec<f64> {
    let t: Vec<Vec<f64>> = table.rows().to_vec();
    let n = t[0].len();
    let topic = table.category_index(&m.topic).unwrap();
    let vehicle = table.category_index(&m.vehicle).unwrap();
    let utterances = resolve_utterances(config, m, table).unwrap();
    let mut p_c = vec![0.0; t.len()];
    match config.category_prior {
        CategoryPrior::TopicOnly => p_c[topic] = 1.0,
        CategoryPrior::VehicleOnly => p_c[vehicle] = 1.0,
        CategoryPrior::Uniform => {
            p_c[topic] += 0.5;
            p_c[vehicle] += 0.5;
        }
    }
    let r = match config.goal_prior {
        GoalPrior::Relevance => t[topic].clone(),
        GoalPrior::Uniform => vec![1.0 / n as f64; n],
    };
    oracle::interpret(&Problem {
        t: &t,
        topic,
        vehicle,
        utterances: &utterances,
        p_c: &p_c,
        r: &r,
        lambda: config.lambda,
    })
}

pub fn random_instance(rng: &mut ChaCha8Rng) -> (TypicalityTable, MetaphorItem, RsaConfig) {
    let cats = rng.gen_range(2..=4);
    let feats = rng.gen_range(2..=4);
    let table = random_table(rng, cats, feats);
    let topic = rng.gen_range(0..cats);
    let vehicle = (topic + rng.gen_range(1..cats)) % cats;
    let m = MetaphorItem::new(
        "x",
        table.categories()[topic].clone(),
        table.categories()[vehicle].clone(),
        MetaphorClass::VehicleInherent,
    );
    let config = RsaConfig {
        lambda: rng.gen_range(0.0..60.0),
        utterances: if rng.gen_bool(0.5) {
            UtteranceSet::AllCategories
        } else {
            UtteranceSet::TopicVehiclePair
        },
        category_prior: if rng.gen_bool(0.5) {
            CategoryPrior::TopicOnly
        } else {
            CategoryPrior::Uniform
        },
        goal_prior: if rng.gen_bool(0.8) {
            GoalPrior::Relevance
        } else {
            GoalPrior::Uniform
        },
        mode: InferenceMode::Full,
    };
    (table, m, config)
}

/// Relative error, with the denominator floored at the optimizer's gradient
/// tolerance: below it the difference quotient is dominated by roundoff.
pub fn relative_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-6)
}

/// (analytic, central difference, lambda) for `count` random objectives
/// mixing modes, utterance sets and objective kinds.
pub fn gradient_checks(seed: u64, count: usize) -> Vec<(f64, f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    let mut k = 0;
    while out.len() < count {
        k += 1;
        let cats = rng.gen_range(3..=6);
        let feats = rng.gen_range(3..=8);
        let table = random_table(&mut rng, cats, feats);
        let items = synthetic_items(&mut rng, &table, 2);
        let human = random_human(&mut rng, &items, feats, 30);
        let config = RsaConfig {
            mode: if k % 4 == 3 { InferenceMode::Fast } else { InferenceMode::Full },
            utterances: if k % 2 == 0 {
                UtteranceSet::AllCategories
            } else {
                UtteranceSet::TopicVehiclePair
            },
            ..RsaConfig::default()
        };
        let kind = if k % 5 == 4 { ObjectiveKind::Pooled } else { ObjectiveKind::Mean };
        let Ok(obj) = CorrelationObjective::new(&items, &human, &config, &table, kind) else {
            continue;
        };
        let lambda = rng.gen_range(0.1..60.0);
        let Ok((_, g)) = obj.value_and_gradient(lambda) else {
            continue;
        };
        out.push((g, obj.finite_difference(lambda).unwrap(), lambda));
    }
    out
}

/// Near-uniform 10x12 table, 18 items and human data generated at
/// `lambda_star`.
pub fn recovery_setup(seed: u64, lambda_star: f64) -> (Vec<MetaphorItem>, HumanResponseTable, TypicalityTable) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let table = near_uniform_table(&mut rng, 10, 12, 0.5);
    let items = synthetic_items(&mut rng, &table, 9);
    let human = model_generated_human(&items, &RsaConfig::default().with_lambda(lambda_star), &table);
    (items, human, table)
}
