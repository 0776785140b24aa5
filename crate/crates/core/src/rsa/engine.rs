use crate::dist::{log_normalize, log_sum_exp, Distribution};
use crate::error::{Error, Result};
use crate::lexicon::{MetaphorItem, TypicalityTable};

use super::fast::fast_with_derivative;
use super::{
    category_support, resolve_utterances, Goal, GoalPrior, InferenceMode, JointDistribution, OneHot, RsaConfig,
};

/// `L0(c, e_i | u) = T[u][i]` if `c == u`, else 0; over every table category.
pub fn literal_listener(u: &str, table: &TypicalityTable) -> Result<JointDistribution> {
    let uc = table.resolve(u)?;
    let n = table.n_features();
    let mut log_weights = vec![f64::NEG_INFINITY; table.categories().len() * n];
    for (i, &t) in table.row(uc).iter().enumerate() {
        log_weights[uc * n + i] = t.ln();
    }
    Ok(JointDistribution::new(
        table.categories().to_vec(),
        n,
        Distribution::from_log_weights(&log_weights)?,
    ))
}

/// Log of the literal-listener mass agreeing with `f` on the goal dimension.
fn utility(table: &TypicalityTable, u: usize, j: usize, hit: bool) -> Result<f64> {
    let t = table.value(u, j);
    let degenerate = if hit { t <= 0.0 } else { t >= 1.0 };
    if degenerate || t.is_nan() {
        return Err(Error::DegenerateUtility {
            category: table.categories()[u].clone(),
            feature: j,
            value: t,
        });
    }
    Ok(if hit { t.ln() } else { (-t).ln_1p() })
}

/// Goal-projected utility `U(u | g, f)` of uttering category `u`.
pub fn speaker_utility(u: &str, goal: Goal, f: OneHot, table: &TypicalityTable) -> Result<f64> {
    let uc = table.resolve(u)?;
    let n = table.n_features();
    if goal.0 >= n || f.0 >= n {
        return Err(Error::InvalidArgument(format!(
            "goal {} / feature vector e_{} outside {n} features",
            goal.0, f.0
        )));
    }
    utility(table, uc, goal.0, f.component(goal.0) == 1.0)
}

/// Softmax speaker `S1(u) ∝ exp(λ·U(u))` over precomputed utilities.
pub fn speaker_from_utilities(lambda: f64, utilities: &[f64]) -> Result<Distribution> {
    if utilities.is_empty() {
        return Err(Error::EmptyUtterances);
    }
    if !lambda.is_finite() {
        return Err(Error::InvalidArgument(format!("lambda {lambda} is not finite")));
    }
    let logits: Vec<f64> = utilities
        .iter()
        .map(|&u| if lambda == 0.0 { 0.0 } else { lambda * u })
        .collect();
    Distribution::from_log_weights(&logits)
}

/// Pragmatic speaker's distribution over `utterances` (category indices)
/// given goal `g` and true feature vector `f`.
pub fn pragmatic_speaker(
    goal: Goal,
    f: OneHot,
    lambda: f64,
    utterances: &[usize],
    table: &TypicalityTable,
) -> Result<Distribution> {
    let utilities = utterances
        .iter()
        .map(|&u| speaker_utility(&table.categories()[u], goal, f, table))
        .collect::<Result<Vec<_>>>()?;
    speaker_from_utilities(lambda, &utilities)
}

/// Goal prior given the topic: the topic's typicality row, or uniform when
/// relevance is ablated.
pub fn relevance(topic: &str, table: &TypicalityTable, prior: GoalPrior) -> Result<Distribution> {
    let row = table.row_of(topic)?;
    match prior {
        GoalPrior::Relevance => Distribution::from_probs(row.to_vec()),
        GoalPrior::Uniform => Ok(Distribution::uniform(row.len())),
    }
}

/// Vehicle-speaker terms per goal `j`: `log S1(v | g_j, e_j)` (hit) and
/// `log S1(v | g_j, e_i)` for any `i != j` (miss), with λ-derivatives.
struct VehicleSpeaker {
    log_hit: Vec<f64>,
    log_miss: Vec<f64>,
    dlog_hit: Vec<f64>,
    dlog_miss: Vec<f64>,
}

fn vehicle_speaker(lambda: f64, utterances: &[usize], vehicle: usize, table: &TypicalityTable) -> Result<VehicleSpeaker> {
    let n = table.n_features();
    let v = utterances
        .iter()
        .position(|&u| u == vehicle)
        .expect("resolved utterances contain the vehicle");
    let mut out = VehicleSpeaker {
        log_hit: Vec::with_capacity(n),
        log_miss: Vec::with_capacity(n),
        dlog_hit: Vec::with_capacity(n),
        dlog_miss: Vec::with_capacity(n),
    };
    let mut utilities = vec![0.0; utterances.len()];
    let mut logits = vec![0.0; utterances.len()];
    for j in 0..n {
        for hit in [true, false] {
            for (k, &u) in utterances.iter().enumerate() {
                utilities[k] = utility(table, u, j, hit)?;
                logits[k] = lambda * utilities[k];
            }
            let log_s1 = log_normalize(&logits)?;
            let expected: f64 = log_s1.iter().zip(&utilities).map(|(ls, u)| ls.exp() * u).sum();
            let (lp, dlp) = (log_s1[v], utilities[v] - expected);
            if hit {
                out.log_hit.push(lp);
                out.dlog_hit.push(dlp);
            } else {
                out.log_miss.push(lp);
                out.dlog_miss.push(dlp);
            }
        }
    }
    Ok(out)
}

/// `log Σ_g R(g|t)·S1(v|g, e_i)` for every `i`, and its λ-derivative.
fn goal_mixture(log_relevance: &[f64], speaker: &VehicleSpeaker) -> (Vec<f64>, Vec<f64>) {
    let n = log_relevance.len();
    let mut log_w = Vec::with_capacity(n);
    let mut dlog_w = Vec::with_capacity(n);
    let mut terms = vec![0.0; n];
    for i in 0..n {
        for j in 0..n {
            let s = if i == j { speaker.log_hit[j] } else { speaker.log_miss[j] };
            terms[j] = log_relevance[j] + s;
        }
        let lw = log_sum_exp(&terms);
        let mut d = 0.0;
        if lw > f64::NEG_INFINITY {
            for j in 0..n {
                let w = (terms[j] - lw).exp();
                if w > 0.0 {
                    d += w * if i == j { speaker.dlog_hit[j] } else { speaker.dlog_miss[j] };
                }
            }
        }
        log_w.push(lw);
        dlog_w.push(d);
    }
    (log_w, dlog_w)
}

struct ListenerTerms {
    support: Vec<(usize, f64)>,
    log_w: Vec<f64>,
    dlog_w: Vec<f64>,
}

fn listener_terms(metaphor: &MetaphorItem, config: &RsaConfig, table: &TypicalityTable) -> Result<ListenerTerms> {
    config.check_lambda()?;
    let utterances = resolve_utterances(config, metaphor, table)?;
    let vehicle = table.resolve(&metaphor.vehicle)?;
    let speaker = vehicle_speaker(config.lambda, &utterances, vehicle, table)?;
    let goals = relevance(&metaphor.topic, table, config.goal_prior)?;
    let (log_w, dlog_w) = goal_mixture(goals.log_probs(), &speaker);
    let support = category_support(config.category_prior, metaphor, table)?;
    Ok(ListenerTerms { support, log_w, dlog_w })
}

/// `L1(c, e_i | u) ∝ P(c)·T[c][i]·Σ_g R(g|t)·S1(u | g, e_i)` with
/// `u` the vehicle and `t` the topic, normalized over the categories that
/// carry prior mass. Always runs the full recursion regardless of
/// `config.mode`.
pub fn pragmatic_listener(
    metaphor: &MetaphorItem,
    config: &RsaConfig,
    table: &TypicalityTable,
) -> Result<JointDistribution> {
    let terms = listener_terms(metaphor, config, table)?;
    let n = table.n_features();
    let mut log_weights = Vec::with_capacity(terms.support.len() * n);
    for &(c, prior) in &terms.support {
        for i in 0..n {
            log_weights.push(prior.ln() + table.value(c, i).ln() + terms.log_w[i]);
        }
    }
    let categories = terms.support.iter().map(|&(c, _)| table.categories()[c].clone()).collect();
    Ok(JointDistribution::new(categories, n, Distribution::from_log_weights(&log_weights)?))
}

/// Marginal posterior over features for a metaphor.
pub fn interpret(metaphor: &MetaphorItem, config: &RsaConfig, table: &TypicalityTable) -> Result<Distribution> {
    match config.mode {
        InferenceMode::Full => pragmatic_listener(metaphor, config, table)?.feature_marginal(),
        InferenceMode::Fast => interpret_with_derivative(metaphor, config, table).map(|(d, _)| d),
    }
}

/// Feature marginal together with `d p_i / dλ`.
pub fn interpret_with_derivative(
    metaphor: &MetaphorItem,
    config: &RsaConfig,
    table: &TypicalityTable,
) -> Result<(Distribution, Vec<f64>)> {
    config.check_lambda()?;
    match config.mode {
        InferenceMode::Fast => {
            let beta = table.row_of(&metaphor.vehicle)?;
            let alpha = match config.goal_prior {
                GoalPrior::Relevance => table.row_of(&metaphor.topic)?.to_vec(),
                GoalPrior::Uniform => vec![1.0 / beta.len() as f64; beta.len()],
            };
            fast_with_derivative(&alpha, beta, config.lambda)
        }
        InferenceMode::Full => {
            let terms = listener_terms(metaphor, config, table)?;
            let n = table.n_features();
            let log_q: Vec<f64> = (0..n)
                .map(|i| {
                    let a: f64 = terms.support.iter().map(|&(c, prior)| prior * table.value(c, i)).sum();
                    a.ln() + terms.log_w[i]
                })
                .collect();
            let out = Distribution::from_log_weights(&log_q)?;
            let mean: f64 = out
                .probs()
                .iter()
                .zip(&terms.dlog_w)
                .filter(|(p, _)| **p > 0.0)
                .map(|(p, d)| p * d)
                .sum();
            let deriv = out
                .probs()
                .iter()
                .zip(&terms.dlog_w)
                .map(|(p, d)| if *p > 0.0 { p * (d - mean) } else { 0.0 })
                .collect();
            Ok((out, deriv))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexicon::{FeatureVocab, MetaphorClass};
    use crate::rsa::{CategoryPrior, UtteranceSet};

    fn table(rows: Vec<Vec<f64>>) -> TypicalityTable {
        let n = rows[0].len();
        let vocab = FeatureVocab::new((0..n).map(|i| format!("f{i}")).collect()).unwrap();
        let cats = (0..rows.len()).map(|c| format!("c{c}")).collect();
        TypicalityTable::new(cats, vocab, rows).unwrap()
    }

    fn metaphor() -> MetaphorItem {
        MetaphorItem::new("m", "c0", "c1", MetaphorClass::VehicleInherent)
    }

    #[test]
    fn literal_listener_puts_mass_on_uttered_category() {
        let t = table(vec![vec![0.6, 0.4], vec![0.3, 0.7]]);
        let l0 = literal_listener("c0", &t).unwrap();
        assert!((l0.prob("c0", 0) - 0.6).abs() < 1e-15);
        assert!((l0.prob("c0", 1) - 0.4).abs() < 1e-15);
        assert_eq!(l0.prob("c1", 0), 0.0);
        assert_eq!(l0.prob("c1", 1), 0.0);
        let total: f64 = l0.as_distribution().probs().iter().sum();
        assert!((total - 1.0).abs() < 1e-15);
        assert!(matches!(literal_listener("zz", &t), Err(Error::UnknownCategory(_))));
    }

    #[test]
    fn utility_closed_form() {
        let t = table(vec![vec![0.6, 0.4], vec![0.3, 0.7]]);
        let hit = speaker_utility("c0", Goal(0), OneHot(0), &t).unwrap();
        let miss = speaker_utility("c0", Goal(0), OneHot(1), &t).unwrap();
        assert!((hit - 0.6f64.ln()).abs() < 1e-15);
        assert!((miss - 0.4f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn degenerate_utility_is_explicit() {
        let vocab = FeatureVocab::new(vec!["x".into(), "y".into()]).unwrap();
        let t = TypicalityTable::new(vec!["a".into()], vocab, vec![vec![1.0, 0.0]]).unwrap();
        assert!(matches!(
            speaker_utility("a", Goal(1), OneHot(1), &t),
            Err(Error::DegenerateUtility { .. })
        ));
        assert!(matches!(
            speaker_utility("a", Goal(0), OneHot(1), &t),
            Err(Error::DegenerateUtility { .. })
        ));
        assert_eq!(speaker_utility("a", Goal(0), OneHot(0), &t).unwrap(), 0.0);
    }

    #[test]
    fn speaker_softmax_hand_values() {
        let s = speaker_from_utilities(1.0, &[0.6f64.ln(), 0.3f64.ln()]).unwrap();
        assert!((s.prob(0) - 2.0 / 3.0).abs() < 1e-15);
        assert!((s.prob(1) - 1.0 / 3.0).abs() < 1e-15);
        let s = speaker_from_utilities(0.0, &[-1.0, -5.0, -0.1]).unwrap();
        assert!(s.probs().iter().all(|p| (p - 1.0 / 3.0).abs() < 1e-15));
        let s = speaker_from_utilities(1000.0, &[-1.0, -1.1]).unwrap();
        assert!(s.prob(0) >= 1.0 - 1e-9);
        assert!(speaker_from_utilities(1.0, &[]).is_err());
    }

    #[test]
    fn relevance_is_topic_row() {
        let t = table(vec![vec![0.75, 0.25], vec![0.5, 0.5]]);
        let r = relevance("c0", &t, GoalPrior::Relevance).unwrap();
        assert_eq!(r.probs(), &[0.75, 0.25]);
        let r = relevance("c1", &t, GoalPrior::Relevance).unwrap();
        assert_eq!(r.probs(), &[0.5, 0.5]);
        let r = relevance("c0", &t, GoalPrior::Uniform).unwrap();
        assert_eq!(r.probs(), &[0.5, 0.5]);
    }

    #[test]
    fn uniform_tables_give_uniform_marginal() {
        let t = table(vec![vec![0.25; 4]; 3]);
        for lambda in [0.0, 1.0, 44.43] {
            for prior in [CategoryPrior::TopicOnly, CategoryPrior::Uniform] {
                let cfg = RsaConfig {
                    lambda,
                    category_prior: prior,
                    ..RsaConfig::default()
                };
                let out = interpret(&metaphor(), &cfg, &t).unwrap();
                for p in out.probs() {
                    assert!((p - 0.25).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn lambda_zero_topic_only_returns_topic_row() {
        let t = table(vec![vec![0.5, 0.3, 0.2], vec![0.1, 0.6, 0.3], vec![0.2, 0.2, 0.6]]);
        let cfg = RsaConfig {
            lambda: 0.0,
            ..RsaConfig::default()
        };
        let out = interpret(&metaphor(), &cfg, &t).unwrap();
        for (p, e) in out.probs().iter().zip([0.5, 0.3, 0.2]) {
            assert!((p - e).abs() < 1e-12);
        }
    }

    #[test]
    fn listener_support_follows_category_prior() {
        let t = table(vec![vec![0.5, 0.3, 0.2], vec![0.1, 0.6, 0.3]]);
        let cfg = RsaConfig {
            category_prior: CategoryPrior::Uniform,
            utterances: UtteranceSet::TopicVehiclePair,
            ..RsaConfig::default()
        };
        let l1 = pragmatic_listener(&metaphor(), &cfg, &t).unwrap();
        assert_eq!(l1.categories(), &["c0", "c1"]);
        let cfg = RsaConfig::default();
        let l1 = pragmatic_listener(&metaphor(), &cfg, &t).unwrap();
        assert_eq!(l1.categories(), &["c0"]);
    }

    #[test]
    fn full_derivative_matches_finite_difference() {
        let t = table(vec![vec![0.5, 0.3, 0.2], vec![0.1, 0.6, 0.3], vec![0.25, 0.35, 0.4]]);
        for prior in [CategoryPrior::TopicOnly, CategoryPrior::Uniform] {
            let cfg = RsaConfig {
                lambda: 2.5,
                category_prior: prior,
                ..RsaConfig::default()
            };
            let (_, d) = interpret_with_derivative(&metaphor(), &cfg, &t).unwrap();
            let h = 1e-5;
            let up = interpret(&metaphor(), &cfg.with_lambda(2.5 + h), &t).unwrap();
            let dn = interpret(&metaphor(), &cfg.with_lambda(2.5 - h), &t).unwrap();
            for i in 0..3 {
                let fd = (up.prob(i) - dn.prob(i)) / (2.0 * h);
                assert!((fd - d[i]).abs() < 1e-8, "{i}: {fd} vs {}", d[i]);
            }
        }
    }

    #[test]
    fn interpret_paths_agree() {
        let t = table(vec![vec![0.5, 0.3, 0.2], vec![0.1, 0.6, 0.3], vec![0.25, 0.35, 0.4]]);
        let cfg = RsaConfig {
            lambda: 7.0,
            category_prior: CategoryPrior::Uniform,
            ..RsaConfig::default()
        };
        let a = interpret(&metaphor(), &cfg, &t).unwrap();
        let (b, _) = interpret_with_derivative(&metaphor(), &cfg, &t).unwrap();
        for (x, y) in a.probs().iter().zip(b.probs()) {
            assert!((x - y).abs() < 1e-14);
        }
    }
}
