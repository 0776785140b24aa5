//! Rational Speech Act inference for "X are Y" metaphors.
//!
//! The feature-vector support is the set of one-hot vectors `e_1..e_n`,
//! with `P(e_i | c) = T[c][i]`. Under that support the goal-projected
//! utility has a closed form:
//!
//! ```text
//! U(u | g_j, e_i) = log T[u][j]        if i == j
//!                 = log (1 - T[u][j])  otherwise
//! ```
//!
//! so the speaker only ever needs two softmaxes per goal (the "hit" and
//! "miss" cases). All arithmetic runs on log-weights.

mod engine;
mod fast;

use serde::{Deserialize, Serialize};

use crate::dist::Distribution;
use crate::error::{Error, Result};
use crate::lexicon::{MetaphorItem, TypicalityTable};

pub use engine::{
    interpret, interpret_with_derivative, literal_listener, pragmatic_listener, pragmatic_speaker, relevance,
    speaker_from_utilities, speaker_utility,
};
pub use fast::{interpret_fast, stretch_typicality};

/// Utterance alternatives the speaker chooses among.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UtteranceSet {
    /// Every category noun in the typicality table.
    #[default]
    AllCategories,
    /// Only the metaphor's topic and vehicle.
    TopicVehiclePair,
    /// A fixed list of category ids.
    Explicit(Vec<String>),
}

/// Prior `P(c)` over the category of the entity under discussion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CategoryPrior {
    /// Uniform over {topic, vehicle}.
    Uniform,
    /// All mass on the topic.
    #[default]
    TopicOnly,
    /// All mass on the vehicle; does not depend on the topic at all.
    VehicleOnly,
}

/// Prior over communicative goals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GoalPrior {
    /// `R(g_j | t) = T[t][j]`.
    #[default]
    Relevance,
    /// `1/n` for every goal (relevance removed).
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InferenceMode {
    /// Literal listener, speaker and pragmatic listener recursion.
    #[default]
    Full,
    /// Stretch the vehicle row by lambda and combine with the topic row.
    Fast,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RsaConfig {
    /// Speaker rationality.
    pub lambda: f64,
    pub utterances: UtteranceSet,
    pub category_prior: CategoryPrior,
    pub goal_prior: GoalPrior,
    pub mode: InferenceMode,
}

impl Default for RsaConfig {
    fn default() -> Self {
        RsaConfig {
            lambda: 1.0,
            utterances: UtteranceSet::AllCategories,
            category_prior: CategoryPrior::TopicOnly,
            goal_prior: GoalPrior::Relevance,
            mode: InferenceMode::Full,
        }
    }
}

impl RsaConfig {
    pub fn with_lambda(&self, lambda: f64) -> Self {
        RsaConfig {
            lambda,
            ..self.clone()
        }
    }

    pub(crate) fn check_lambda(&self) -> Result<()> {
        if !self.lambda.is_finite() {
            return Err(Error::InvalidArgument(format!("lambda {} is not finite", self.lambda)));
        }
        Ok(())
    }
}

/// Index of a communicative goal: `g_j(f) = f_j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Goal(pub usize);

/// A point of the feature-vector support: the one-hot vector `e_i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct OneHot(pub usize);

impl OneHot {
    /// Value of component `j`.
    pub fn component(self, j: usize) -> f64 {
        if self.0 == j {
            1.0
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SupportMode {
    #[default]
    OneHot,
}

/// Enumerable support of feature vectors over `n` features.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FeatureVectorSpace {
    pub mode: SupportMode,
    pub n: usize,
}

impl FeatureVectorSpace {
    pub fn one_hot(n: usize) -> Self {
        FeatureVectorSpace {
            mode: SupportMode::OneHot,
            n,
        }
    }

    pub fn support(&self) -> impl Iterator<Item = OneHot> {
        (0..self.n).map(OneHot)
    }

    pub fn contains(&self, f: OneHot) -> bool {
        f.0 < self.n
    }
}

/// Distribution over (category, feature) pairs, category-major.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution {
    categories: Vec<String>,
    n_features: usize,
    dist: Distribution,
}

impl JointDistribution {
    pub(crate) fn new(categories: Vec<String>, n_features: usize, dist: Distribution) -> Self {
        debug_assert_eq!(categories.len() * n_features, dist.len());
        JointDistribution {
            categories,
            n_features,
            dist,
        }
    }

    pub fn categories(&self) -> &[String] {
        &self.categories
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn as_distribution(&self) -> &Distribution {
        &self.dist
    }

    /// Probability of `(category, e_feature)`; zero for categories outside
    /// the support.
    pub fn prob(&self, category: &str, feature: usize) -> f64 {
        match self.categories.iter().position(|c| c == category) {
            Some(c) => self.dist.prob(c * self.n_features + feature),
            None => 0.0,
        }
    }

    pub fn feature_marginal(&self) -> Result<Distribution> {
        let lp = self.dist.log_probs();
        let marginal: Vec<f64> = (0..self.n_features)
            .map(|i| {
                let terms: Vec<f64> = (0..self.categories.len()).map(|c| lp[c * self.n_features + i]).collect();
                crate::dist::log_sum_exp(&terms)
            })
            .collect();
        Distribution::from_log_weights(&marginal)
    }
}

/// Category indices of the utterance alternatives for a metaphor.
pub fn resolve_utterances(config: &RsaConfig, metaphor: &MetaphorItem, table: &TypicalityTable) -> Result<Vec<usize>> {
    let vehicle = table.resolve(&metaphor.vehicle)?;
    let utterances = match &config.utterances {
        UtteranceSet::AllCategories => (0..table.categories().len()).collect(),
        UtteranceSet::TopicVehiclePair => {
            let topic = table.resolve(&metaphor.topic)?;
            if topic == vehicle {
                vec![vehicle]
            } else {
                vec![topic, vehicle]
            }
        }
        UtteranceSet::Explicit(names) => {
            let mut out: Vec<usize> = Vec::with_capacity(names.len());
            for name in names {
                let c = table.resolve(name)?;
                if !out.contains(&c) {
                    out.push(c);
                }
            }
            out
        }
    };
    if utterances.is_empty() {
        return Err(Error::EmptyUtterances);
    }
    if !utterances.contains(&vehicle) {
        return Err(Error::VehicleNotUttered(metaphor.vehicle.clone()));
    }
    Ok(utterances)
}

/// Categories carrying prior mass, with their probabilities.
pub(crate) fn category_support(
    prior: CategoryPrior,
    metaphor: &MetaphorItem,
    table: &TypicalityTable,
) -> Result<Vec<(usize, f64)>> {
    let topic = table.resolve(&metaphor.topic)?;
    let vehicle = table.resolve(&metaphor.vehicle)?;
    Ok(match prior {
        CategoryPrior::TopicOnly => vec![(topic, 1.0)],
        CategoryPrior::VehicleOnly => vec![(vehicle, 1.0)],
        CategoryPrior::Uniform if topic == vehicle => vec![(topic, 1.0)],
        CategoryPrior::Uniform => vec![(topic, 0.5), (vehicle, 0.5)],
    })
}
