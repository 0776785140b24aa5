use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use metaphor_rsa::learn::ObjectiveKind;
use metaphor_rsa::metrics::LogBase;
use metaphor_rsa::rsa::{CategoryPrior, GoalPrior, InferenceMode, RsaConfig, UtteranceSet};
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(name = "metaphor-rsa", version, about = "Rational Speech Act model of metaphor interpretation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a dataset directory; exit 0 iff it is clean.
    Validate(Common),
    /// Print the model's interpretation of one "topic are vehicle" pair.
    Interpret {
        #[arg(long)]
        topic: String,
        #[arg(long)]
        vehicle: String,
        #[command(flatten)]
        common: Common,
    },
    /// Fit lambda on the training split and write params.json.
    Train(Common),
    /// Evaluate every metaphor and write report.json / report.csv.
    Eval(Common),
    /// Run an ablation and write ablation_<kind>.json.
    Ablate {
        #[arg(long, value_enum)]
        kind: AblationKind,
        #[command(flatten)]
        common: Common,
    },
    /// Write feature-by-feature correlation matrices for model and humans.
    Corr(Common),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
pub enum AblationKind {
    #[value(name = "no-relevance")]
    #[serde(rename = "no-relevance")]
    NoRelevance,
    #[value(name = "grid-lambda")]
    #[serde(rename = "grid-lambda")]
    GridLambda,
}

impl AblationKind {
    pub fn as_str(self) -> &'static str {
        match self {
            AblationKind::NoRelevance => "no-relevance",
            AblationKind::GridLambda => "grid-lambda",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeArg {
    Full,
    Fast,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectiveArg {
    Mean,
    Pooled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
pub enum JsdBaseArg {
    #[value(name = "2")]
    #[serde(rename = "2")]
    Two,
    #[value(name = "e")]
    #[serde(rename = "e")]
    E,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UtterancesArg {
    All,
    Pair,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PriorArg {
    Topic,
    Uniform,
}

/// A fixed lambda or the one stored in `params.json`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LambdaArg {
    Value(f64),
    Learned,
}

impl FromStr for LambdaArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "learned" {
            return Ok(LambdaArg::Learned);
        }
        match s.parse::<f64>() {
            Ok(x) if x.is_finite() => Ok(LambdaArg::Value(x)),
            _ => Err(format!("expected a finite number or 'learned', got '{s}'")),
        }
    }
}

impl fmt::Display for LambdaArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LambdaArg::Value(x) => write!(f, "{x}"),
            LambdaArg::Learned => f.write_str("learned"),
        }
    }
}

impl Serialize for LambdaArg {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            LambdaArg::Value(x) => s.serialize_f64(*x),
            LambdaArg::Learned => s.serialize_str("learned"),
        }
    }
}

/// `lo:hi:count` log-spaced lambda grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            lo: 0.5,
            hi: 100.0,
            count: 200,
        }
    }
}

impl FromStr for GridSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || format!("expected lo:hi:count, got '{s}'");
        if parts.len() != 3 {
            return Err(bad());
        }
        Ok(GridSpec {
            lo: parts[0].trim().parse().map_err(|_| bad())?,
            hi: parts[1].trim().parse().map_err(|_| bad())?,
            count: parts[2].trim().parse().map_err(|_| bad())?,
        })
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.lo, self.hi, self.count)
    }
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Directory with typicality.csv, metaphors.csv and human.csv.
    #[arg(long)]
    pub data: PathBuf,
    /// typicality.csv holds mean 1-7 ratings to be row-normalized.
    #[arg(long)]
    pub raw_ratings: bool,
    #[arg(long, value_enum, default_value = "full")]
    pub mode: ModeArg,
    /// Speaker rationality, or "learned" to read params.json.
    #[arg(long, default_value = "1")]
    pub lambda: LambdaArg,
    /// Train/test split seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "mean")]
    pub objective: ObjectiveArg,
    #[arg(long, value_enum, default_value = "2")]
    pub jsd_base: JsdBaseArg,
    #[arg(long, value_enum, default_value = "all")]
    pub utterances: UtterancesArg,
    #[arg(long, value_enum, default_value = "topic")]
    pub category_prior: PriorArg,
    #[arg(long, default_value = "out")]
    pub output_dir: PathBuf,
    /// Comma-separated k values for k-agreement.
    #[arg(long, default_value = "1,3")]
    pub k: String,
    /// Lambda grid for the grid-lambda ablation.
    #[arg(long, default_value_t = GridSpec::default())]
    pub grid: GridSpec,
}

/// Fully resolved run settings, echoed into every artifact.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub data_dir: PathBuf,
    pub raw_ratings: bool,
    pub mode: ModeArg,
    pub lambda: LambdaArg,
    pub split_seed: u64,
    pub objective: ObjectiveArg,
    pub jsd_base: JsdBaseArg,
    pub utterances: UtterancesArg,
    pub category_prior: PriorArg,
    pub output_dir: PathBuf,
    pub k: Vec<usize>,
    pub grid: GridSpec,
}

impl RunConfig {
    pub fn resolve(c: &Common) -> anyhow::Result<Self> {
        Ok(RunConfig {
            data_dir: c.data.clone(),
            raw_ratings: c.raw_ratings,
            mode: c.mode,
            lambda: c.lambda,
            split_seed: c.seed,
            objective: c.objective,
            jsd_base: c.jsd_base,
            utterances: c.utterances,
            category_prior: c.category_prior,
            output_dir: c.output_dir.clone(),
            k: parse_ks(&c.k)?,
            grid: c.grid,
        })
    }

    /// Model configuration at the given lambda.
    pub fn rsa(&self, lambda: f64) -> RsaConfig {
        RsaConfig {
            lambda,
            utterances: match self.utterances {
                UtterancesArg::All => UtteranceSet::AllCategories,
                UtterancesArg::Pair => UtteranceSet::TopicVehiclePair,
            },
            category_prior: match self.category_prior {
                PriorArg::Topic => CategoryPrior::TopicOnly,
                PriorArg::Uniform => CategoryPrior::Uniform,
            },
            goal_prior: GoalPrior::Relevance,
            mode: match self.mode {
                ModeArg::Full => InferenceMode::Full,
                ModeArg::Fast => InferenceMode::Fast,
            },
        }
    }

    pub fn objective_kind(&self) -> ObjectiveKind {
        match self.objective {
            ObjectiveArg::Mean => ObjectiveKind::Mean,
            ObjectiveArg::Pooled => ObjectiveKind::Pooled,
        }
    }

    pub fn log_base(&self) -> LogBase {
        match self.jsd_base {
            JsdBaseArg::Two => LogBase::Two,
            JsdBaseArg::E => LogBase::E,
        }
    }
}

fn parse_ks(s: &str) -> anyhow::Result<Vec<usize>> {
    let mut ks = Vec::new();
    for part in s.split(',') {
        let k: usize = part.trim().parse().with_context(|| format!("bad --k entry '{part}'"))?;
        if k == 0 {
            bail!("--k values must be at least 1");
        }
        if !ks.contains(&k) {
            ks.push(k);
        }
    }
    Ok(ks)
}
