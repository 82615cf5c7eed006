//! The environment contract shared by all tasks.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::featurize::{FeatureVector, Layout};
use crate::metrics;
use crate::sample::PoolSample;
use crate::space::ActionSpace;

pub type Observation = FeatureVector;

/// The three supported tasks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    SeqTag,
    Mlc,
    Qa,
}

impl Task {
    /// Name of the evaluation metric reported for this task.
    pub fn metric_name(self) -> &'static str {
        match self {
            Task::SeqTag | Task::Mlc => "micro_f1",
            Task::Qa => "accuracy",
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Task::SeqTag => "seqtag",
            Task::Mlc => "mlc",
            Task::Qa => "qa",
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "seqtag" | "st" | "sequence-tagging" => Ok(Task::SeqTag),
            "mlc" | "multi-label" => Ok(Task::Mlc),
            "qa" | "question-answering" => Ok(Task::Qa),
            other => Err(Error::Config(format!("unknown task `{other}`"))),
        }
    }
}

/// Sparse rewards arrive once at the end of an episode; dense rewards are
/// per-step score differences that sum to the same final score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RewardFlavor {
    Sparse,
    #[default]
    Dense,
}

impl FromStr for RewardFlavor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sparse" => Ok(RewardFlavor::Sparse),
            "dense" => Ok(RewardFlavor::Dense),
            other => Err(Error::Config(format!("unknown reward flavor `{other}`"))),
        }
    }
}

impl fmt::Display for RewardFlavor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RewardFlavor::Sparse => "sparse",
            RewardFlavor::Dense => "dense",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvConfig {
    pub reward: RewardFlavor,
    /// Upper bound on steps per episode; `None` leaves episode length to the task.
    pub max_steps: Option<usize>,
    pub seed: u64,
}

impl Default for EnvConfig {
    fn default() -> Self {
        Self {
            reward: RewardFlavor::Dense,
            max_steps: None,
            seed: 0,
        }
    }
}

impl EnvConfig {
    pub fn new(reward: RewardFlavor, seed: u64) -> Self {
        Self {
            reward,
            max_steps: None,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub observation: Observation,
    pub reward: f64,
    pub done: bool,
    /// Free-form diagnostics.
    pub info: BTreeMap<String, String>,
}

/// Final result of an episode, in a form that aggregates into the task metric.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EpisodeOutcome {
    /// Overlap counts for token or set F1.
    Overlap {
        matched: usize,
        predicted: usize,
        actual: usize,
    },
    /// Whether the selected choice was the answer.
    Choice { correct: bool },
}

impl EpisodeOutcome {
    /// Per-episode score: F1 for overlaps, 0/1 for choices.
    pub fn score(&self) -> f64 {
        match *self {
            EpisodeOutcome::Overlap {
                matched,
                predicted,
                actual,
            } => metrics::f1_from_counts(matched, predicted, actual).f1,
            EpisodeOutcome::Choice { correct } => f64::from(u8::from(correct)),
        }
    }
}

/// What a reward function sees after an action has been applied.
#[derive(Debug, Clone, Copy)]
pub struct RewardInput<'a> {
    pub action: &'a str,
    pub targets: &'a [String],
    /// Predictions before this step.
    pub previous: &'a [String],
    /// Predictions after this step.
    pub current: &'a [String],
    pub done: bool,
}

/// Pluggable reward for the labelling environments.
pub trait RewardFunction: Send + Sync {
    fn reward(&self, input: &RewardInput<'_>) -> f64;
}

/// Gym-style episodic environment with a discrete action space.
pub trait Environment {
    type Sample: PoolSample;

    fn task(&self) -> Task;

    /// Starts an episode on `sample`, or on a sample drawn from the pool.
    fn reset(&mut self, sample: Option<Self::Sample>) -> Result<Observation>;

    fn step(&mut self, action: usize) -> Result<StepResult>;

    /// Makes `sample` eligible for subsequent draws.
    fn add_sample(&mut self, sample: Self::Sample, weight: f64) -> Result<()>;

    fn pool_len(&self) -> usize;

    fn action_space(&self) -> &ActionSpace;

    fn layout(&self) -> &Layout;

    fn observation_dim(&self) -> usize {
        self.layout().total_len()
    }

    fn is_done(&self) -> bool;

    /// Sum of rewards since the last reset.
    fn total_reward(&self) -> f64;

    /// Action an oracle with access to the labels would take next.
    fn oracle_action(&self) -> Option<usize>;

    /// Outcome of the finished episode; `None` while running.
    fn outcome(&self) -> Option<EpisodeOutcome>;

    /// JSON record of the current episode.
    fn transcript(&self) -> Option<serde_json::Value>;

    fn render(&self) -> String;
}
