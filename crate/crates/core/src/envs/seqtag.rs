//! Left-to-right sequence tagging. Each step tags the current word; the
//! observation is the current word plus the previously predicted label.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde_json::json;

use crate::env::{
    EnvConfig, Environment, EpisodeOutcome, Observation, RewardFunction, RewardInput, StepResult,
    Task,
};
use crate::error::{Error, Result};
use crate::featurize::{DefaultSeqTagFeaturizer, EmbeddingStore, Layout, SeqTagFeaturizer};
use crate::metrics::{positional_matches, token_f1};
use crate::pool::DataPool;
use crate::reward::TokenF1Reward;
use crate::rng::{RunRng, Stream, StreamRng};
use crate::sample::Sample;
use crate::space::ActionSpace;

use super::{flag, step_result};

#[derive(Debug, Clone, PartialEq)]
pub struct SeqTagEpisode {
    pub sample: Sample,
    pub cursor: usize,
    pub predicted: Vec<String>,
    pub done: bool,
    /// Prefix F1 after the last step.
    pub prev_score: f64,
    pub total_reward: f64,
}

impl SeqTagEpisode {
    fn tokens(&self) -> &[String] {
        self.sample.tokens().expect("validated on reset")
    }
}

pub struct SeqTagEnv {
    config: EnvConfig,
    actions: ActionSpace,
    pool: Arc<DataPool<Sample>>,
    featurizer: Box<dyn SeqTagFeaturizer>,
    reward_fn: Box<dyn RewardFunction>,
    rng: StreamRng,
    layout: Layout,
    episode: Option<SeqTagEpisode>,
}

impl SeqTagEnv {
    /// Environment over `labels` with the default featurizer and token-F1 reward.
    pub fn new<S: AsRef<str>>(
        labels: &[S],
        store: Arc<EmbeddingStore>,
        config: EnvConfig,
    ) -> Result<Self> {
        let labels: Vec<String> = labels.iter().map(|l| l.as_ref().to_string()).collect();
        let featurizer = DefaultSeqTagFeaturizer::new(store, &labels);
        Ok(Self {
            actions: ActionSpace::new(labels.iter().cloned())?,
            pool: Arc::new(DataPool::new(labels)?),
            layout: featurizer.layout().clone(),
            featurizer: Box::new(featurizer),
            reward_fn: Box::new(TokenF1Reward::new(config.reward)),
            rng: RunRng::new(config.seed).stream(Stream::Env),
            config,
            episode: None,
        })
    }

    pub fn with_featurizer(mut self, featurizer: Box<dyn SeqTagFeaturizer>) -> Self {
        self.layout = featurizer.layout().clone();
        self.featurizer = featurizer;
        self
    }

    pub fn with_reward_function(mut self, reward_fn: Box<dyn RewardFunction>) -> Self {
        self.reward_fn = reward_fn;
        self
    }

    /// Shares an existing pool snapshot. Its vocabulary must equal the action labels.
    pub fn with_pool(mut self, pool: Arc<DataPool<Sample>>) -> Result<Self> {
        if pool.labels() != self.actions.actions() {
            return Err(Error::Config("pool vocabulary differs from env labels".into()));
        }
        self.pool = pool;
        Ok(self)
    }

    pub fn pool(&self) -> &Arc<DataPool<Sample>> {
        &self.pool
    }

    pub fn config(&self) -> &EnvConfig {
        &self.config
    }

    pub fn episode(&self) -> Option<&SeqTagEpisode> {
        self.episode.as_ref()
    }

    fn observe(&self, ep: &SeqTagEpisode) -> Result<Observation> {
        if ep.done {
            return Ok(self.layout.zeros());
        }
        self.featurizer
            .featurize(ep.cursor, ep.predicted.last().map(String::as_str))
    }
}

impl Environment for SeqTagEnv {
    type Sample = Sample;

    fn task(&self) -> Task {
        Task::SeqTag
    }

    fn reset(&mut self, sample: Option<Sample>) -> Result<Observation> {
        let sample = match sample {
            Some(s) => s,
            None => self.pool.draw_sample(&mut self.rng)?.clone(),
        };
        let tokens = sample
            .tokens()
            .ok_or_else(|| Error::InvalidSample("tagging samples need tokens".into()))?;
        if tokens.is_empty() {
            return Err(Error::EmptySample);
        }
        if tokens.len() != sample.oracle_label.len() {
            return Err(Error::InvalidSample(format!(
                "{} tokens but {} labels",
                tokens.len(),
                sample.oracle_label.len()
            )));
        }
        self.featurizer.init_on_reset(tokens);
        let ep = SeqTagEpisode {
            sample,
            cursor: 0,
            predicted: Vec::new(),
            done: false,
            prev_score: 0.0,
            total_reward: 0.0,
        };
        let obs = self.observe(&ep)?;
        self.episode = Some(ep);
        Ok(obs)
    }

    fn step(&mut self, action: usize) -> Result<StepResult> {
        self.actions.check(action)?;
        let mut ep = self.episode.take().ok_or(Error::NotReset)?;
        if ep.done {
            self.episode = Some(ep);
            return Err(Error::EpisodeFinished);
        }
        let label = self.actions.ix_to_action(action)?.to_string();
        ep.predicted.push(label);
        ep.cursor += 1;
        let len = ep.tokens().len();
        let truncated = self.config.max_steps.is_some_and(|m| ep.cursor >= m) && ep.cursor < len;
        ep.done = ep.cursor == len || truncated;

        let n = ep.predicted.len();
        let reward = self.reward_fn.reward(&RewardInput {
            action: &ep.predicted[n - 1],
            targets: &ep.sample.oracle_label,
            previous: &ep.predicted[..n - 1],
            current: &ep.predicted,
            done: ep.done,
        });
        ep.prev_score = token_f1(&ep.sample.oracle_label[..n], &ep.predicted).f1;
        ep.total_reward += reward;

        let observation = self.observe(&ep)?;
        let info = if truncated {
            flag("truncated")
        } else {
            BTreeMap::new()
        };
        let done = ep.done;
        self.episode = Some(ep);
        Ok(step_result(observation, reward, done, info))
    }

    fn add_sample(&mut self, sample: Sample, weight: f64) -> Result<()> {
        Arc::make_mut(&mut self.pool).add_sample(sample, weight)
    }

    fn pool_len(&self) -> usize {
        self.pool.len()
    }

    fn action_space(&self) -> &ActionSpace {
        &self.actions
    }

    fn layout(&self) -> &Layout {
        &self.layout
    }

    fn is_done(&self) -> bool {
        self.episode.as_ref().is_some_and(|e| e.done)
    }

    fn total_reward(&self) -> f64 {
        self.episode.as_ref().map_or(0.0, |e| e.total_reward)
    }

    fn oracle_action(&self) -> Option<usize> {
        let ep = self.episode.as_ref().filter(|e| !e.done)?;
        self.actions.action_to_ix(&ep.sample.oracle_label[ep.cursor]).ok()
    }

    fn outcome(&self) -> Option<EpisodeOutcome> {
        let ep = self.episode.as_ref().filter(|e| e.done)?;
        Some(EpisodeOutcome::Overlap {
            matched: positional_matches(&ep.sample.oracle_label, &ep.predicted),
            predicted: ep.predicted.len(),
            actual: ep.sample.oracle_label.len(),
        })
    }

    fn transcript(&self) -> Option<serde_json::Value> {
        let ep = self.episode.as_ref()?;
        Some(json!({
            "text": ep.sample.input_text.text(),
            "true_label": ep.sample.oracle_label,
            "predicted_label": ep.predicted,
            "total_reward": ep.total_reward,
        }))
    }

    fn render(&self) -> String {
        self.transcript()
            .map(|t| serde_json::to_string_pretty(&t).expect("json value"))
            .unwrap_or_default()
    }
}
