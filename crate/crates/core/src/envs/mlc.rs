//! Multi-label classification: grow a label sequence with INSERT actions and
//! stop with TERM.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde_json::json;

use crate::env::{
    EnvConfig, Environment, EpisodeOutcome, Observation, RewardFunction, RewardInput, StepResult,
    Task,
};
use crate::error::{Error, Result};
use crate::featurize::{DefaultMlcFeaturizer, EmbeddingStore, Layout, MlcFeaturizer};
use crate::metrics::{set_f1, set_overlap};
use crate::pool::DataPool;
use crate::reward::SetF1Reward;
use crate::rng::{RunRng, Stream, StreamRng};
use crate::sample::Sample;
use crate::space::ActionSpace;

use super::{flag, step_result};

/// Action that ends the episode. Always the last index of the action space.
pub const TERM_ACTION: &str = "TERM";

#[derive(Debug, Clone, PartialEq)]
pub struct MlcEpisode {
    pub sample: Sample,
    pub emitted: Vec<String>,
    pub done: bool,
    pub prev_score: f64,
    pub step_count: usize,
    pub total_reward: f64,
}

pub struct MlcEnv {
    config: EnvConfig,
    labels: Vec<String>,
    actions: ActionSpace,
    pool: Arc<DataPool<Sample>>,
    featurizer: Box<dyn MlcFeaturizer>,
    reward_fn: Box<dyn RewardFunction>,
    rng: StreamRng,
    layout: Layout,
    episode: Option<MlcEpisode>,
}

impl MlcEnv {
    pub fn new<S: AsRef<str>>(
        labels: &[S],
        store: Arc<EmbeddingStore>,
        config: EnvConfig,
    ) -> Result<Self> {
        let labels: Vec<String> = labels.iter().map(|l| l.as_ref().to_string()).collect();
        if labels.iter().any(|l| l == TERM_ACTION) {
            return Err(Error::Config(format!(
                "`{TERM_ACTION}` is reserved and cannot be a label"
            )));
        }
        let featurizer = DefaultMlcFeaturizer::new(store, &labels);
        let actions = ActionSpace::new(
            labels
                .iter()
                .cloned()
                .chain(std::iter::once(TERM_ACTION.to_string())),
        )?;
        Ok(Self {
            actions,
            pool: Arc::new(DataPool::new(labels.iter().cloned())?),
            labels,
            layout: featurizer.layout().clone(),
            featurizer: Box::new(featurizer),
            reward_fn: Box::new(SetF1Reward::new(config.reward)),
            rng: RunRng::new(config.seed).stream(Stream::Env),
            config,
            episode: None,
        })
    }

    pub fn with_featurizer(mut self, featurizer: Box<dyn MlcFeaturizer>) -> Self {
        self.layout = featurizer.layout().clone();
        self.featurizer = featurizer;
        self
    }

    pub fn with_reward_function(mut self, reward_fn: Box<dyn RewardFunction>) -> Self {
        self.reward_fn = reward_fn;
        self
    }

    pub fn with_pool(mut self, pool: Arc<DataPool<Sample>>) -> Result<Self> {
        if pool.labels() != self.labels.as_slice() {
            return Err(Error::Config("pool vocabulary differs from env labels".into()));
        }
        self.pool = pool;
        Ok(self)
    }

    pub fn pool(&self) -> &Arc<DataPool<Sample>> {
        &self.pool
    }

    /// Steps allowed per episode: enough to insert every label and then terminate.
    pub fn step_cap(&self) -> usize {
        let cap = self.labels.len() + 1;
        self.config.max_steps.map_or(cap, |m| m.min(cap))
    }

    pub fn term_action(&self) -> usize {
        self.labels.len()
    }

    pub fn episode(&self) -> Option<&MlcEpisode> {
        self.episode.as_ref()
    }

    fn observe(&self, ep: &MlcEpisode) -> Result<Observation> {
        if ep.done {
            return Ok(self.layout.zeros());
        }
        self.featurizer.featurize(&ep.emitted)
    }
}

impl Environment for MlcEnv {
    type Sample = Sample;

    fn task(&self) -> Task {
        Task::Mlc
    }

    fn reset(&mut self, sample: Option<Sample>) -> Result<Observation> {
        let sample = match sample {
            Some(s) => s,
            None => self.pool.draw_sample(&mut self.rng)?.clone(),
        };
        self.featurizer.init_on_reset(&sample.input_text.text());
        let ep = MlcEpisode {
            sample,
            emitted: Vec::new(),
            done: false,
            prev_score: 0.0,
            step_count: 0,
            total_reward: 0.0,
        };
        let obs = self.observe(&ep)?;
        self.episode = Some(ep);
        Ok(obs)
    }

    fn step(&mut self, action: usize) -> Result<StepResult> {
        self.actions.check(action)?;
        let cap = self.step_cap();
        let term = self.term_action();
        let mut ep = self.episode.take().ok_or(Error::NotReset)?;
        if ep.done {
            self.episode = Some(ep);
            return Err(Error::EpisodeFinished);
        }
        ep.step_count += 1;
        let mut info = BTreeMap::new();
        let reward = if action == term {
            ep.done = true;
            self.reward_fn.reward(&RewardInput {
                action: TERM_ACTION,
                targets: &ep.sample.oracle_label,
                previous: &ep.emitted,
                current: &ep.emitted,
                done: true,
            })
        } else {
            ep.emitted.push(self.labels[action].clone());
            if ep.step_count >= cap {
                ep.done = true;
                info = flag("step_cap");
            }
            let n = ep.emitted.len();
            self.reward_fn.reward(&RewardInput {
                action: &ep.emitted[n - 1],
                targets: &ep.sample.oracle_label,
                previous: &ep.emitted[..n - 1],
                current: &ep.emitted,
                done: ep.done,
            })
        };
        ep.prev_score = set_f1(&ep.sample.oracle_label, &ep.emitted).f1;
        ep.total_reward += reward;
        let observation = self.observe(&ep)?;
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
        let next = ep
            .sample
            .oracle_label
            .iter()
            .filter(|l| !ep.emitted.contains(l))
            .find_map(|l| self.actions.action_to_ix(l).ok());
        Some(next.unwrap_or(self.term_action()))
    }

    fn outcome(&self) -> Option<EpisodeOutcome> {
        let ep = self.episode.as_ref().filter(|e| e.done)?;
        let (matched, predicted, actual) = set_overlap(&ep.sample.oracle_label, &ep.emitted);
        Some(EpisodeOutcome::Overlap {
            matched,
            predicted,
            actual,
        })
    }

    fn transcript(&self) -> Option<serde_json::Value> {
        let ep = self.episode.as_ref()?;
        Some(json!({
            "text": ep.sample.input_text.text(),
            "true_label": ep.sample.oracle_label,
            "predicted_label": ep.emitted,
            "total_reward": ep.total_reward,
        }))
    }

    fn render(&self) -> String {
        self.transcript()
            .map(|t| serde_json::to_string_pretty(&t).expect("json value"))
            .unwrap_or_default()
    }
}
