//! Multiple-choice QA. Choices are presented one at a time; the agent either
//! answers with the current choice or moves on to the next one.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;

use rand::seq::SliceRandom;
use serde_json::{json, Map, Value};

use crate::env::{EnvConfig, Environment, EpisodeOutcome, Observation, StepResult, Task};
use crate::error::{Error, Result};
use crate::featurize::{EmbeddingStore, InformedQaFeaturizer, Layout, QaFeaturizer, SimpleQaFeaturizer};
use crate::pool::DataPool;
use crate::rng::{RunRng, Stream, StreamRng};
use crate::sample::QaSample;
use crate::space::ActionSpace;

use super::{flag, step_result};

pub const ANSWER_ACTION: &str = "ANS";
pub const CONTINUE_ACTION: &str = "CONT";

const ANSWER_IX: usize = 0;
const CONTINUE_IX: usize = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct QaEpisode {
    pub sample: QaSample,
    /// Presentation order as indices into `sample.choices`.
    pub order: Vec<usize>,
    pub choice_cursor: usize,
    pub done: bool,
    pub selected: Option<usize>,
    /// Position in `order` of the choice the last action applied to.
    pub last_acted: Option<usize>,
    pub steps: usize,
    pub total_reward: f64,
}

impl QaEpisode {
    fn current(&self) -> &(String, String) {
        &self.sample.choices[self.order[self.choice_cursor]]
    }
}

pub struct QaEnv {
    config: EnvConfig,
    actions: ActionSpace,
    pool: Arc<DataPool<QaSample>>,
    featurizer: Box<dyn QaFeaturizer>,
    rng: StreamRng,
    layout: Layout,
    shuffle_choices: bool,
    episode: Option<QaEpisode>,
}

impl QaEnv {
    pub fn new(featurizer: Box<dyn QaFeaturizer>, config: EnvConfig) -> Result<Self> {
        let actions = ActionSpace::new([ANSWER_ACTION, CONTINUE_ACTION])?
            .with_alias("ANSWER", ANSWER_ACTION)?
            .with_alias("CONTINUE", CONTINUE_ACTION)?;
        Ok(Self {
            actions,
            pool: Arc::new(DataPool::new(Vec::<String>::new())?),
            layout: featurizer.layout().clone(),
            featurizer,
            rng: RunRng::new(config.seed).stream(Stream::Env),
            config,
            shuffle_choices: false,
            episode: None,
        })
    }

    pub fn simple(store: Arc<EmbeddingStore>, config: EnvConfig) -> Result<Self> {
        Self::new(Box::new(SimpleQaFeaturizer::new(store)), config)
    }

    pub fn informed(store: Arc<EmbeddingStore>, config: EnvConfig) -> Result<Self> {
        Self::new(Box::new(InformedQaFeaturizer::new(store)), config)
    }

    /// Present choices in a seeded random order instead of dataset order.
    pub fn with_shuffled_choices(mut self, shuffle: bool) -> Self {
        self.shuffle_choices = shuffle;
        self
    }

    pub fn with_pool(mut self, pool: Arc<DataPool<QaSample>>) -> Self {
        self.pool = pool;
        self
    }

    pub fn pool(&self) -> &Arc<DataPool<QaSample>> {
        &self.pool
    }

    pub fn episode(&self) -> Option<&QaEpisode> {
        self.episode.as_ref()
    }

    fn observe(&self, ep: &QaEpisode) -> Observation {
        if ep.done {
            return self.layout.zeros();
        }
        self.featurizer.featurize(&ep.current().1)
    }
}

impl Environment for QaEnv {
    type Sample = QaSample;

    fn task(&self) -> Task {
        Task::Qa
    }

    fn reset(&mut self, sample: Option<QaSample>) -> Result<Observation> {
        let sample = match sample {
            Some(s) => s,
            None => self.pool.draw_sample(&mut self.rng)?.clone(),
        };
        sample.validate()?;
        let mut order: Vec<usize> = (0..sample.choices.len()).collect();
        if self.shuffle_choices {
            order.shuffle(&mut self.rng);
        }
        self.featurizer.init_on_reset(&sample.question, &sample.facts);
        let ep = QaEpisode {
            sample,
            order,
            choice_cursor: 0,
            done: false,
            selected: None,
            last_acted: None,
            steps: 0,
            total_reward: 0.0,
        };
        let obs = self.observe(&ep);
        self.episode = Some(ep);
        Ok(obs)
    }

    fn step(&mut self, action: usize) -> Result<StepResult> {
        self.actions.check(action)?;
        let ep = self.episode.as_mut().ok_or(Error::NotReset)?;
        if ep.done {
            return Err(Error::EpisodeFinished);
        }
        ep.steps += 1;
        ep.last_acted = Some(ep.choice_cursor);
        let mut info = BTreeMap::new();
        let mut reward = 0.0;
        if action == ANSWER_IX {
            ep.done = true;
            let chosen = ep.order[ep.choice_cursor];
            ep.selected = Some(chosen);
            if ep.sample.choices[chosen].0 == ep.sample.answer_key {
                reward = 1.0;
            }
        } else if ep.choice_cursor + 1 < ep.order.len() {
            ep.choice_cursor += 1;
        } else {
            ep.done = true;
            info = flag("ran_out_of_choices");
        }
        if !ep.done && self.config.max_steps.is_some_and(|m| ep.steps >= m) {
            ep.done = true;
            info = flag("truncated");
        }
        ep.total_reward += reward;
        let done = ep.done;
        let ep = self.episode.as_ref().unwrap();
        Ok(step_result(self.observe(ep), reward, done, info))
    }

    fn add_sample(&mut self, sample: QaSample, weight: f64) -> Result<()> {
        sample.validate()?;
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
        Some(if ep.current().0 == ep.sample.answer_key {
            ANSWER_IX
        } else {
            CONTINUE_IX
        })
    }

    fn outcome(&self) -> Option<EpisodeOutcome> {
        let ep = self.episode.as_ref().filter(|e| e.done)?;
        let correct = ep
            .selected
            .is_some_and(|i| ep.sample.choices[i].0 == ep.sample.answer_key);
        Some(EpisodeOutcome::Choice { correct })
    }

    fn transcript(&self) -> Option<Value> {
        let ep = self.episode.as_ref()?;
        let choices: Map<String, Value> = ep
            .sample
            .choices
            .iter()
            .map(|(k, t)| (k.clone(), Value::String(t.clone())))
            .collect();
        let predicted = ep.selected.map(|i| ep.sample.choices[i].0.clone());
        Some(json!({
            "question": ep.sample.question,
            "facts": ep.sample.facts,
            "choices": choices,
            "true_label": ep.sample.answer_key,
            "predicted_label": predicted,
            "total_reward": ep.total_reward,
        }))
    }

    fn render(&self) -> String {
        let Some(ep) = self.episode.as_ref() else {
            return String::new();
        };
        let mut out = String::new();
        // Shows the last action's step index and the choice it applied to.
        let _ = writeln!(out, "Step {}", ep.steps.saturating_sub(1));
        let _ = writeln!(out, "Question: {}", ep.sample.question);
        for f in &ep.sample.facts {
            let _ = writeln!(out, "Fact: {f}");
        }
        let pos = ep.last_acted.unwrap_or(ep.choice_cursor);
        let (key, text) = &ep.sample.choices[ep.order[pos]];
        let _ = write!(out, "Choice {key}: {text}");
        out
    }
}
